# models/problem.py - The optimization problem: weights, QoS, budgets and the transmission scheme.

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from errors import DimensionMismatch, InvalidProblem, SchemeError
from models.channel import ChannelSet


class SchemeKind(str, enum.Enum):
    RSMA = "rsma"
    MULP = "mulp"
    NOMA2 = "noma"


class ObjectiveKind(str, enum.Enum):
    WSR = "wsr"
    EE = "ee"


@dataclass(frozen=True)
class SchemeConfig:
    """Which streams exist. noma_order is (strong, weak), 0-based, or None for "try both"."""

    kind: SchemeKind = SchemeKind.RSMA
    noma_order: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.noma_order is not None:
            order = tuple(int(k) for k in self.noma_order)
            if self.kind is not SchemeKind.NOMA2:
                raise SchemeError("a decoding order only applies to NOMA2")
            if sorted(order) != [0, 1]:
                raise SchemeError(f"NOMA2 order must be a permutation of (0, 1), got {order}")
            object.__setattr__(self, "noma_order", order)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Combined WSR/EE problem: max sum u_k (C_k + log2(1+gamma_pk)) / (mu * power + P_circ).

    Use ProblemSpec.wsr / ProblemSpec.ee; the constructor only checks the invariants.
    """

    channels: ChannelSet
    u: np.ndarray
    R_th: np.ndarray
    P: float
    mu: float = 0.0
    P_circ: float = 1.0
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    objective_kind: ObjectiveKind = ObjectiveKind.WSR
    # log2(1 + min_k gamma_c,k) >= min_common_rate; zero leaves the common stream optional
    min_common_rate: float = 0.0

    def __post_init__(self):
        K = self.channels.K
        u = np.array(self.u, dtype=float).reshape(-1)
        R_th = np.array(self.R_th, dtype=float).reshape(-1)
        if u.shape != (K,) or R_th.shape != (K,):
            raise DimensionMismatch(f"u and R_th need {K} entries, got {u.shape} and {R_th.shape}")
        if np.any(u < 0) or not np.any(u > 0):
            raise InvalidProblem("weights must be nonnegative and not all zero")
        if np.any(R_th < 0) or not np.all(np.isfinite(R_th)):
            raise InvalidProblem("QoS thresholds must be finite and nonnegative")
        if not self.P > 0:
            raise InvalidProblem("power budget must be positive")
        if not self.P_circ > 0:
            raise InvalidProblem("static power must be positive")
        if self.mu < 0:
            raise InvalidProblem("amplifier inefficiency must be nonnegative")
        kind = ObjectiveKind(self.objective_kind)
        if kind is ObjectiveKind.WSR and (self.mu != 0 or self.P_circ != 1):
            raise InvalidProblem("WSR mode requires mu = 0 and P_circ = 1")
        if kind is ObjectiveKind.EE and not np.all(u == 1):
            raise InvalidProblem("EE mode requires unit weights")
        if self.scheme.kind is SchemeKind.NOMA2 and K != 2:
            raise SchemeError(f"NOMA2 needs exactly two users, got K = {K}")
        if not (np.isfinite(self.min_common_rate) and self.min_common_rate >= 0):
            raise InvalidProblem("the minimum common rate must be finite and nonnegative")
        if self.min_common_rate > 0 and self.scheme.kind is SchemeKind.MULP:
            raise SchemeError("MU-LP has no common stream to carry a minimum common rate")
        u.setflags(write=False)
        R_th.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "R_th", R_th)
        object.__setattr__(self, "P", float(self.P))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "P_circ", float(self.P_circ))
        object.__setattr__(self, "objective_kind", kind)
        object.__setattr__(self, "min_common_rate", float(self.min_common_rate))

    @classmethod
    def wsr(cls, channels, P, u=None, R_th=None, scheme=None, min_common_rate=0.0) -> "ProblemSpec":
        K = channels.K
        return cls(
            channels=channels,
            u=np.ones(K) if u is None else u,
            R_th=np.zeros(K) if R_th is None else R_th,
            P=P,
            scheme=scheme or SchemeConfig(),
            objective_kind=ObjectiveKind.WSR,
            min_common_rate=min_common_rate,
        )

    @classmethod
    def ee(cls, channels, P, mu, P_circ, R_th=None, scheme=None, min_common_rate=0.0) -> "ProblemSpec":
        K = channels.K
        return cls(
            channels=channels,
            u=np.ones(K),
            R_th=np.zeros(K) if R_th is None else R_th,
            P=P,
            mu=mu,
            P_circ=P_circ,
            scheme=scheme or SchemeConfig(),
            objective_kind=ObjectiveKind.EE,
            min_common_rate=min_common_rate,
        )

    # -----------------------------
    # Shape of the scheme
    # -----------------------------

    @property
    def K(self) -> int:
        return self.channels.K

    @property
    def M(self) -> int:
        return self.channels.M

    @property
    def h(self) -> np.ndarray:
        return self.channels.h

    @property
    def is_ee(self) -> bool:
        return self.objective_kind is ObjectiveKind.EE

    @property
    def common_enabled(self) -> bool:
        return self.scheme.kind is not SchemeKind.MULP

    @property
    def common_sinr_floor(self) -> float:
        return 2.0**self.min_common_rate - 1.0

    def _noma_order(self) -> tuple[int, int]:
        if self.scheme.noma_order is None:
            raise SchemeError("NOMA2 decoding order is unset; expand the problem with scheme_variants first")
        return self.scheme.noma_order

    @property
    def private_users(self) -> tuple[int, ...]:
        """Users that own a private stream."""
        if self.scheme.kind is SchemeKind.NOMA2:
            return (self._noma_order()[0],)
        return tuple(range(self.K))

    @property
    def pinned_common(self) -> tuple[int, ...]:
        """Users whose common-rate share is fixed to zero."""
        if self.scheme.kind is SchemeKind.MULP:
            return tuple(range(self.K))
        if self.scheme.kind is SchemeKind.NOMA2:
            return (self._noma_order()[0],)
        return ()

    def rescaled(self) -> tuple["ProblemSpec", float]:
        """Returns (h' = c h, P' = P / c^2, mu' = mu c^2) so that channel norms sit in [1e-3, 1e3].

        Precoders map back with p = c p'. SINRs and the objective are unchanged.
        """
        norms = np.sqrt(self.channels.norms_sq)
        norms = norms[norms > 0]
        if np.all((norms >= 1e-3) & (norms <= 1e3)):
            return self, 1.0
        c = 1.0 / np.sqrt(norms.max() * norms.min())
        scaled = replace(self, channels=self.channels.scaled(c), P=self.P / c**2, mu=self.mu * c**2)
        return scaled, float(c)


def apply_scheme(scheme: SchemeConfig, problem: ProblemSpec) -> ProblemSpec:
    """Returns the problem restricted to `scheme` (MULP: no common stream; NOMA2: one private stream)."""
    if scheme.kind is SchemeKind.NOMA2 and problem.K != 2:
        raise SchemeError(f"NOMA2 needs exactly two users, got K = {problem.K}")
    return replace(problem, scheme=scheme)


def scheme_variants(problem: ProblemSpec) -> list[ProblemSpec]:
    """Expands an unset NOMA2 order into both orders, strongest channel first as the strong user."""
    if problem.scheme.kind is not SchemeKind.NOMA2 or problem.scheme.noma_order is not None:
        return [problem]
    norms = problem.channels.norms_sq
    first = (0, 1) if norms[0] >= norms[1] else (1, 0)
    second = (first[1], first[0])
    return [apply_scheme(SchemeConfig(SchemeKind.NOMA2, order), problem) for order in (first, second)]
