# models/precoder.py - Common and private precoding vectors.

from dataclasses import dataclass

import numpy as np

from errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class PrecoderSet:
    """p_c (length M) and one private precoder p_k (length M) per user."""

    p_c: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        p_c = np.array(self.p_c, dtype=complex).reshape(-1)
        p = np.array(self.p, dtype=complex)
        if p.ndim == 1:
            p = p.reshape(1, -1)
        if p.ndim != 2 or p.shape[1] != p_c.shape[0]:
            raise DimensionMismatch(f"private precoders {p.shape} do not match common precoder {p_c.shape}")
        p_c.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "p_c", p_c)
        object.__setattr__(self, "p", p)

    @classmethod
    def zeros(cls, K: int, M: int) -> "PrecoderSet":
        return cls(np.zeros(M, dtype=complex), np.zeros((K, M), dtype=complex))

    @property
    def K(self) -> int:
        return self.p.shape[0]

    @property
    def M(self) -> int:
        return self.p.shape[1]

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.p_c) ** 2) + np.sum(np.abs(self.p) ** 2))

    def scaled(self, c: float) -> "PrecoderSet":
        return PrecoderSet(self.p_c * c, self.p * c)

    def rotated(self, h: np.ndarray) -> "PrecoderSet":
        """Rotates p_k by e^{-i arg(h_k^H p_k)} and p_c by e^{-i arg(h_1^H p_c)}.

        Every SINR is unchanged; afterwards h_k^H p_k and h_1^H p_c are real and nonnegative.
        """
        h = np.asarray(h)
        if h.shape != self.p.shape:
            raise DimensionMismatch(f"channels {h.shape} do not match precoders {self.p.shape}")
        p = self.p.copy()
        for k in range(self.K):
            p[k] = p[k] * np.exp(-1j * np.angle(np.vdot(h[k], p[k])))
        p_c = self.p_c * np.exp(-1j * np.angle(np.vdot(h[0], self.p_c)))
        return PrecoderSet(p_c, p)

    def stacked(self) -> np.ndarray:
        """All precoders as one complex vector (p_c first)."""
        return np.concatenate([self.p_c, self.p.reshape(-1)])
