# baseline/sca.py - Successive convex approximation: a local solver used as baseline and warm start.
#
# Every nonconvex SINR constraint  x <= |a|^2 / y  (a = h^H p, y = interference + 1) is replaced by
# its first-order lower bound around the current point,
#       |a|^2 / y >= 2 Re(a0^* a) / y0 - |a0|^2 / y0^2 * y,
# which is tight at the current point, and each rate log(1 + x) by the concave minorant
#       log(1 + x) >= log(1 + x0) + 1 - (1 + x0) / (1 + x).
# The current point stays feasible for the next subproblem, so the objective cannot decrease.
# Energy efficiency runs Dinkelbach's parametric form in the same loop: with lambda = f(x_t) the
# subproblem value at x_t is zero, hence f(x_{t+1}) >= lambda = f(x_t).

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from conic.program import Affine, ProgramBuilder
from conic.solver import SolverSettings, solve
from models.precoder import PrecoderSet
from models.problem import ProblemSpec, scheme_variants
from models.report import SolutionReport, compute_sinrs, make_report
from sitbb.node import split_common_rate

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


class InitStrategy(str, enum.Enum):
    SVD_MRT = "svd-mrt"
    RANDOM = "random"


class ScaStatus(str, enum.Enum):
    CONVERGED = "SCA-converged"
    MAXITER = "SCA-maxiter"


@dataclass(frozen=True)
class ScaConfig:
    max_iters: int = 100
    conv_tol: float = 1e-5
    init_strategy: InitStrategy = InitStrategy.SVD_MRT
    damping: float = 1.0
    common_fraction: float = 0.5
    starts: int = 1
    seed: int = 0
    feas_tol: float = 1e-6
    solver_tol: float = 1e-8
    backend: str | None = None

    def __post_init__(self):
        if self.conv_tol <= 0:
            raise ValueError("conv_tol must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not 0 <= self.common_fraction < 1:
            raise ValueError("common_fraction must lie in [0, 1)")
        if self.starts < 1 or self.max_iters < 1:
            raise ValueError("starts and max_iters must be at least 1")
        object.__setattr__(self, "init_strategy", InitStrategy(self.init_strategy))

    def solver_settings(self) -> SolverSettings:
        if self.backend:
            return SolverSettings(backend=self.backend.upper(), tol=self.solver_tol)
        return SolverSettings(tol=self.solver_tol)


@dataclass(frozen=True, eq=False)
class ScaRun:
    report: SolutionReport
    status: ScaStatus
    history: tuple[float, ...] = field(default_factory=tuple)

    @property
    def iterations(self) -> int:
        return len(self.history)


def _unit(v: np.ndarray, fallback: int = 0) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0:
        e = np.zeros_like(v)
        e[fallback] = 1.0
        return e
    return v / norm


def init_precoders(problem: ProblemSpec, strategy=InitStrategy.SVD_MRT, common_fraction: float = 0.5, rng=None) -> PrecoderSet:
    """Common stream along the dominant left singular vector of [h_1 .. h_K], private streams by MRT.

    The budget is used in full: common_fraction of P goes to p_c (none without a common stream),
    the rest is shared equally by the private streams.
    """
    strategy = InitStrategy(strategy)
    K, M = problem.K, problem.M
    private = problem.private_users
    common_power = common_fraction * problem.P if problem.common_enabled else 0.0
    private_power = problem.P - common_power

    if strategy is InitStrategy.RANDOM:
        rng = rng if rng is not None else np.random.default_rng(0)

        def direction(_):
            return _unit(rng.standard_normal(M) + 1j * rng.standard_normal(M))

        common_dir = direction(None)
        private_dirs = {k: direction(k) for k in private}
    else:
        U, _, _ = np.linalg.svd(problem.h.T)
        common_dir = _unit(U[:, 0])
        private_dirs = {k: _unit(problem.h[k]) for k in private}

    p_c = math.sqrt(common_power) * common_dir if problem.common_enabled else np.zeros(M, dtype=complex)
    p = np.zeros((K, M), dtype=complex)
    for k in private:
        p[k] = math.sqrt(private_power / len(private)) * private_dirs[k]
    return PrecoderSet(p_c, p)


def _build_subproblem(problem: ProblemSpec, current: PrecoderSet, lam: float) -> ProgramBuilder:
    h, K = problem.h, problem.K
    private = problem.private_users
    common = problem.common_enabled
    gamma_c0, gamma_p0 = compute_sinrs(problem.channels, current)
    s0 = float(gamma_c0.min()) if common else 0.0

    builder = ProgramBuilder("sca")
    if common:
        builder.add_variable("p_c", problem.M, complex_=True)
    for k in private:
        builder.add_variable(f"p{k}", problem.M, complex_=True)
    builder.add_variable("g", K)
    builder.add_variable("w", K)
    builder.add_variable("z", K)
    if common:
        builder.add_variable("C", K)
        builder.add_variable("s", 1)
        builder.add_variable("ws", 1)
        builder.add_variable("zc", K)
    if problem.is_ee:
        builder.add_variable("q", 1)

    one = builder.const(1.0)
    g, w, z = builder.var("g"), builder.var("w"), builder.var("z")
    builder.nonneg(g, "sinr-nonneg")
    names = (["p_c"] if common else []) + [f"p{k}" for k in private]
    precoders = Affine.stack(*(builder.var(name) for name in names))

    def gains(k, skip):
        return [builder.hprod(h[k], f"p{j}") for j in private if j != skip]

    def interference_now(k, skip):
        return sum(abs(np.vdot(h[k], current.p[j])) ** 2 for j in private if j != skip)

    rate = {}
    for k in range(K):
        if k not in private:
            builder.equal(g[k], f"sinr-pinned[{k}]")
            builder.equal(z[k], f"interference-pinned[{k}]")
            builder.equal(w[k] - 1.0, f"rate-pinned[{k}]")
            rate[k] = 0.0
            continue
        a0 = np.vdot(h[k], current.p[k])
        y0 = interference_now(k, k) + 1.0
        others = gains(k, k)
        if others:
            builder.rsoc(z[k], one, Affine.stack(*others), f"interference[{k}]")
        else:
            builder.equal(z[k], f"interference[{k}]")
        linear = builder.hprod(a0 * h[k], f"p{k}")[0] * (2.0 / y0) - (z[k] + 1.0) * (abs(a0) ** 2 / y0**2)
        builder.nonneg(linear - g[k], f"private-sinr[{k}]")
        builder.rsoc(w[k], g[k] + 1.0, one, f"rate-minorant[{k}]")
        g0 = float(gamma_p0[k])
        rate[k] = (w[k] * (-(1.0 + g0)) + (math.log1p(g0) + 1.0)) * (1.0 / LN2)

    shares = {k: 0.0 for k in range(K)}
    if common:
        s, ws, zc, C = builder.var("s"), builder.var("ws"), builder.var("zc"), builder.var("C")
        builder.nonneg(s, "common-sinr-nonneg")
        if problem.min_common_rate > 0:
            builder.nonneg(s - problem.common_sinr_floor, "common-sinr-floor")
        for k in range(K):
            c0 = np.vdot(h[k], current.p_c)
            yc0 = interference_now(k, None) + 1.0
            builder.rsoc(zc[k], one, Affine.stack(*gains(k, None)), f"common-interference[{k}]")
            linear = builder.hprod(c0 * h[k], "p_c")[0] * (2.0 / yc0) - (zc[k] + 1.0) * (abs(c0) ** 2 / yc0**2)
            builder.nonneg(linear - s, f"common-sinr[{k}]")
        builder.rsoc(ws, s + 1.0, one, "common-rate-minorant")
        common_rate = (ws * (-(1.0 + s0)) + (math.log1p(s0) + 1.0)) * (1.0 / LN2)
        builder.nonneg(common_rate - C.sum(), "common-rate")
        builder.nonneg(C, "common-share-nonneg")
        for k in problem.pinned_common:
            builder.equal(C[k], f"common-share-pinned[{k}]")
        shares = {k: C[k] for k in range(K)}

    numerator = builder.const(0.0)
    for k in range(K):
        builder.nonneg(shares[k] + rate[k] - problem.R_th[k], f"qos[{k}]")
        numerator = numerator + (shares[k] + rate[k]) * problem.u[k]

    builder.soc(builder.const(math.sqrt(problem.P)), precoders, "power")
    if problem.is_ee:
        q = builder.var("q")
        builder.rsoc(q, one, precoders, "power-epigraph")
        builder.maximize(numerator - (q * problem.mu + problem.P_circ) * lam)
    else:
        builder.maximize(numerator)
    return builder


def _precoders_from(solution, problem: ProblemSpec) -> PrecoderSet:
    p_c = solution.complex_value("p_c") if problem.common_enabled else np.zeros(problem.M, dtype=complex)
    p = np.zeros((problem.K, problem.M), dtype=complex)
    for k in problem.private_users:
        p[k] = solution.complex_value(f"p{k}")
    return PrecoderSet(p_c, p)


def sca_iterate(problem: ProblemSpec, config: ScaConfig | None = None, initial: PrecoderSet | None = None) -> ScaRun:
    """One SCA run on a fixed-scheme problem, from `initial` (SVD/MRT by default)."""
    config = config or ScaConfig()
    settings = config.solver_settings()
    current = initial if initial is not None else init_precoders(problem, config.init_strategy, config.common_fraction)
    best = split_common_rate(problem, current, 0.0, settings, config.feas_tol)
    if best is None:
        best = make_report(problem, current, None, config.feas_tol)
    value = best.objective if best.feasible else -math.inf
    lam = max(best.objective, 0.0)
    history = [value] if best.feasible else []

    for iteration in range(config.max_iters):
        solution = solve(_build_subproblem(problem, current, lam).build(), settings)
        if not solution.optimal:
            logger.debug("SCA subproblem %d: %s", iteration, solution.status.value)
            if iteration == 0:
                logger.info("first SCA subproblem infeasible; returning the initialization")
            break
        candidate = _precoders_from(solution, problem)
        report = split_common_rate(problem, candidate, 0.0, settings, config.feas_tol)
        if report is None:
            break
        if config.damping < 1 and best.feasible:
            blend = PrecoderSet(
                config.damping * candidate.p_c + (1 - config.damping) * current.p_c,
                config.damping * candidate.p + (1 - config.damping) * current.p,
            )
            blended = split_common_rate(problem, blend, 0.0, settings, config.feas_tol)
            if blended is not None and blended.objective >= value:
                candidate, report = blend, blended
        slack = 1e-7 * max(1.0, abs(value)) if math.isfinite(value) else 0.0
        if report.objective < value - slack:
            logger.debug("SCA step %d lowered the objective (%.3g); stopping", iteration, report.objective - value)
            break
        previous = value
        current, best, value = candidate, report, report.objective
        lam = value
        history.append(value)
        if math.isfinite(previous) and abs(value - previous) <= config.conv_tol * max(1.0, abs(previous)):
            return ScaRun(best, ScaStatus.CONVERGED, tuple(history))
    return ScaRun(best, ScaStatus.MAXITER, tuple(history))


def sca_run(problem: ProblemSpec, config: ScaConfig | None = None) -> ScaRun:
    """Best run over the scheme variants and the configured number of starts."""
    config = config or ScaConfig()
    rng = np.random.default_rng(config.seed)
    best: ScaRun | None = None
    for variant in scheme_variants(problem):
        for start in range(config.starts):
            strategy = config.init_strategy if start == 0 else InitStrategy.RANDOM
            initial = init_precoders(variant, strategy, config.common_fraction, rng)
            run = sca_iterate(variant, config, initial)
            if best is None or _better(run.report, best.report):
                best = run
    return best


def _better(a: SolutionReport, b: SolutionReport) -> bool:
    if a.feasible != b.feasible:
        return a.feasible
    return a.objective > b.objective


def sca_solve(problem: ProblemSpec, config: ScaConfig | None = None) -> SolutionReport:
    return sca_run(problem, config).report
