# conic/builders.py - The convex subproblems of the branch-and-bound, built as ConicPrograms.
#
# Variable names used throughout:
#   p_c        common precoder (complex, length M)          - absent without a common stream
#   p{k}       private precoder of user k (complex)         - only for users owning a private stream
#   C          common-rate shares (bits/cu)
#   gp, sp     log2(1 + gamma_p) and log2(1 + s) (bounding problem only)
#   e, d       e_k = h_k^H p_c (complex) and its magnitude surrogate, users 2..K
#   r          ray magnitude of e_k at a fixed argument (g-tilde only)
#   t          the value being minimized
#
# Rates are in bits everywhere; the bounding problem is linear in gp and sp.

import math
from typing import TYPE_CHECKING

import numpy as np

from conic.envelope import EnvelopeCut, envelope_cuts
from conic.program import Affine, ConicProgram, ProgramBuilder
from errors import MalformedBox
from models.precoder import PrecoderSet
from models.problem import ProblemSpec

if TYPE_CHECKING:
    from sitbb.box import Box, DualPoint


# -----------------------------
# Shared pieces
# -----------------------------


def _declare_precoders(builder: ProgramBuilder, problem: ProblemSpec) -> None:
    if problem.common_enabled:
        builder.add_variable("p_c", problem.M, complex_=True)
    for k in problem.private_users:
        builder.add_variable(f"p{k}", problem.M, complex_=True)


def _declare_common_link(builder: ProgramBuilder, problem: ProblemSpec) -> None:
    if problem.common_enabled and problem.K > 1:
        builder.add_variable("e", problem.K - 1, complex_=True)
        builder.add_variable("d", problem.K - 1)


def _all_precoders(builder: ProgramBuilder, problem: ProblemSpec) -> Affine:
    names = (["p_c"] if problem.common_enabled else []) + [f"p{k}" for k in problem.private_users]
    return Affine.stack(*(builder.var(name) for name in names))


def _private_gains(builder: ProgramBuilder, problem: ProblemSpec, k: int, skip: int | None) -> list[Affine]:
    """[Re, Im] of h_k^H p_j for every private stream j except `skip`."""
    return [builder.hprod(problem.h[k], f"p{j}") for j in problem.private_users if j != skip]


def _e(builder: ProgramBuilder, k: int) -> Affine:
    return builder.var("e")[[2 * (k - 1), 2 * (k - 1) + 1]]


def _d(builder: ProgramBuilder, k: int) -> Affine:
    return builder.var("d")[k - 1]


def _add_rotation(builder: ProgramBuilder, problem: ProblemSpec) -> None:
    h = problem.h
    if problem.common_enabled:
        z = builder.hprod(h[0], "p_c")
        builder.equal(z[1], "rotation-common-im")
        builder.nonneg(z[0], "rotation-common-re")
    for k in problem.private_users:
        z = builder.hprod(h[k], f"p{k}")
        builder.equal(z[1], f"rotation-private-im[{k}]")
        builder.nonneg(z[0], f"rotation-private-re[{k}]")


def _add_common_link(builder: ProgramBuilder, problem: ProblemSpec) -> None:
    if not (problem.common_enabled and problem.K > 1):
        return
    for k in range(1, problem.K):
        builder.equal(_e(builder, k) - builder.hprod(problem.h[k], "p_c"), f"link-e[{k}]")
        builder.nonneg(_d(builder, k), f"link-d[{k}]")


def _add_power(builder: ProgramBuilder, problem: ProblemSpec) -> None:
    builder.soc(builder.const(math.sqrt(problem.P)), _all_precoders(builder, problem), "power")


def _add_sinr_cones(builder: ProgramBuilder, problem: ProblemSpec, gamma, s: float) -> None:
    """sqrt(gamma_k) ||(interference, 1)|| <= h_k^H p_k + t and the common-stream analogues."""
    t = builder.var("t")
    one = builder.const(1.0)
    for k in problem.private_users:
        tail = Affine.stack(*_private_gains(builder, problem, k, skip=k), one) * math.sqrt(gamma[k])
        head = builder.hprod(problem.h[k], f"p{k}")[0] + t
        builder.soc(head, tail, f"private-sinr[{k}]")
    if not problem.common_enabled:
        return
    root_s = math.sqrt(s)
    for k in range(problem.K):
        tail = Affine.stack(*_private_gains(builder, problem, k, skip=None), one) * root_s
        if k == 0:
            head = builder.hprod(problem.h[0], "p_c")[0] + t
        else:
            head = _d(builder, k) + t
        builder.soc(head, tail, f"common-sinr[{k}]")


def _common_share(builder: ProgramBuilder, k: int) -> Affine | float:
    return builder.var("C")[k] if builder.has("C") else 0.0


def _add_common_shares(builder: ProgramBuilder, problem: ProblemSpec) -> None:
    """C >= 0 and the scheme's pinned shares."""
    if not builder.has("C"):
        return
    C = builder.var("C")
    builder.nonneg(C, "common-share-nonneg")
    for k in problem.pinned_common:
        builder.equal(C[k], f"common-share-pinned[{k}]")


def _add_energy_budget(builder: ProgramBuilder, problem: ProblemSpec, numerator: Affine, delta: float) -> None:
    """sum u_k (C_k + rate_k) >= delta (mu ||p||^2 + P_circ); implied (and omitted) when delta <= 0."""
    if delta <= 0:
        return
    slack = numerator - delta * problem.P_circ
    if problem.mu == 0:
        builder.nonneg(slack, "ee-budget")
        return
    builder.rsoc(slack, builder.const(1.0 / (delta * problem.mu)), _all_precoders(builder, problem), "ee-budget")


def _check_box(box: "Box", problem: ProblemSpec) -> None:
    if box.K != problem.K:
        raise MalformedBox(f"box has {box.K} users, problem has {problem.K}")
    if np.any(box.lo > box.hi) or np.any(box.gamma_lo < 0) or box.s_lo < 0:
        raise MalformedBox("box bounds must satisfy 0 <= lo <= hi")
    if box.alpha_lo.size and (np.any(box.alpha_lo < 0) or np.any(box.alpha_hi > 2 * math.pi + 1e-12)):
        raise MalformedBox("argument bounds must lie in [0, 2pi]")


# -----------------------------
# Bounding problem
# -----------------------------


def build_bounding_socp(box: "Box", delta: float, problem: ProblemSpec) -> ConicProgram:
    """Lower bound on the dual objective over `box`: SINR cones at the lower corner, argument cuts."""
    _check_box(box, problem)
    K = problem.K
    builder = ProgramBuilder("bounding")
    _declare_precoders(builder, problem)
    _declare_common_link(builder, problem)
    builder.add_variable("gp", K)
    if problem.common_enabled:
        builder.add_variable("sp", 1)
        builder.add_variable("C", K)
    builder.add_variable("t", 1)

    _add_sinr_cones(builder, problem, box.gamma_lo, box.s_lo if problem.common_enabled else 0.0)
    _add_rotation(builder, problem)
    _add_common_link(builder, problem)

    if problem.common_enabled and K > 1:
        t = builder.var("t")
        for k in range(1, K):
            cut = envelope_cuts(box.alpha_lo[k - 1], box.alpha_hi[k - 1], k)
            if not isinstance(cut, EnvelopeCut):
                continue
            e, d = _e(builder, k), _d(builder, k)
            rows = [c_re * e[0] + c_im * e[1] + c_d * d + c_t * t for c_re, c_im, c_d, c_t in cut.rows]
            builder.nonneg(Affine.stack(*rows), f"envelope[{k}]")

    gp = builder.var("gp")
    builder.nonneg(gp - np.log2(1.0 + box.gamma_lo), "gp-lower")
    builder.nonneg(np.log2(1.0 + box.gamma_hi) - gp, "gp-upper")
    if problem.common_enabled:
        sp = builder.var("sp")
        builder.nonneg(sp - math.log2(1.0 + box.s_lo), "sp-lower")
        builder.nonneg(math.log2(1.0 + box.s_hi) - sp, "sp-upper")
        C = builder.var("C")
        builder.nonneg(sp - C.sum(), "common-rate")
    _add_common_shares(builder, problem)

    for k in range(K):
        builder.nonneg(_common_share(builder, k) + gp[k] - problem.R_th[k], f"qos[{k}]")

    numerator = gp.dot(problem.u)
    if builder.has("C"):
        numerator = numerator + builder.var("C").dot(problem.u)
    _add_energy_budget(builder, problem, numerator, delta)
    _add_power(builder, problem)

    builder.minimize(builder.var("t"))
    return builder.build()


# -----------------------------
# Dual objective at a fixed point
# -----------------------------


def build_gtilde_program(x_point: "DualPoint", delta: float, problem: ProblemSpec) -> ConicProgram:
    """min t with SINR targets, common SINR and arguments fixed to x_point."""
    K = problem.K
    gamma = np.asarray(x_point.gamma_p, dtype=float)
    rates = np.log2(1.0 + gamma)
    builder = ProgramBuilder("gtilde")
    _declare_precoders(builder, problem)
    _declare_common_link(builder, problem)
    if problem.common_enabled:
        builder.add_variable("C", K)
        if K > 1:
            builder.add_variable("r", K - 1)
    builder.add_variable("t", 1)

    _add_sinr_cones(builder, problem, gamma, float(x_point.s) if problem.common_enabled else 0.0)
    _add_rotation(builder, problem)
    _add_common_link(builder, problem)

    if problem.common_enabled and K > 1:
        t, r = builder.var("t"), builder.var("r")
        for k in range(1, K):
            alpha = float(x_point.alpha[k - 1])
            ray = Affine.stack(r[k - 1] * math.cos(alpha), r[k - 1] * math.sin(alpha))
            builder.equal(_e(builder, k) - ray, f"ray[{k}]")
            builder.nonneg(r[k - 1], f"ray-nonneg[{k}]")
            builder.nonneg(r[k - 1] - _d(builder, k) + t, f"ray-magnitude[{k}]")

    _add_common_shares(builder, problem)
    for k in range(K):
        share = _common_share(builder, k)
        qos = share + (rates[k] - problem.R_th[k]) if isinstance(share, Affine) else builder.const(rates[k] - problem.R_th[k])
        builder.nonneg(qos, f"qos[{k}]")

    numerator = builder.const(float(np.dot(problem.u, rates)))
    if builder.has("C"):
        C = builder.var("C")
        builder.nonneg(math.log2(1.0 + float(x_point.s)) - C.sum(), "common-rate")
        numerator = numerator + C.dot(problem.u)
    _add_energy_budget(builder, problem, numerator, delta)
    _add_power(builder, problem)

    builder.minimize(builder.var("t"))
    return builder.build()


# -----------------------------
# Common-rate split for fixed precoders
# -----------------------------


def build_common_rate_lp(gamma_p_star, s_star: float, precoders: PrecoderSet, delta: float, problem: ProblemSpec, slack: float = 0.0) -> ConicProgram:
    """max sum u_k C_k over the shares only; infeasible when the precoders cannot meet QoS or delta."""
    K = problem.K
    rates = np.log2(1.0 + np.asarray(gamma_p_star, dtype=float))
    builder = ProgramBuilder("common-rate")
    builder.add_variable("C", K)
    C = builder.var("C")
    _add_common_shares(builder, problem)
    builder.nonneg(C + (rates - problem.R_th), "qos")
    builder.nonneg(math.log2(1.0 + max(float(s_star), 0.0)) - C.sum(), "common-rate")
    if delta > 0:
        demand = delta * (problem.mu * precoders.total_power() + problem.P_circ)
        builder.nonneg(C.dot(problem.u) + (float(np.dot(problem.u, rates)) - demand + slack), "ee-budget")
    builder.maximize(C.dot(problem.u))
    return builder.build()


# -----------------------------
# Minimum power for private SINR targets
# -----------------------------


def build_power_feasibility(problem: ProblemSpec, gamma) -> ConicProgram:
    """min ||p|| s.t. private SINR_k >= gamma_k (no common stream). Feasible iff the value is <= sqrt(P)."""
    gamma = np.asarray(gamma, dtype=float)
    builder = ProgramBuilder("power-feasibility")
    for k in problem.private_users:
        builder.add_variable(f"p{k}", problem.M, complex_=True)
    builder.add_variable("tau", 1)
    one = builder.const(1.0)
    for k in problem.private_users:
        tail = Affine.stack(*_private_gains(builder, problem, k, skip=k), one) * math.sqrt(gamma[k])
        builder.soc(builder.hprod(problem.h[k], f"p{k}")[0], tail, f"private-sinr[{k}]")
        z = builder.hprod(problem.h[k], f"p{k}")
        builder.equal(z[1], f"rotation-private-im[{k}]")
    precoders = Affine.stack(*(builder.var(f"p{k}") for k in problem.private_users))
    builder.soc(builder.var("tau"), precoders, "power")
    builder.minimize(builder.var("tau"))
    return builder.build()
