"""Slow, independent ground truth for desk-scale validation.

grid_certify enumerates SINR target points on a uniform grid (uniform in
the log domain, matching how rates weight the space), asks a conic
feasibility/power solve whether each point is achievable, and keeps the best
achieved objective. Its value is always a lower bound on the global optimum
and converges to it as the grid is refined. It shares no code with the
branch-and-bound machinery beyond the target-point solvers it is checking.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np
from scipy.optimize import minimize_scalar

from .model import ProblemInstance, initial_box
from .subproblems import DualPoint, PowerMinProblem, best_common_split

MAX_GRID_POINTS = 2_000_000


def _mode_tops(inst: ProblemInstance, mode: str):
    box = initial_box(inst)
    if mode == "unicast":
        box.s_hi = 0.0
    elif mode == "multicast":
        box.gamma_hi[:] = 0.0
    return box


def grid_certify(
    inst: ProblemInstance,
    resolution: int,
    mode: str = "rsma",
    alpha_resolution: int = None,
    exhaustive: bool = False,
):
    """Best objective over a grid of achievable SINR targets.

    resolution points are placed per gamma and s dimension, uniformly in
    log2(1 + x); angles get alpha_resolution points (default: resolution)
    uniformly in [0, 2*pi). Returns (value, Candidate), or (None, None) when
    no grid point is achievable.

    When the objective is a pure weighted sum rate without QoS floors
    (mu = 0, Rth = 0), achievability is monotone along each gamma axis and
    the best point of each grid column is found by bisection; pass
    exhaustive=True to force full enumeration anyway. Refuses grids larger
    than MAX_GRID_POINTS.
    """
    if inst.K > 3:
        raise ValueError("grid certification is limited to K <= 3")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    box = _mode_tops(inst, mode)
    g_grids = [
        np.exp2(np.linspace(0.0, math.log2(1.0 + hi), resolution)) - 1.0
        if hi > 0 else np.array([0.0])
        for hi in box.gamma_hi
    ]
    s_grid = (
        np.exp2(np.linspace(0.0, math.log2(1.0 + box.s_hi), resolution)) - 1.0
        if box.s_hi > 0 else np.array([0.0])
    )
    ares = alpha_resolution or resolution
    if inst.K > 1 and box.s_hi > 0:
        a_grid = np.linspace(0.0, 2.0 * np.pi, ares, endpoint=False)
    else:
        a_grid = np.array([0.0])
    a_grids = [a_grid] * (inst.K - 1)

    n_points = math.prod(len(g) for g in g_grids) * len(s_grid) * math.prod(
        len(a) for a in a_grids
    )
    if n_points > MAX_GRID_POINTS:
        raise ValueError(
            f"grid would have {n_points} points (limit {MAX_GRID_POINTS}); "
            "lower the resolution"
        )

    pm = PowerMinProblem(inst)
    monotone = (
        not exhaustive
        and inst.mu == 0.0
        and np.all(inst.Rth == 0.0)
    )
    best_val, best_cand = None, None

    def evaluate(gammas, s, alphas):
        raw = pm.solve(DualPoint(
            gamma_p=np.array(gammas), s=s, alpha=np.array(alphas)
        ))
        if raw is None:
            return None
        p_c = raw.p_c if mode != "unicast" else np.zeros(inst.M, dtype=complex)
        p = raw.p if mode != "multicast" else np.zeros_like(raw.p)
        cand, rr = best_common_split(inst, p_c, p)
        return rr.objective, cand

    last = g_grids[-1]
    outer = list(product(s_grid, *a_grids, *g_grids[:-1]))
    for combo in outer:
        s, alphas, g_head = combo[0], combo[1 : inst.K], combo[inst.K :]
        if monotone:
            # achievability is downward closed along the last gamma axis:
            # bisect for the largest achievable index, which dominates the
            # column for a pure weighted sum rate
            lo, hi, top = 0, len(last) - 1, None
            if evaluate((*g_head, last[0]), s, alphas) is None:
                continue
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if pm.solve(DualPoint(
                    gamma_p=np.array((*g_head, last[mid])),
                    s=s, alpha=np.array(alphas),
                )) is not None:
                    lo = mid
                else:
                    hi = mid - 1
            top = evaluate((*g_head, last[lo]), s, alphas)
            candidates = [top] if top is not None else []
        else:
            candidates = [
                evaluate((*g_head, g), s, alphas) for g in last
            ]
        for item in candidates:
            if item is None:
                continue
            val, cand = item
            if best_val is None or val > best_val:
                best_val, best_cand = val, cand
    return best_val, best_cand


def closed_form_special_cases(inst: ProblemInstance):
    """Exact optimum for the structured cases where one is known, else None.

    Single user: matched filtering is optimal, leaving a one-dimensional
    power search u1 * log2(1 + p ||h||^2) / (mu * p + Pc) over p in [0, P]
    (exact at p = P when mu = 0). Two users with orthogonal channels of
    equal norm, unit weights, mu = 0 and no QoS floors: an equal power split
    of private-only transmission, 2 * log2(1 + P ||h||^2 / 2) / Pc.
    """
    if inst.K == 1:
        gain = float(inst.channel_gains[0])
        u1 = float(inst.u[0])
        if inst.mu == 0.0:
            return u1 * math.log2(1.0 + inst.P * gain) / inst.Pc

        def val(pw):
            return u1 * math.log2(1.0 + pw * gain) / (inst.mu * pw + inst.Pc)

        res = minimize_scalar(
            lambda pw: -val(pw), bounds=(0.0, inst.P), method="bounded",
            options={"xatol": 1e-12},
        )
        # the bounded search can stop just short of a boundary optimum
        return max(val(float(res.x)), val(0.0), val(inst.P))
    if (
        inst.K == 2
        and inst.mu == 0.0
        and np.all(inst.Rth == 0.0)
        and np.allclose(inst.u, inst.u[0])
        and abs(np.vdot(inst.H[0], inst.H[1])) < 1e-9
        and abs(inst.channel_gains[0] - inst.channel_gains[1]) < 1e-9
    ):
        gain = float(inst.channel_gains[0])
        return float(
            inst.u[0] * 2.0 * math.log2(1.0 + inst.P * gain / 2.0) / inst.Pc
        )
    return None
