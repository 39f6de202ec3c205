"""Independent reference models used as test oracles.

Everything here is deliberately built from scratch on cvxpy with complex
variables, sharing no code with the package's conic layer, so agreement
between the two is meaningful.
"""

from __future__ import annotations

import cvxpy as cp
import numpy as np

LN2 = float(np.log(2.0))


def _hH(h, vec):
    return cp.conj(h) @ vec


def reference_bounding_value(inst, box, delta, power_cuts=False):
    """Optimal value of the box lower-bound SOCP, modeled independently."""
    K, M = inst.K, inst.M
    H = inst.H
    pc = cp.Variable(M, complex=True)
    ps = [cp.Variable(M, complex=True) for _ in range(K)]
    c = cp.Variable(K)
    g = cp.Variable(K)
    sp = cp.Variable()
    t = cp.Variable()
    d = cp.Variable(max(K - 1, 1))
    e = [cp.Variable(complex=True) for _ in range(K - 1)]

    glo = np.log2(1.0 + box.gamma_lo)
    ghi = np.log2(1.0 + box.gamma_hi)
    slo = np.log2(1.0 + box.s_lo)
    shi = np.log2(1.0 + box.s_hi)
    sq_g = np.sqrt(box.gamma_lo)
    sq_s = np.sqrt(box.s_lo)

    cons = [c >= 0, c >= inst.Rth - g, cp.sum(c) <= sp,
            g >= glo, g <= ghi, sp >= slo, sp <= shi]
    power = cp.sum_squares(pc) + sum(cp.sum_squares(p) for p in ps)
    cons.append(power <= inst.P)
    if power_cuts:
        # the implementation couples the threshold row to the same power
        # epigraph the tangent rows push on; mirror that exactly
        w = cp.Variable()
        cons += [power <= w, w <= inst.P]
        cons.append(inst.u @ (c + g) >= delta * (inst.mu * w + inst.Pc))
        inv = 1.0 / inst.channel_gains
        for G, S in ((glo, slo), (ghi, shi)):
            wg, ws = np.exp2(G), np.exp2(float(S))
            need = (
                cp.sum(cp.multiply(inv, cp.multiply(wg, 1 + LN2 * (g - G)) - 1))
                + inv.max() * (ws * (1 + LN2 * (sp - S)) - 1)
            )
            cons.append(need <= w)
    else:
        cons.append(
            inst.u @ (c + g) >= delta * (inst.mu * power + inst.Pc)
        )
    for k in range(K):
        cons += [cp.imag(_hH(H[k], ps[k])) == 0, cp.real(_hH(H[k], ps[k])) >= 0]
    cons += [cp.imag(_hH(H[0], pc)) == 0, cp.real(_hH(H[0], pc)) >= 0]

    def interference(k, skip=None):
        terms = [_hH(H[k], ps[j]) for j in range(K) if j != skip]
        return cp.hstack(terms + [1.0])

    for k in range(K):
        cons.append(
            sq_g[k] * cp.norm(interference(k, skip=k))
            <= t + cp.real(_hH(H[k], ps[k]))
        )
    cons.append(sq_s * cp.norm(interference(0)) <= t + cp.real(_hH(H[0], pc)))
    for k in range(1, K):
        cons.append(sq_s * cp.norm(interference(k)) <= t + d[k - 1])
        cons += [d[k - 1] >= 0, e[k - 1] == _hH(H[k], pc)]
        lo, hi = box.alpha_lo[k - 1], box.alpha_hi[k - 1]
        if hi - lo <= np.pi:
            a = 0.5 * (np.cos(lo) + np.cos(hi))
            b = 0.5 * (np.sin(lo) + np.sin(hi))
            re, im = cp.real(e[k - 1]), cp.imag(e[k - 1])
            cons += [
                np.sin(lo) * re - np.cos(lo) * im <= 0,
                np.sin(hi) * re - np.cos(hi) * im >= 0,
                a * re + b * im >= (d[k - 1] - t) * (a * a + b * b),
            ]
    if K == 1:
        cons.append(d == 0)

    prob = cp.Problem(cp.Minimize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return float(prob.value)
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return float("inf")
    raise RuntimeError(f"reference solve ended with {prob.status}")


def reference_check_value(inst, point, delta):
    """Optimal violation at a frozen target point, modeled independently."""
    K, M = inst.K, inst.M
    H = inst.H
    pc = cp.Variable(M, complex=True)
    ps = [cp.Variable(M, complex=True) for _ in range(K)]
    c = cp.Variable(K)
    t = cp.Variable()
    d = cp.Variable(max(K - 1, 1))
    r = cp.Variable(max(K - 1, 1))

    gamma = np.maximum(np.asarray(point.gamma_p, float), 0.0)
    s_val = max(float(point.s), 0.0)
    glog = np.log2(1.0 + gamma)
    sq_g = np.sqrt(gamma)
    sq_s = np.sqrt(s_val)

    cons = [c >= np.maximum(0.0, inst.Rth - glog),
            cp.sum(c) <= np.log2(1.0 + s_val)]
    power = cp.sum_squares(pc) + sum(cp.sum_squares(p) for p in ps)
    cons.append(power <= inst.P)
    cons.append(
        inst.u @ c + float(inst.u @ glog) >= delta * (inst.mu * power + inst.Pc)
    )
    for k in range(K):
        cons += [cp.imag(_hH(H[k], ps[k])) == 0, cp.real(_hH(H[k], ps[k])) >= 0]
    cons += [cp.imag(_hH(H[0], pc)) == 0, cp.real(_hH(H[0], pc)) >= 0]

    def interference(k, skip=None):
        terms = [_hH(H[k], ps[j]) for j in range(K) if j != skip]
        return cp.hstack(terms + [1.0])

    for k in range(K):
        cons.append(
            sq_g[k] * cp.norm(interference(k, skip=k))
            <= t + cp.real(_hH(H[k], ps[k]))
        )
    cons.append(sq_s * cp.norm(interference(0)) <= t + cp.real(_hH(H[0], pc)))
    for k in range(1, K):
        ak = float(point.alpha[k - 1])
        cons += [
            sq_s * cp.norm(interference(k)) <= t + d[k - 1],
            d[k - 1] >= 0,
            r[k - 1] >= 0,
            d[k - 1] - t <= r[k - 1],
            _hH(H[k], pc) == r[k - 1] * complex(np.cos(ak), np.sin(ak)),
        ]
    if K == 1:
        cons += [d == 0, r == 0]

    prob = cp.Problem(cp.Minimize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return float(prob.value)
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return float("inf")
    raise RuntimeError(f"reference solve ended with {prob.status}")


def random_instance(rng, K=2, M=2, P=10.0, mu=0.0, Pc=1.0, rth_max=0.0):
    from rsbeam import ProblemInstance

    H = (rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))) / np.sqrt(2)
    u = rng.uniform(0.2, 2.0, size=K)
    Rth = rng.uniform(0.0, rth_max, size=K) if rth_max > 0 else np.zeros(K)
    return ProblemInstance(H=H, P=P, u=u, mu=mu, Pc=Pc, Rth=Rth)


def random_box(rng, inst, mode="rsma"):
    from rsbeam import initial_box

    root = initial_box(inst)
    if mode == "unicast":
        root.s_hi = 0.0
    lo_f = rng.uniform(0.0, 0.5, size=root.ndim)
    hi_f = rng.uniform(0.55, 1.0, size=root.ndim)
    lo = root.lower() + lo_f * root.widths()
    hi = root.lower() + hi_f * root.widths()
    box = root.copy()
    K = inst.K
    box.gamma_lo, box.gamma_hi = lo[:K], hi[:K]
    box.s_lo, box.s_hi = float(lo[K]), float(hi[K])
    box.alpha_lo, box.alpha_hi = lo[K + 1 :], hi[K + 1 :]
    return box
