"""Convex subproblems of the global search.

Three SOCPs are built over the generic conic container:

* a box lower-bound problem that relaxes the coupled SINR constraints by
  freezing targets at the box lower corner, replacing the angular sector of
  the common stream by its convex envelope (argument cuts) and carrying the
  rate/power coupling in log-substituted affine rows;
* a feasibility-check problem at a fixed target point whose optimal value
  certifies (<= 0) that the point is achievable by actual precoders;
* a power-minimization variant of the check problem used by the grid oracle.

All three share one skeleton per problem instance: the sparsity pattern is
built once and only coefficients depending on the box / target / threshold
are rewritten between solves. Because the skeleton is mutated in place, a
builder instance must not be shared across concurrent solves; builders are
cheap, construct one per worker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import Box
from .conic import INFEASIBLE, SOLVED, ConicSolveError, Program
from .model import TWO_PI, Candidate, ProblemInstance, compute_sinrs

INF = float("inf")
LN2 = float(np.log(2.0))


@dataclass
class DualPoint:
    """A candidate target point: private SINRs, common SINR floor, angles."""

    gamma_p: np.ndarray
    s: float
    alpha: np.ndarray


@dataclass
class RawSolution:
    """Decision variables recovered from one subproblem solve."""

    p_c: np.ndarray       # (M,) complex
    p: np.ndarray         # (K, M) complex
    c: np.ndarray         # (K,) common-rate shares
    gamma_log: np.ndarray  # log2(1 + gamma_p) variables (or frozen values)
    s_log: float
    d: np.ndarray         # (K-1,) common-stream amplitude proxies, users 2..K
    e: np.ndarray         # (K-1,) complex, common stream seen at users 2..K
    t: float              # epigraph value


@dataclass
class BoundOutcome:
    """Result of bounding one box: the bound and, if finite, the solution."""

    beta: float
    raw: RawSolution = None


def argument_cuts(alpha_lo: float, alpha_hi: float):
    """Linear outer approximation of {d - t <= |e|, angle(e) in [lo, hi]}.

    Returns rows (cre, cim, cdt, rhs) meaning
        cre*Re(e) + cim*Im(e) + cdt*(d - t) <= rhs.
    For sectors wider than pi the set has no useful convex envelope and no
    rows are returned.
    """
    if not (-1e-12 <= alpha_lo <= alpha_hi <= TWO_PI + 1e-12):
        raise ValueError(f"angles [{alpha_lo}, {alpha_hi}] outside [0, 2*pi]")
    if alpha_hi - alpha_lo > np.pi:
        return []
    a = 0.5 * (np.cos(alpha_lo) + np.cos(alpha_hi))
    b = 0.5 * (np.sin(alpha_lo) + np.sin(alpha_hi))
    m2 = a * a + b * b
    return [
        (np.sin(alpha_lo), -np.cos(alpha_lo), 0.0, 0.0),
        (-np.sin(alpha_hi), np.cos(alpha_hi), 0.0, 0.0),
        (-a, -b, m2, 0.0),
    ]


def improve_common_allocation(
    inst: ProblemInstance, gamma_p: np.ndarray, s_value: float
) -> np.ndarray:
    """Best split of the common-rate budget log2(1 + s) across users.

    Each share first covers its QoS floor max(0, Rth_k - log2(1 + gamma_p,k));
    the remaining budget all goes to the user with the largest weight (ties
    to the lowest index), which attains the LP optimum of the weighted sum.
    """
    gamma_p = np.maximum(np.asarray(gamma_p, dtype=float), 0.0)
    budget = float(np.log2(1.0 + max(s_value, 0.0)))
    floors = np.maximum(0.0, inst.Rth - np.log2(1.0 + gamma_p))
    total = float(floors.sum())
    if total > budget + 1e-9:
        raise ValueError(
            f"common-rate floors ({total:.6g}) exceed the budget ({budget:.6g})"
        )
    c = floors.copy()
    c[int(np.argmax(inst.u))] += max(0.0, budget - total)
    return c


def best_common_split(inst: ProblemInstance, p_c: np.ndarray, p: np.ndarray):
    """Candidate from given precoders with the optimal common-rate split."""
    probe = Candidate(p_c=p_c, p=p, c=np.zeros(inst.K))
    rr = compute_sinrs(inst, probe)
    s_val = max(0.0, float(rr.gamma_c.min()))
    c = improve_common_allocation(inst, rr.gamma_p, s_val)
    cand = Candidate(p_c=p_c, p=p, c=c)
    return cand, compute_sinrs(inst, cand)


# ---------------------------------------------------------------------------
# shared geometry and skeleton plumbing

class _InstanceGeometry:
    """Per-instance constants shared by the subproblem builders."""

    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        K, M = inst.K, inst.M
        self.K, self.M = K, M
        self.npre = 2 * M * (K + 1)  # (Re, Im) blocks of p_c, p_1..p_K
        hr, hi = inst.H.real, inst.H.imag
        # coefficient rows over one precoder's [Re p; Im p] slots
        self.re_rows = [np.concatenate([hr[k], hi[k]]) for k in range(K)]
        self.im_rows = [np.concatenate([-hi[k], hr[k]]) for k in range(K)]
        self.inv_gain = 1.0 / inst.channel_gains
        self.max_inv_gain = float(self.inv_gain.max())

    def pslots(self, j: int) -> np.ndarray:
        """Variable indices of precoder j (0 = common, 1..K = privates)."""
        return np.arange(2 * self.M * j, 2 * self.M * (j + 1))

    def extract_precoders(self, x: np.ndarray, scale: float = 1.0):
        M = self.M
        vec = x[: self.npre] / scale
        blocks = vec.reshape(self.K + 1, 2 * M)
        cm = blocks[:, :M] + 1j * blocks[:, M:]
        return cm[0], cm[1:]


def _scaled_instance(inst: ProblemInstance):
    """Unit-gain rescaling used to retry numerically failed solves."""
    sigma = float(np.max(np.linalg.norm(inst.H, axis=1)))
    scaled = ProblemInstance(
        H=inst.H / sigma,
        P=inst.P * sigma**2,
        u=inst.u,
        mu=inst.mu / sigma**2,
        Pc=inst.Pc,
        Rth=inst.Rth,
    )
    return scaled, sigma


class _SkeletonSolver:
    """Shared plumbing: norm-cone emission and solve-with-retry.

    Each SINR norm is held in a fixed cone ||(h_user^H p_j)_j, 1|| <= z with
    its own auxiliary variable; the box-dependent target scale enters through
    one linear row  scale * z <= head expression. Keeping the cones constant
    leaves them strictly interior-feasible even for zero targets, which the
    interior-point solver needs, and shrinks the per-box update to a handful
    of scalars.

    A numerically failed solve is retried once on a rescaled twin of the
    instance (channels normalized to peak unit gain, power and amplifier
    inefficiency adjusted so the problem is unchanged); a second failure is
    surfaced as ConicSolveError so it can never masquerade as infeasibility.
    """

    def _emit_scale_row(self, p: Program, z: int, head_cols, head_vals) -> int:
        """Row  scale * z - head <= 0; returns the fill index of the scale."""
        mark = p.nnz_mark()
        p.add_ineq(
            np.concatenate([[z], head_cols]),
            np.concatenate([[1.0], -np.asarray(head_vals, dtype=float)]),
        )
        return mark

    def _emit_norm_cone(self, p: Program, z: int, h_user: int, skip):
        """Fixed cone  ||(h_user^H p_j)_{j in privates}, 1|| <= z."""
        geo = self.geo
        rows = [([z], [-1.0], 0.0)]
        for j in range(geo.K):
            if j == skip:
                continue
            rows.append((geo.pslots(j + 1), -geo.re_rows[h_user], 0.0))
            rows.append((geo.pslots(j + 1), -geo.im_rows[h_user], 0.0))
        rows.append(([], [], 1.0))  # unit noise term
        p.add_soc(rows)

    def _emit_power_epigraph(self, p: Program, i_w: int):
        """Cone encoding ||p||^2 <= w over all precoder slots."""
        rows = [([i_w], [-0.5], 0.5)]
        rows += [([v], [-1.0], 0.0) for v in range(self.geo.npre)]
        rows += [([i_w], [-0.5], -0.5)]
        p.add_soc(rows)

    def _twin_args(self):
        return ()

    def _twin(self):
        if getattr(self, "_scaled_twin", None) is None:
            scaled, sigma = _scaled_instance(self.geo.inst)
            self._scaled_twin = type(self)(scaled, *self._twin_args())
            self._scale_sigma = sigma
        return self._scaled_twin, self._scale_sigma

    def _robust_solve(self, *update_args):
        self._update(*update_args)
        status, x, obj = self.prog.solve()
        if status in (SOLVED, INFEASIBLE):
            return status, x, obj, 1.0
        twin, sigma = self._twin()
        twin._update(*update_args)
        status, x, obj = twin.prog.solve()
        if status in (SOLVED, INFEASIBLE):
            return status, x, obj, sigma
        raise ConicSolveError(
            f"{type(self).__name__} failed even after rescaling (status {status})"
        )


def _power_tangent(corner_log: np.ndarray, s_log: float, geo: _InstanceGeometry):
    """Tangent of the matched-filter power need at one log-domain corner.

    The cheapest power reaching private targets g and common floor s' is at
    least sum_k (2^g_k - 1)/||h_k||^2 + (2^s' - 1) * max_k ||h_k||^-2, convex
    in (g, s'); its tangent at any corner yields a valid linear underestimate
        sum_k cg_k * g_k + cs * s' - rhs_shift <= ||p||^2.
    Returns (cg, cs, rhs_shift).
    """
    w_g = np.exp2(corner_log)          # = 1 + gamma at the corner
    w_s = float(np.exp2(s_log))
    cg = w_g * LN2 * geo.inv_gain
    cs = w_s * LN2 * geo.max_inv_gain
    const = float(np.sum((w_g * (1.0 - LN2 * corner_log) - 1.0) * geo.inv_gain))
    const += (w_s * (1.0 - LN2 * s_log) - 1.0) * geo.max_inv_gain
    return cg, cs, -const


# ---------------------------------------------------------------------------
# box lower-bound problem

class BoundingProblem(_SkeletonSolver):
    """Lower bound on the least constraint violation over one box.

    Minimizes the epigraph t of the pointwise-max violation of the coupled
    SINR constraints, with SINR targets frozen at the box lower corner,
    angular sectors replaced by argument cuts, and the threshold constraint
    (weighted rates >= delta * consumed power) kept exact through the
    log-domain substitution. beta = +inf encodes an infeasible box.

    With power_cuts enabled (the default), matched-filter power tangents at
    both box corners additionally tie the log-domain rate variables to the
    power budget. The tangents underestimate the power any truly achievable
    target profile needs, so no point whose violation is nonpositive is ever
    excluded and all certificates remain valid, but bounds tighten by orders
    of magnitude on boxes whose rate variables could otherwise float free of
    the power constraint.
    """

    def __init__(self, inst: ProblemInstance, power_cuts: bool = True):
        self.geo = _InstanceGeometry(inst)
        self.power_cuts = power_cuts
        self._build()

    def _twin_args(self):
        return (self.power_cuts,)

    def _build(self):
        geo, inst = self.geo, self.geo.inst
        K, npre = geo.K, geo.npre
        u = inst.u
        self.off_c = npre
        self.off_g = npre + K
        self.i_s = npre + 2 * K
        self.off_d = self.i_s + 1
        self.off_e = self.off_d + (K - 1)
        self.i_t = self.off_e + 2 * (K - 1)
        self.i_w = self.i_t + 1  # total transmit power epigraph
        self.off_zc = self.i_w + 1   # common-stream norm bounds, per user
        self.off_zp = self.off_zc + K  # private-stream norm bounds, per user
        n = self.off_zp + K
        p = Program(n)
        p.q[self.i_t] = 1.0

        def e_re(k):  # user index k in 1..K-1
            return self.off_e + 2 * (k - 1)

        def e_im(k):
            return self.off_e + 2 * (k - 1) + 1

        # equalities: phase references and e_k = h_k^H p_c
        for k in range(K):
            p.add_eq(geo.pslots(k + 1), geo.im_rows[k])
        p.add_eq(geo.pslots(0), geo.im_rows[0])
        for k in range(1, K):
            p.add_eq(
                np.concatenate([geo.pslots(0), [e_re(k)]]),
                np.concatenate([geo.re_rows[k], [-1.0]]),
            )
            p.add_eq(
                np.concatenate([geo.pslots(0), [e_im(k)]]),
                np.concatenate([geo.im_rows[k], [-1.0]]),
            )

        # fixed inequalities
        for k in range(K):
            p.add_ineq(geo.pslots(k + 1), -geo.re_rows[k])
        p.add_ineq(geo.pslots(0), -geo.re_rows[0])
        for k in range(1, K):
            p.add_ineq([self.off_d + k - 1], [-1.0])
        for k in range(K):
            p.add_ineq([self.off_c + k], [-1.0])
        for k in range(K):
            p.add_ineq([self.off_c + k, self.off_g + k], [-1.0, -1.0], -inst.Rth[k])
        p.add_ineq(
            np.concatenate([np.arange(self.off_c, self.off_c + K), [self.i_s]]),
            np.concatenate([np.ones(K), [-1.0]]),
        )
        p.add_ineq([self.i_w], [1.0], inst.P)

        # threshold row: sum_k u_k (c_k + g_k) >= delta * (mu * w + Pc)
        cg_cols = np.concatenate(
            [np.arange(self.off_c, self.off_c + K),
             np.arange(self.off_g, self.off_g + K)]
        )
        self.ee_w_idx = p.nnz_mark() + 2 * K
        self.b_ee = p.b_mark()
        p.add_ineq(
            np.concatenate([cg_cols, [self.i_w]]),
            np.concatenate([-u, -u, [0.0]]),
        )

        # matched-filter power tangents at the two box corners
        self.tan_slices, self.b_tan = [], []
        if self.power_cuts:
            tcols = np.concatenate(
                [np.arange(self.off_g, self.off_g + K), [self.i_s, self.i_w]]
            )
            for _ in range(2):
                mark = p.nnz_mark()
                self.b_tan.append(p.b_mark())
                p.add_ineq(tcols, np.zeros(K + 2))
                self.tan_slices.append(slice(mark, p.nnz_mark()))

        # box rows on the log-substituted targets; rhs rewritten per box
        self.b_glo = p.b_mark()
        for k in range(K):
            p.add_ineq([self.off_g + k], [-1.0])
        self.b_ghi = p.b_mark()
        for k in range(K):
            p.add_ineq([self.off_g + k], [1.0])
        self.b_slo = p.b_mark()
        p.add_ineq([self.i_s], [-1.0])
        self.b_shi = p.b_mark()
        p.add_ineq([self.i_s], [1.0])

        # argument cuts (three rows per user > 1, rewritten per box; sectors
        # wider than pi leave the coefficients zero and the rhs slack at 1)
        self.cut_slices = []
        self.b_cut = p.b_mark()
        for k in range(1, K):
            mark = p.nnz_mark()
            p.add_ineq([e_re(k), e_im(k)], [0.0, 0.0], 1.0)
            p.add_ineq([e_re(k), e_im(k)], [0.0, 0.0], 1.0)
            p.add_ineq(
                [e_re(k), e_im(k), self.off_d + k - 1, self.i_t],
                [0.0, 0.0, 0.0, 0.0],
                1.0,
            )
            self.cut_slices.append(slice(mark, p.nnz_mark()))

        # target-scale rows: sqrt(s_lo) * z <= head / sqrt(gamma_lo_k) * z <= head
        self.s_scale_idx = [
            self._emit_scale_row(
                p, self.off_zc, np.concatenate([[self.i_t], geo.pslots(0)]),
                np.concatenate([[1.0], geo.re_rows[0]]),
            )
        ]
        for k in range(1, K):
            self.s_scale_idx.append(self._emit_scale_row(
                p, self.off_zc + k, [self.i_t, self.off_d + k - 1], [1.0, 1.0],
            ))
        self.g_scale_idx = []
        for k in range(K):
            self.g_scale_idx.append(self._emit_scale_row(
                p, self.off_zp + k,
                np.concatenate([[self.i_t], geo.pslots(k + 1)]),
                np.concatenate([[1.0], geo.re_rows[k]]),
            ))

        self._emit_power_epigraph(p, self.i_w)
        for k in range(K):
            self._emit_norm_cone(p, self.off_zc + k, h_user=k, skip=None)
        for k in range(K):
            self._emit_norm_cone(p, self.off_zp + k, h_user=k, skip=k)

        p.finalize()
        self.prog = p

    def _update(self, box: Box, delta: float):
        inst, p = self.geo.inst, self.prog
        K = self.geo.K
        glo = np.log2(1.0 + box.gamma_lo)
        ghi = np.log2(1.0 + box.gamma_hi)
        slo = float(np.log2(1.0 + box.s_lo))
        shi = float(np.log2(1.0 + box.s_hi))
        p.b[self.b_glo : self.b_glo + K] = -glo
        p.b[self.b_ghi : self.b_ghi + K] = ghi
        p.b[self.b_slo] = -slo
        p.b[self.b_shi] = shi
        for k in range(1, K):
            rows = argument_cuts(box.alpha_lo[k - 1], box.alpha_hi[k - 1])
            sl = self.cut_slices[k - 1]
            if rows:
                (r1, r2, r3) = rows
                p.fill[sl] = [
                    r1[0], r1[1], r2[0], r2[1], r3[0], r3[1], r3[2], -r3[2],
                ]
                p.b[self.b_cut + 3 * (k - 1) : self.b_cut + 3 * k] = 0.0
            else:
                p.fill[sl] = 0.0
                p.b[self.b_cut + 3 * (k - 1) : self.b_cut + 3 * k] = 1.0
        p.fill[self.ee_w_idx] = delta * inst.mu
        p.b[self.b_ee] = -delta * inst.Pc
        for sl, bidx, (corner, sc) in zip(
            self.tan_slices, self.b_tan, ((glo, slo), (ghi, shi))
        ):
            cg, cs, rhs = _power_tangent(corner, sc, self.geo)
            p.fill[sl] = np.concatenate([cg, [cs, -1.0]])
            p.b[bidx] = rhs
        sq_s = np.sqrt(box.s_lo)
        for idx in self.s_scale_idx:
            p.fill[idx] = sq_s
        for k in range(K):
            p.fill[self.g_scale_idx[k]] = np.sqrt(box.gamma_lo[k])

    def _extract(self, x: np.ndarray, scale: float) -> RawSolution:
        K = self.geo.K
        p_c, pp = self.geo.extract_precoders(x, scale)
        ere = x[self.off_e : self.off_e + 2 * (K - 1) : 2]
        eim = x[self.off_e + 1 : self.off_e + 2 * (K - 1) : 2]
        return RawSolution(
            p_c=p_c,
            p=pp,
            c=x[self.off_c : self.off_c + K].copy(),
            gamma_log=x[self.off_g : self.off_g + K].copy(),
            s_log=float(x[self.i_s]),
            d=x[self.off_d : self.off_d + K - 1].copy(),
            e=ere + 1j * eim,
            t=float(x[self.i_t]),
        )

    def solve(self, box: Box, delta: float) -> BoundOutcome:
        """Bound one box at threshold delta; empty boxes never hit the solver."""
        if box is None or box.is_empty():
            return BoundOutcome(beta=INF)
        status, x, obj, scale = self._robust_solve(box, delta)
        if status == INFEASIBLE:
            return BoundOutcome(beta=INF)
        return BoundOutcome(beta=obj, raw=self._extract(x, scale))


# ---------------------------------------------------------------------------
# feasibility check at a fixed target point

class PrimalCheckProblem(_SkeletonSolver):
    """Least violation t of the coupled constraints at frozen targets.

    The target SINRs and the angles are fixed; the angles turn the sector
    membership of each common-stream observation into the affine ray
    e_k = r_k (cos a_k + j sin a_k), r_k >= 0, with d_k - t <= r_k. A value
    t <= 0 certifies that actual precoders achieve the target point.
    """

    def __init__(self, inst: ProblemInstance):
        self.geo = _InstanceGeometry(inst)
        self._build()

    def _build(self):
        geo, inst = self.geo, self.geo.inst
        K, npre = geo.K, geo.npre
        self.off_c = npre
        self.off_d = npre + K
        self.off_r = self.off_d + (K - 1)
        self.i_t = self.off_r + (K - 1)
        self.i_w = self.i_t + 1
        self.off_zc = self.i_w + 1
        self.off_zp = self.off_zc + K
        n = self.off_zp + K
        p = Program(n)
        p.q[self.i_t] = 1.0

        for k in range(K):
            p.add_eq(geo.pslots(k + 1), geo.im_rows[k])
        p.add_eq(geo.pslots(0), geo.im_rows[0])
        self.ray_idx = []
        for k in range(1, K):
            mark = p.nnz_mark() + len(geo.re_rows[k])
            p.add_eq(
                np.concatenate([geo.pslots(0), [self.off_r + k - 1]]),
                np.concatenate([geo.re_rows[k], [-1.0]]),
            )
            mark2 = p.nnz_mark() + len(geo.im_rows[k])
            p.add_eq(
                np.concatenate([geo.pslots(0), [self.off_r + k - 1]]),
                np.concatenate([geo.im_rows[k], [-1.0]]),
            )
            self.ray_idx.append((mark, mark2))

        for k in range(K):
            p.add_ineq(geo.pslots(k + 1), -geo.re_rows[k])
        p.add_ineq(geo.pslots(0), -geo.re_rows[0])
        for k in range(1, K):
            p.add_ineq([self.off_d + k - 1], [-1.0])
            p.add_ineq([self.off_r + k - 1], [-1.0])
            p.add_ineq(
                [self.off_d + k - 1, self.off_r + k - 1, self.i_t],
                [1.0, -1.0, -1.0],
            )
        self.b_floor = p.b_mark()
        for k in range(K):
            p.add_ineq([self.off_c + k], [-1.0])
        self.b_budget = p.b_mark()
        p.add_ineq(np.arange(self.off_c, self.off_c + K), np.ones(K))
        p.add_ineq([self.i_w], [1.0], inst.P)

        self.ee_w_idx = p.nnz_mark() + K
        self.b_ee = p.b_mark()
        p.add_ineq(
            np.concatenate([np.arange(self.off_c, self.off_c + K), [self.i_w]]),
            np.concatenate([-inst.u, [0.0]]),
        )

        self.s_scale_idx = [
            self._emit_scale_row(
                p, self.off_zc, np.concatenate([[self.i_t], geo.pslots(0)]),
                np.concatenate([[1.0], geo.re_rows[0]]),
            )
        ]
        for k in range(1, K):
            self.s_scale_idx.append(self._emit_scale_row(
                p, self.off_zc + k, [self.i_t, self.off_d + k - 1], [1.0, 1.0],
            ))
        self.g_scale_idx = []
        for k in range(K):
            self.g_scale_idx.append(self._emit_scale_row(
                p, self.off_zp + k,
                np.concatenate([[self.i_t], geo.pslots(k + 1)]),
                np.concatenate([[1.0], geo.re_rows[k]]),
            ))

        self._emit_power_epigraph(p, self.i_w)
        for k in range(K):
            self._emit_norm_cone(p, self.off_zc + k, h_user=k, skip=None)
        for k in range(K):
            self._emit_norm_cone(p, self.off_zp + k, h_user=k, skip=k)

        p.finalize()
        self.prog = p

    def _update(self, point: DualPoint, delta: float):
        inst, p = self.geo.inst, self.prog
        K = self.geo.K
        gamma = np.maximum(np.asarray(point.gamma_p, dtype=float), 0.0)
        s_val = max(float(point.s), 0.0)
        glog = np.log2(1.0 + gamma)
        for k in range(1, K):
            i_re, i_im = self.ray_idx[k - 1]
            p.fill[i_re] = -np.cos(point.alpha[k - 1])
            p.fill[i_im] = -np.sin(point.alpha[k - 1])
        p.b[self.b_floor : self.b_floor + K] = -np.maximum(0.0, inst.Rth - glog)
        p.b[self.b_budget] = np.log2(1.0 + s_val)
        p.fill[self.ee_w_idx] = delta * inst.mu
        p.b[self.b_ee] = float(inst.u @ glog) - delta * inst.Pc
        sq_s = np.sqrt(s_val)
        for idx in self.s_scale_idx:
            p.fill[idx] = sq_s
        for k in range(K):
            p.fill[self.g_scale_idx[k]] = np.sqrt(gamma[k])

    def solve(self, point: DualPoint, delta: float):
        """Return (t, raw). t <= 0 certifies the point; +inf means no candidate."""
        status, x, obj, scale = self._robust_solve(point, delta)
        if status == INFEASIBLE:
            return INF, None
        K = self.geo.K
        p_c, pp = self.geo.extract_precoders(x, scale)
        r = x[self.off_r : self.off_r + K - 1]
        e = r * np.exp(1j * np.asarray(point.alpha, dtype=float))
        raw = RawSolution(
            p_c=p_c,
            p=pp,
            c=x[self.off_c : self.off_c + K].copy(),
            gamma_log=np.log2(1.0 + np.maximum(point.gamma_p, 0.0)),
            s_log=float(np.log2(1.0 + max(point.s, 0.0))),
            d=x[self.off_d : self.off_d + K - 1].copy(),
            e=e,
            t=float(obj),
        )
        return float(obj), raw


# ---------------------------------------------------------------------------
# cheapest precoders achieving a fixed target point (grid oracle workhorse)

class PowerMinProblem(_SkeletonSolver):
    """Minimum transmit power that meets a target point exactly (t = 0)."""

    def __init__(self, inst: ProblemInstance):
        self.geo = _InstanceGeometry(inst)
        self._build()

    def _build(self):
        geo, inst = self.geo, self.geo.inst
        K, npre = geo.K, geo.npre
        self.off_c = npre
        self.off_d = npre + K
        self.off_r = self.off_d + (K - 1)
        self.i_w = self.off_r + (K - 1)
        self.off_zc = self.i_w + 1
        self.off_zp = self.off_zc + K
        n = self.off_zp + K
        p = Program(n)
        p.q[self.i_w] = 1.0

        for k in range(K):
            p.add_eq(geo.pslots(k + 1), geo.im_rows[k])
        p.add_eq(geo.pslots(0), geo.im_rows[0])
        self.ray_idx = []
        for k in range(1, K):
            mark = p.nnz_mark() + len(geo.re_rows[k])
            p.add_eq(
                np.concatenate([geo.pslots(0), [self.off_r + k - 1]]),
                np.concatenate([geo.re_rows[k], [-1.0]]),
            )
            mark2 = p.nnz_mark() + len(geo.im_rows[k])
            p.add_eq(
                np.concatenate([geo.pslots(0), [self.off_r + k - 1]]),
                np.concatenate([geo.im_rows[k], [-1.0]]),
            )
            self.ray_idx.append((mark, mark2))

        for k in range(K):
            p.add_ineq(geo.pslots(k + 1), -geo.re_rows[k])
        p.add_ineq(geo.pslots(0), -geo.re_rows[0])
        for k in range(1, K):
            p.add_ineq([self.off_d + k - 1], [-1.0])
            p.add_ineq([self.off_r + k - 1], [-1.0])
            p.add_ineq(
                [self.off_d + k - 1, self.off_r + k - 1], [1.0, -1.0]
            )
        self.b_floor = p.b_mark()
        for k in range(K):
            p.add_ineq([self.off_c + k], [-1.0])
        self.b_budget = p.b_mark()
        p.add_ineq(np.arange(self.off_c, self.off_c + K), np.ones(K))
        p.add_ineq([self.i_w], [1.0], inst.P)

        self.s_scale_idx = [
            self._emit_scale_row(
                p, self.off_zc, geo.pslots(0), geo.re_rows[0],
            )
        ]
        for k in range(1, K):
            self.s_scale_idx.append(self._emit_scale_row(
                p, self.off_zc + k, [self.off_d + k - 1], [1.0],
            ))
        self.g_scale_idx = []
        for k in range(K):
            self.g_scale_idx.append(self._emit_scale_row(
                p, self.off_zp + k, geo.pslots(k + 1), geo.re_rows[k],
            ))

        self._emit_power_epigraph(p, self.i_w)
        for k in range(K):
            self._emit_norm_cone(p, self.off_zc + k, h_user=k, skip=None)
        for k in range(K):
            self._emit_norm_cone(p, self.off_zp + k, h_user=k, skip=k)

        p.finalize()
        self.prog = p

    def _update(self, point: DualPoint):
        inst, p = self.geo.inst, self.prog
        K = self.geo.K
        gamma = np.maximum(np.asarray(point.gamma_p, dtype=float), 0.0)
        s_val = max(float(point.s), 0.0)
        glog = np.log2(1.0 + gamma)
        for k in range(1, K):
            i_re, i_im = self.ray_idx[k - 1]
            p.fill[i_re] = -np.cos(point.alpha[k - 1])
            p.fill[i_im] = -np.sin(point.alpha[k - 1])
        p.b[self.b_floor : self.b_floor + K] = -np.maximum(0.0, inst.Rth - glog)
        p.b[self.b_budget] = np.log2(1.0 + s_val)
        sq_s = np.sqrt(s_val)
        for idx in self.s_scale_idx:
            p.fill[idx] = sq_s
        for k in range(K):
            p.fill[self.g_scale_idx[k]] = np.sqrt(gamma[k])

    def solve(self, point: DualPoint):
        """Return the cheapest raw solution meeting the point, or None."""
        status, x, obj, scale = self._robust_solve(point)
        if status == INFEASIBLE:
            return None
        K = self.geo.K
        p_c, pp = self.geo.extract_precoders(x, scale)
        r = x[self.off_r : self.off_r + K - 1]
        e = r * np.exp(1j * np.asarray(point.alpha, dtype=float))
        return RawSolution(
            p_c=p_c,
            p=pp,
            c=x[self.off_c : self.off_c + K].copy(),
            gamma_log=np.log2(1.0 + np.maximum(point.gamma_p, 0.0)),
            s_log=float(np.log2(1.0 + max(point.s, 0.0))),
            d=x[self.off_d : self.off_d + K - 1].copy(),
            e=e,
            t=0.0,
        )
