"""Certified global search over SINR-target boxes.

The engine maintains a partition of the initial target box in a priority
queue keyed by each box's lower bound beta. Per iteration it bisects the
most promising box, tightens both children against the current objective
threshold, bounds them by SOCP, and probes promising children for actual
precoders. Every discovered candidate raises the threshold delta to its
objective plus eta; boxes whose bound exceeds -epsilon are discarded. An
empty queue therefore certifies that no point that is feasible with margin
epsilon beats the incumbent by more than eta — or, without an incumbent,
that no such point exists at all.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .boxes import Box, DegenerateBoxError, branch
from .model import (
    Candidate,
    ProblemInstance,
    RateReport,
    TWO_PI,
    check_primal_feasible,
    initial_box,
)
from .reduction import reduce_box
from .subproblems import (
    BoundingProblem,
    DualPoint,
    PrimalCheckProblem,
    RawSolution,
    best_common_split,
)

INF = float("inf")

MODES = ("rsma", "unicast", "multicast")


class Status(Enum):
    OPTIMAL = "optimal"                  # incumbent certified within eta
    EPS_INFEASIBLE = "eps_infeasible"    # no margin-eps feasible point exists
    ITER_LIMIT = "iter_limit"
    TIME_LIMIT = "time_limit"


@dataclass
class SolverConfig:
    epsilon: float = 1e-6        # feasibility margin of the certificate
    eta: float = 0.01            # objective tolerance of the certificate
    max_iter: int = 200_000
    time_limit: float = None     # seconds, None = unlimited
    branching: str = "absolute"  # or "relative" (edges measured vs initial box)
    mode: str = "rsma"           # rsma | unicast | multicast
    initial_candidate: Candidate = None
    trace_path: object = None    # line-delimited JSON node log
    feas_tol: float = 1e-6       # authoritative candidate acceptance tolerance
    check_tol: float = 1e-9      # slack absorbed when reading "t <= 0"

    def __post_init__(self):
        if not (self.epsilon > 0 and self.eta > 0):
            raise ValueError("epsilon and eta must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.branching not in ("absolute", "relative"):
            raise ValueError("branching must be 'absolute' or 'relative'")


@dataclass
class SolveStats:
    iterations: int = 0
    nodes_bounded: int = 0
    reduced_empty: int = 0
    pruned: int = 0
    primal_checks: int = 0
    incumbent_updates: int = 0
    rejected_candidates: int = 0
    degenerate_boxes: int = 0
    max_queue: int = 0
    time_total: float = 0.0
    time_reduce: float = 0.0
    time_bound: float = 0.0
    time_check: float = 0.0


@dataclass
class IncumbentRecord:
    iteration: int
    objective: float
    candidate: Candidate
    delta_after: float


@dataclass
class SolveResult:
    """Outcome of one global solve.

    certified_delta is the objective threshold proven unreachable by any
    point feasible with margin epsilon (meaningful when the queue emptied,
    i.e. status OPTIMAL or EPS_INFEASIBLE); with an incumbent it equals
    objective + eta, which is the certificate "no such point is more than
    eta better". best_remaining_beta reports the smallest bound left in the
    queue when a limit stopped the search early (None otherwise).
    """

    status: Status
    objective: float
    candidate: Candidate
    rates: RateReport
    certified_delta: float
    best_remaining_beta: float
    epsilon: float
    eta: float
    iterations: int
    stats: SolveStats
    incumbents: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        """Certified optimality gap (certified_delta - objective)."""
        if self.objective is None:
            return INF
        return self.certified_delta - self.objective


def recover_dual_point(raw: RawSolution, box: Box) -> DualPoint:
    """Target point inside the box taken from a bounding solution.

    SINR values leave the log domain; each angle snaps to the box endpoint
    nearest to the realized common-stream phase (ties to the lower end).
    """
    gamma = np.clip(np.exp2(raw.gamma_log) - 1.0, box.gamma_lo, box.gamma_hi)
    s = float(np.clip(np.exp2(raw.s_log) - 1.0, box.s_lo, box.s_hi))
    ang = np.mod(np.angle(raw.e), TWO_PI)
    lo, hi = box.alpha_lo, box.alpha_hi
    alpha = np.where(np.abs(ang - lo) <= np.abs(ang - hi), lo, hi)
    return DualPoint(gamma_p=gamma, s=s, alpha=alpha)


def _point_power_ok(inst: ProblemInstance, out, box: Box) -> bool:
    """Matched-filter screen: a target point whose cheapest conceivable power
    already exceeds the budget cannot pass the feasibility check."""
    gamma = np.clip(np.exp2(out.raw.gamma_log) - 1.0, box.gamma_lo, box.gamma_hi)
    s = float(np.clip(np.exp2(out.raw.s_log) - 1.0, box.s_lo, box.s_hi))
    inv = 1.0 / inst.channel_gains
    need = float(gamma @ inv) + s * float(inv.max())
    return need <= inst.P * (1.0 + 1e-9) + 1e-9


def _mode_box(inst: ProblemInstance, mode: str) -> Box:
    box = initial_box(inst)
    if mode == "unicast":
        box.s_hi = 0.0
    elif mode == "multicast":
        box.gamma_hi[:] = 0.0
    return box


def _mode_candidate(inst, raw: RawSolution, mode: str):
    """Candidate from raw precoders; the disabled block is zeroed exactly."""
    p_c = raw.p_c if mode != "unicast" else np.zeros(inst.M, dtype=complex)
    p = raw.p if mode != "multicast" else np.zeros((inst.K, inst.M), dtype=complex)
    cand, rr = best_common_split(inst, p_c, p)
    return cand, rr


class _Trace:
    def __init__(self, path):
        self._fh = open(path, "w") if path is not None else None

    def write(self, rec: dict):
        if self._fh is not None:
            self._fh.write(json.dumps(rec) + "\n")

    def close(self):
        if self._fh is not None:
            self._fh.close()


def _box_json(box: Box) -> dict:
    return {
        "gamma_lo": box.gamma_lo.tolist(),
        "gamma_hi": box.gamma_hi.tolist(),
        "s_lo": box.s_lo,
        "s_hi": box.s_hi,
        "alpha_lo": box.alpha_lo.tolist(),
        "alpha_hi": box.alpha_hi.tolist(),
    }


def solve(inst: ProblemInstance, config: SolverConfig = None) -> SolveResult:
    """Globally maximize the weighted rate / efficiency objective.

    Returns an eta-certified incumbent (status OPTIMAL), a certificate that
    not even margin-epsilon feasible points exist (EPS_INFEASIBLE), or the
    best data found when an iteration/time budget ran out.
    """
    cfg = config or SolverConfig()
    t_start = time.perf_counter()
    stats = SolveStats()
    trace = _Trace(cfg.trace_path)

    root = _mode_box(inst, cfg.mode)
    ref_widths = np.maximum(root.widths(), 1e-12)
    bounding = BoundingProblem(inst)
    checker = PrimalCheckProblem(inst)

    delta = 0.0
    incumbent = None  # (objective, Candidate, RateReport)
    incumbents: list[IncumbentRecord] = []
    if cfg.initial_candidate is not None:
        cand0, rr0 = best_common_split(
            inst, cfg.initial_candidate.p_c, cfg.initial_candidate.p
        )
        verdict = check_primal_feasible(inst, cand0, cfg.feas_tol)
        if not verdict.feasible:
            raise ValueError(f"initial candidate infeasible: {verdict.violations}")
        incumbent = (rr0.objective, cand0, rr0)
        delta = rr0.objective + cfg.eta
        incumbents.append(IncumbentRecord(0, rr0.objective, cand0, delta))

    heap = [(-INF, 0, 0, root)]  # (beta, fifo counter, node id, box)

    try:
        return _search(
            inst, cfg, stats, trace, heap, bounding, checker, ref_widths,
            delta, incumbent, incumbents, t_start,
        )
    finally:
        trace.close()


def _search(
    inst, cfg, stats, trace, heap, bounding, checker, ref_widths,
    delta, incumbent, incumbents, t_start,
):
    seq = 0
    node_id = 0
    status = None

    while heap:
        if stats.iterations >= cfg.max_iter:
            status = Status.ITER_LIMIT
            break
        if cfg.time_limit is not None and time.perf_counter() - t_start > cfg.time_limit:
            status = Status.TIME_LIMIT
            break
        stats.iterations += 1
        stats.max_queue = max(stats.max_queue, len(heap))
        _, _, parent_id, parent = heapq.heappop(heap)

        # while the common-SINR floor can still be zero, the bound does not
        # react to angle splits, so spend them only once s_lo is positive
        active = None
        if parent.s_lo <= 0.0 and inst.K > 1:
            active = np.ones(parent.ndim, dtype=bool)
            active[inst.K + 1 :] = False
        try:
            children = branch(parent, cfg.branching, ref_widths, active)
        except DegenerateBoxError:
            stats.degenerate_boxes += 1
            continue

        found = []  # (objective, Candidate, RateReport, node id)
        for child in children:
            node_id += 1
            rec = {"id": node_id, "parent": parent_id, "iter": stats.iterations,
                   "delta": delta, "box": _box_json(child)}

            t0 = time.perf_counter()
            red = reduce_box(inst, child, delta)
            stats.time_reduce += time.perf_counter() - t0
            if red is None:
                stats.reduced_empty += 1
                stats.pruned += 1
                rec.update(beta="inf", reduced_empty=True, pruned=True,
                           incumbent=False)
                trace.write(rec)
                continue

            t0 = time.perf_counter()
            out = bounding.solve(red, delta)
            stats.time_bound += time.perf_counter() - t0
            stats.nodes_bounded += 1
            beta = out.beta

            if out.raw is not None:
                # free transcending probe: the bounding solution's precoders
                # are themselves a candidate; their achieved rates often beat
                # the current threshold long before a box gets tight
                cand_p, rr_p = _mode_candidate(inst, out.raw, cfg.mode)
                if (
                    rr_p.objective > delta - cfg.eta
                    and check_primal_feasible(inst, cand_p, cfg.feas_tol).feasible
                ):
                    found.append((rr_p.objective, cand_p, rr_p, node_id))

            if beta <= 0.0 and out.raw is not None and _point_power_ok(inst, out, red):
                point = recover_dual_point(out.raw, red)
                t0 = time.perf_counter()
                tval, raw_fix = checker.solve(point, delta)
                stats.time_check += time.perf_counter() - t0
                stats.primal_checks += 1
                if tval <= cfg.check_tol and raw_fix is not None:
                    cand, rr = _mode_candidate(inst, raw_fix, cfg.mode)
                    verdict = check_primal_feasible(inst, cand, cfg.feas_tol)
                    if verdict.feasible:
                        found.append((rr.objective, cand, rr, node_id))
                    else:
                        stats.rejected_candidates += 1

            pruned = beta > -cfg.epsilon
            if pruned:
                stats.pruned += 1
            else:
                seq += 1
                heapq.heappush(heap, (beta, seq, node_id, red))
            rec.update(beta=(beta if np.isfinite(beta) else "inf"),
                       reduced_empty=False, pruned=pruned, incumbent=False)
            trace.write(rec)

        if found:
            fbest, cand, rr, nid = max(found, key=lambda z: z[0])
            if fbest > delta - cfg.eta:
                incumbent = (fbest, cand, rr)
                delta = fbest + cfg.eta
                stats.incumbent_updates += 1
                incumbents.append(
                    IncumbentRecord(stats.iterations, fbest, cand, delta)
                )
                trace.write({"id": nid, "iter": stats.iterations,
                             "incumbent": True, "objective": fbest,
                             "delta": delta})
    else:
        status = Status.OPTIMAL if incumbent is not None else Status.EPS_INFEASIBLE

    stats.time_total = time.perf_counter() - t_start
    best_beta = min((h[0] for h in heap), default=None)
    obj, cand, rr = (incumbent if incumbent is not None else (None, None, None))
    return SolveResult(
        status=status,
        objective=obj,
        candidate=cand,
        rates=rr,
        certified_delta=delta,
        best_remaining_beta=best_beta if heap else None,
        epsilon=cfg.epsilon,
        eta=cfg.eta,
        iterations=stats.iterations,
        stats=stats,
        incumbents=incumbents,
    )
