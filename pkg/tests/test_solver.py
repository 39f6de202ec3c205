import json

import numpy as np
import pytest

from rsbeam import (
    Box,
    Candidate,
    ProblemInstance,
    RawSolution,
    SolverConfig,
    Status,
    check_primal_feasible,
    generate_channels,
    recover_dual_point,
    solve,
)
from rsbeam.subproblems import DualPoint, PrimalCheckProblem


def orthogonal(P=10.0, **kw):
    return ProblemInstance(H=[[1, 0], [0, 1]], P=P, **kw)


def raw_with(gamma_log, s_log, e):
    K = len(gamma_log)
    return RawSolution(
        p_c=np.zeros(2, complex), p=np.zeros((K, 2), complex), c=np.zeros(K),
        gamma_log=np.asarray(gamma_log, float), s_log=s_log,
        d=np.zeros(max(K - 1, 0)), e=np.asarray(e, complex), t=0.0,
    )


class TestRecoverDualPoint:
    def box(self, alo=0.0, ahi=1.0):
        return Box(
            gamma_lo=np.zeros(2), gamma_hi=np.full(2, 50.0),
            s_lo=0.0, s_hi=50.0,
            alpha_lo=np.array([alo]), alpha_hi=np.array([ahi]),
        )

    def test_targets_leave_log_domain(self):
        raw = raw_with([1.0, 2.0], 0.0, [1.0])
        pt = recover_dual_point(raw, self.box())
        np.testing.assert_allclose(pt.gamma_p, [1.0, 3.0])
        assert pt.s == 0.0

    def test_angle_snaps_to_nearest_endpoint(self):
        raw = raw_with([0.0, 0.0], 0.0, [np.exp(0.3j)])
        pt = recover_dual_point(raw, self.box(0.0, 1.0))
        assert pt.alpha[0] == 0.0
        raw = raw_with([0.0, 0.0], 0.0, [np.exp(0.8j)])
        pt = recover_dual_point(raw, self.box(0.0, 1.0))
        assert pt.alpha[0] == 1.0

    def test_angle_tie_takes_lower_endpoint(self):
        raw = raw_with([0.0, 0.0], 0.0, [np.exp(0.5j)])
        pt = recover_dual_point(raw, self.box(0.0, 1.0))
        assert pt.alpha[0] == 0.0

    def test_point_clipped_into_box(self):
        box = self.box()
        box.gamma_hi[:] = 2.0
        raw = raw_with([5.0, 5.0], 10.0, [1.0])  # 2^5 - 1 = 31 > 2
        pt = recover_dual_point(raw, box)
        np.testing.assert_allclose(pt.gamma_p, [2.0, 2.0])
        assert box.contains(pt.gamma_p, pt.s, pt.alpha)


class TestSolve:
    def test_single_user_matched_filter(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        inst = ProblemInstance(H=[h], P=5.0)
        res = solve(inst, SolverConfig(eta=0.01))
        expect = np.log2(1.0 + inst.P * float(np.vdot(h, h).real))
        assert res.status == Status.OPTIMAL
        assert res.objective == pytest.approx(expect, abs=0.01)
        assert res.gap == pytest.approx(res.eta)

    def test_orthogonal_unicast_equal_split(self):
        res = solve(orthogonal(), SolverConfig(eta=0.01, mode="unicast"))
        assert res.status == Status.OPTIMAL
        assert res.objective == pytest.approx(2 * np.log2(6.0), abs=0.01)
        np.testing.assert_allclose(res.candidate.p_c, 0.0)
        assert np.sum(res.candidate.c) == 0.0

    def test_out_of_reach_qos_is_certified_infeasible(self):
        inst = ProblemInstance(H=[[1, 0], [0, 1]], P=0.1, Rth=[50.0, 50.0])
        res = solve(inst)
        assert res.status == Status.EPS_INFEASIBLE
        assert res.candidate is None and res.objective is None

    def test_iteration_limit_reports_partial_data(self):
        inst = orthogonal()
        res = solve(inst, SolverConfig(max_iter=3))
        assert res.status == Status.ITER_LIMIT
        assert res.iterations == 3
        assert res.best_remaining_beta is not None

    def test_time_limit(self):
        H = generate_channels(2, 2, 5)
        inst = ProblemInstance(H=H, P=10.0)
        res = solve(inst, SolverConfig(time_limit=0.02, max_iter=10**7))
        assert res.status == Status.TIME_LIMIT

    def test_threshold_trace_is_nondecreasing(self):
        for seed in range(4):
            H = generate_channels(2, 2, seed)
            inst = ProblemInstance(H=H, P=10.0)
            res = solve(inst, SolverConfig(eta=0.01, mode="unicast"))
            deltas = [r.delta_after for r in res.incumbents]
            objs = [r.objective for r in res.incumbents]
            assert all(b >= a for a, b in zip(deltas, deltas[1:]))
            assert all(b >= a for a, b in zip(objs, objs[1:]))
            assert res.certified_delta == pytest.approx(objs[-1] + res.eta)

    def test_every_incumbent_is_feasible(self):
        H = generate_channels(2, 2, 9)
        inst = ProblemInstance(H=H, P=10.0, mu=1.0)
        res = solve(inst, SolverConfig(max_iter=600))
        assert res.incumbents
        for rec in res.incumbents:
            assert check_primal_feasible(inst, rec.candidate, 1e-6).feasible

    def test_deterministic_replay(self):
        H = generate_channels(2, 2, 4)
        inst = ProblemInstance(H=H, P=10.0)
        a = solve(inst, SolverConfig(eta=0.02, mode="unicast"))
        b = solve(inst, SolverConfig(eta=0.02, mode="unicast"))
        assert a.iterations == b.iterations
        assert a.stats.nodes_bounded == b.stats.nodes_bounded
        assert a.objective == b.objective
        assert [r.iteration for r in a.incumbents] == [
            r.iteration for r in b.incumbents
        ]

    def test_split_streams_dominate_private_only(self):
        # enabling the common stream can only help
        for seed in (3, 8):
            H = generate_channels(2, 2, seed)
            inst = ProblemInstance(H=H, P=10.0)
            uni = solve(inst, SolverConfig(eta=0.01, mode="unicast"))
            full = solve(inst, SolverConfig(eta=0.05, max_iter=4000))
            assert full.objective >= uni.objective - 0.06

    def test_initial_candidate_seeds_threshold(self):
        inst = orthogonal()
        uni = solve(inst, SolverConfig(eta=0.01, mode="unicast"))
        cfg = SolverConfig(eta=0.05, max_iter=2000, initial_candidate=uni.candidate)
        res = solve(inst, cfg)
        assert res.incumbents[0].iteration == 0
        assert res.objective >= uni.objective - 1e-9

    def test_infeasible_initial_candidate_rejected(self):
        inst = orthogonal()
        bad = Candidate(
            p_c=np.zeros(2), p=np.array([[5.0, 0], [0, 5.0]]), c=np.zeros(2)
        )
        with pytest.raises(ValueError, match="initial candidate"):
            solve(inst, SolverConfig(initial_candidate=bad))

    def test_multicast_mode_disables_private_streams(self):
        H = generate_channels(2, 2, 6)
        inst = ProblemInstance(H=H, P=10.0)
        res = solve(inst, SolverConfig(eta=0.02, mode="multicast", max_iter=4000))
        assert res.status == Status.OPTIMAL
        np.testing.assert_allclose(res.candidate.p, 0.0)
        assert np.sum(res.candidate.c) > 0.1

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            SolverConfig(epsilon=0.0)
        with pytest.raises(ValueError):
            SolverConfig(mode="broadcast")
        with pytest.raises(ValueError):
            SolverConfig(branching="widest")


class TestTrace:
    def test_trace_records_nodes_and_incumbents(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        inst = orthogonal()
        res = solve(inst, SolverConfig(eta=0.01, mode="unicast", trace_path=path))
        records = [json.loads(line) for line in path.read_text().splitlines()]
        assert records
        node_recs = [r for r in records if "box" in r]
        assert {"id", "parent", "iter", "beta", "pruned", "incumbent"} <= set(
            node_recs[0]
        )
        assert any(r.get("incumbent") for r in records)
        ids = [r["id"] for r in node_recs]
        assert len(ids) == len(set(ids))

    def test_pruned_boxes_hold_no_certified_points(self, tmp_path):
        # grid-search small discarded boxes: no target point inside may pass
        # the feasibility check with margin epsilon at the delta of record
        path = tmp_path / "trace.jsonl"
        H = generate_channels(2, 2, 7)
        inst = ProblemInstance(H=H, P=10.0)
        cfg = SolverConfig(eta=0.02, mode="unicast", trace_path=path)
        res = solve(inst, cfg)
        assert res.status == Status.OPTIMAL
        records = [json.loads(line) for line in path.read_text().splitlines()]
        pruned = [
            r for r in records
            if r.get("pruned") and not r.get("reduced_empty") and "box" in r
            and r["beta"] != "inf"
        ]
        pruned.sort(key=lambda r: sum(
            np.array(r["box"]["gamma_hi"]) - np.array(r["box"]["gamma_lo"])
        ))
        checker = PrimalCheckProblem(inst)
        for rec in pruned[:4]:
            b = rec["box"]
            delta = rec["delta"]
            g1 = np.linspace(b["gamma_lo"][0], b["gamma_hi"][0], 4)
            g2 = np.linspace(b["gamma_lo"][1], b["gamma_hi"][1], 4)
            for x in g1:
                for y in g2:
                    t, _ = checker.solve(
                        DualPoint(np.array([x, y]), b["s_lo"], np.array(
                            [b["alpha_lo"][0]]
                        )),
                        delta,
                    )
                    assert t > -cfg.epsilon
