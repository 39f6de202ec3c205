"""Channel generation, experiment orchestration and result persistence."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean, median

import numpy as np

from .model import ProblemInstance
from .oracle import grid_certify
from .solver import SolverConfig, solve

CSV_COLUMNS = [
    "seed", "K", "M", "P_dB", "mode", "status", "objective_bits",
    "nodes", "reductions_empty", "time_ms", "oracle_bits",
]


def generate_channels(K: int, M: int, seed: int) -> np.ndarray:
    """(K, M) i.i.d. circularly symmetric unit-variance complex Gaussians.

    Driven by the counter-based Philox generator, so a seed fully determines
    the matrix independently of draw order or platform.
    """
    if K < 1 or M < 1:
        raise ValueError("need K >= 1 and M >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    re = rng.standard_normal((K, M))
    im = rng.standard_normal((K, M))
    return (re + 1j * im) / np.sqrt(2.0)


@dataclass
class ExperimentSpec:
    """One sweep: seeds x power grid on a fixed system size and power model."""

    K: int
    M: int
    seeds: list
    p_grid_db: list
    mu: float = 0.0
    Pc: float = 1.0
    weights: list = None
    Rth: list = None
    mode: str = "rsma"
    epsilon: float = 1e-6
    eta: float = 0.01
    max_iter: int = 200_000
    time_limit: float = None
    oracle_resolution: int = None  # None = skip the grid oracle column

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        with open(Path(path)) as f:
            return cls.from_dict(json.load(f))


def _run_one(spec: ExperimentSpec, seed: int, p_db: float) -> dict:
    H = generate_channels(spec.K, spec.M, seed)
    inst = ProblemInstance(
        H=H,
        P=10.0 ** (p_db / 10.0),
        u=None if spec.weights is None else np.asarray(spec.weights, float),
        mu=spec.mu,
        Pc=spec.Pc,
        Rth=None if spec.Rth is None else np.asarray(spec.Rth, float),
    )
    cfg = SolverConfig(
        epsilon=spec.epsilon, eta=spec.eta, max_iter=spec.max_iter,
        time_limit=spec.time_limit, mode=spec.mode,
    )
    row = {
        "seed": seed, "K": spec.K, "M": spec.M, "P_dB": p_db, "mode": spec.mode,
        "status": "", "objective_bits": "", "nodes": "", "reductions_empty": "",
        "time_ms": "", "oracle_bits": "",
    }
    t0 = time.perf_counter()
    try:
        res = solve(inst, cfg)
    except Exception as exc:  # a failed instance must not kill the sweep
        row["status"] = f"error:{type(exc).__name__}"
        row["time_ms"] = round(1000.0 * (time.perf_counter() - t0), 3)
        return row
    row["status"] = res.status.value
    row["objective_bits"] = res.objective
    row["nodes"] = res.stats.nodes_bounded
    row["reductions_empty"] = res.stats.reduced_empty
    row["time_ms"] = round(1000.0 * res.stats.time_total, 3)
    if spec.oracle_resolution and spec.K <= 3:
        val, _ = grid_certify(inst, spec.oracle_resolution, mode=spec.mode)
        row["oracle_bits"] = val
    return row


def run_experiment(spec: ExperimentSpec, out_dir=None) -> list:
    """Solve every (seed, power) cell; optionally persist CSV/JSONL/summary."""
    rows = [
        _run_one(spec, seed, p_db)
        for seed in spec.seeds
        for p_db in spec.p_grid_db
    ]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            w.writeheader()
            w.writerows(rows)
        with open(out / "results.jsonl", "w") as f:
            for r in rows:
                f.write(json.dumps(r) + "\n")
        with open(out / "summary.json", "w") as f:
            json.dump(summarize(spec, rows), f, indent=2)
    return rows


def summarize(spec: ExperimentSpec, rows: list) -> dict:
    """Mean / median run time (and node count) over the solved instances."""
    ok = [r for r in rows if str(r["status"]).startswith(("optimal", "eps_"))]
    times = [r["time_ms"] / 1000.0 for r in ok]
    nodes = [r["nodes"] for r in ok if r["nodes"] != ""]
    return {
        "K": spec.K,
        "M": spec.M,
        "mode": spec.mode,
        "instances": len(rows),
        "solved": len(ok),
        "mean_time_s": mean(times) if times else None,
        "median_time_s": median(times) if times else None,
        "mean_nodes": mean(nodes) if nodes else None,
        "median_nodes": median(nodes) if nodes else None,
    }
