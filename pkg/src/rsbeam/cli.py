"""Command line front end.

Exit codes: 0 solved/feasible, 2 certified infeasible, 3 iteration or time
limit hit, 4 solver failure.
"""

from __future__ import annotations

import json
import sys

import click

from .bench import ExperimentSpec, generate_channels, run_experiment, summarize
from .conic import ConicSolveError
from .model import (
    ProblemInstance,
    candidate_to_dict,
    instance_to_dict,
    load_instance,
)
from .oracle import grid_certify
from .solver import SolverConfig, Status, solve as solve_global

_EXIT = {
    Status.OPTIMAL: 0,
    Status.EPS_INFEASIBLE: 2,
    Status.ITER_LIMIT: 3,
    Status.TIME_LIMIT: 3,
}


@click.group()
def main():
    """Globally optimal rate-splitting precoder design."""


@main.command()
@click.argument("instance", type=click.Path(exists=True))
@click.option("--eps", default=1e-6, show_default=True, help="Feasibility margin.")
@click.option("--eta", default=0.01, show_default=True, help="Objective tolerance.")
@click.option("--mode", type=click.Choice(["rsma", "unicast", "multicast"]),
              default="rsma", show_default=True)
@click.option("--time-limit", type=float, default=None, help="Seconds.")
@click.option("--max-iter", type=int, default=200_000, show_default=True)
@click.option("--trace", type=click.Path(), default=None,
              help="Write a line-delimited JSON node log here.")
def solve(instance, eps, eta, mode, time_limit, max_iter, trace):
    """Solve one instance file and print the result as JSON."""
    inst = load_instance(instance)
    cfg = SolverConfig(epsilon=eps, eta=eta, mode=mode, time_limit=time_limit,
                       max_iter=max_iter, trace_path=trace)
    try:
        res = solve_global(inst, cfg)
    except ConicSolveError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(4)
    out = {
        "status": res.status.value,
        "objective": res.objective,
        "certified_delta": res.certified_delta,
        "eta": res.eta,
        "epsilon": res.epsilon,
        "iterations": res.iterations,
        "nodes": res.stats.nodes_bounded,
        "time_s": res.stats.time_total,
        "candidate": candidate_to_dict(res.candidate) if res.candidate else None,
        "rates": None if res.rates is None else {
            "gamma_c": res.rates.gamma_c.tolist(),
            "gamma_p": res.rates.gamma_p.tolist(),
            "per_user_rate": res.rates.per_user_rate.tolist(),
            "total_power": res.rates.total_power,
        },
    }
    click.echo(json.dumps(out, indent=2))
    sys.exit(_EXIT[res.status])


@main.command()
@click.argument("experiment", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), required=True,
              help="Directory for results.csv / results.jsonl / summary.json.")
def bench(experiment, out):
    """Run a seeded experiment sweep described by a JSON spec file."""
    spec = ExperimentSpec.from_json(experiment)
    rows = run_experiment(spec, out_dir=out)
    click.echo(json.dumps(summarize(spec, rows), indent=2))


@main.command()
@click.argument("instance", type=click.Path(exists=True))
@click.option("--resolution", type=int, default=40, show_default=True)
@click.option("--mode", type=click.Choice(["rsma", "unicast", "multicast"]),
              default="rsma", show_default=True)
def oracle(instance, resolution, mode):
    """Grid-certified lower bound on the optimum of one instance."""
    inst = load_instance(instance)
    val, cand = grid_certify(inst, resolution, mode=mode)
    click.echo(json.dumps({
        "value": val,
        "candidate": candidate_to_dict(cand) if cand is not None else None,
    }, indent=2))


@main.command("gen-channels")
@click.option("--k", "k", type=int, required=True, help="Number of users.")
@click.option("--m", "m", type=int, required=True, help="Number of antennas.")
@click.option("--seed", type=int, required=True)
@click.option("--power", type=float, default=10.0, show_default=True,
              help="Power budget stored in the emitted instance.")
def gen_channels(k, m, seed, power):
    """Draw a seeded channel matrix and print a full instance JSON."""
    H = generate_channels(k, m, seed)
    inst = ProblemInstance(H=H, P=power)
    click.echo(json.dumps(instance_to_dict(inst), indent=2))


if __name__ == "__main__":
    main()
