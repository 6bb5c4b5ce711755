"""The ``bench`` command line: run simulated experiments, compare methods."""

from __future__ import annotations

import itertools

import click
import numpy as np

from .acquisition import AcquisitionConfig
from .bench import METHODS, SyntheticFunction, gaps_at_iteration, read_csv, rows_to_csv, run_experiment
from .gridsession import GridSpec
from .stats import bonferroni_alpha, mann_whitney_u


@click.group()
def main():
    """Simulated-user benchmark for subspace-based preference optimization."""


@main.command("run")
@click.option("--method", type=click.Choice([*METHODS, "all"]), default="all", show_default=True)
@click.option("--function", "function_kind", type=click.Choice(["gaussian", "rosenbrock"]), default="gaussian", show_default=True)
@click.option("--dim", type=int, default=5, show_default=True, help="Design-space dimensionality.")
@click.option("--iters", type=int, default=15, show_default=True, help="Queries per trial.")
@click.option("--trials", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed; trial t uses seed+t.")
@click.option("--grid-res", type=int, default=5, show_default=True)
@click.option("--grid-levels", type=int, default=4, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, writable=True), required=True)
@click.option("--continuous-sim", is_flag=True, help="Simulate responses on a fine lattice instead of the zoomable grid.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel trial workers.")
def run(method, function_kind, dim, iters, trials, seed, grid_res, grid_levels, out_path, continuous_sim, jobs):
    """Run trials and write one CSV row per (trial, iteration)."""
    methods = list(METHODS) if method == "all" else [method]
    functions = [SyntheticFunction(function_kind, dim)]
    rows = run_experiment(
        methods,
        functions,
        trials=trials,
        iterations=iters,
        base_seed=seed,
        grid=GridSpec(resolution=grid_res, levels=grid_levels),
        acquisition=AcquisitionConfig(),
        continuous_sim=continuous_sim,
        n_jobs=jobs,
    )
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    errors = sum(1 for r in rows if r["error"])
    click.echo(f"wrote {len(rows)} rows to {out_path}" + (f" ({errors} error rows)" if errors else ""))


@main.command("compare")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--iter", "iteration", type=int, required=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
def compare(in_path, iteration, alpha):
    """Summarize optimality gaps at one iteration and test pairwise differences."""
    rows = read_csv(in_path)
    groups = gaps_at_iteration(rows, iteration)
    if not groups:
        raise click.ClickException(f"no rows at iteration {iteration}")
    for (function, dim), by_method in sorted(groups.items()):
        click.echo(f"{function} {dim}D, iteration {iteration}")
        for m in sorted(by_method):
            g = by_method[m]
            click.echo(
                f"  {m:<11} trials={g.size:<4} mean gap={np.mean(g):.6g} median gap={np.median(g):.6g}"
            )
        pairs = list(itertools.combinations(sorted(by_method), 2))
        if not pairs:
            continue
        level = bonferroni_alpha(alpha, len(pairs))
        click.echo(f"  pairwise Mann-Whitney (two-sided, alpha={alpha} -> {level:.6g} per comparison)")
        for ma, mb in pairs:
            u, p, f = mann_whitney_u(by_method[ma], by_method[mb])
            adjusted = min(1.0, p * len(pairs))
            verdict = "significant" if p < level else "not significant"
            click.echo(
                f"    {ma} vs {mb}: U={u:g} p={p:.6g} adjusted-p={adjusted:.6g} f={f:.4f}"
                f" [{verdict}] (f = P[{ma} gap > {mb} gap])"
            )


if __name__ == "__main__":
    main()
