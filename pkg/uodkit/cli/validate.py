import time
from typing import Optional

import click

from ..validation import (
    GRAD_CHECKS,
    GRAD_SEEDS,
    GRAD_TOL,
    format_results,
    require_passing,
    run_gradcheck,
    run_losscheck,
)
from .utils import global_options


@click.command()
@global_options
@click.option("--seed", type=int, default=0, show_default=True, help="Base seed for the inputs.")
@click.option(
    "--tol",
    type=float,
    default=GRAD_TOL,
    show_default=True,
    help="Maximum relative error allowed per check.",
)
@click.option(
    "--seeds", type=click.IntRange(min=1), default=GRAD_SEEDS, show_default=True, hidden=True
)
@click.option(
    "--corrupt",
    type=click.Choice([*GRAD_CHECKS, "toynet"]),
    default=None,
    hidden=True,
    help="Scale one analytic gradient to exercise the failure path.",
)
def gradcheck(seed: int, tol: float, seeds: int, corrupt: Optional[str]):
    """Check every analytic gradient against central finite differences."""
    started = time.perf_counter()
    results = run_gradcheck(seed=seed, tol=tol, seeds=seeds, corrupt=corrupt)
    click.echo(format_results(results))
    click.echo(f"{len(results)} checks in {time.perf_counter() - started:.1f}s")
    require_passing(results)


@click.command()
@global_options
def losscheck():
    """Check the loss functions against hand-computed values."""
    results = run_losscheck()
    click.echo(format_results(results))
    require_passing(results)
