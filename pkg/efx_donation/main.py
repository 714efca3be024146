# EFX Donation Copyright (C) 2026 The EFX Donation Authors
#
# This program is free software: you can redistribute it and/or modify it under the terms
# of the GNU General Public License as published by the Free Software Foundation, either
# version 3 of the License, or (at your option) any later version.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE.  See the GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along with this
# program. If not, see <http://www.gnu.org/licenses/>.

"""
efx-donation

Command line for computing EFX allocations with donated items from Nash-welfare seeds,
and for checking allocations against exact brute-force oracles.

Exit codes: 0 success, 1 a requested check failed, 2 usage, 3 bad input, 4 oracle cap
exceeded, 5 an internal invariant failed, 6 instance generation gave up.
"""

import functools
import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Any, Callable, Optional

import click

from efx_donation.config import Settings
from efx_donation.errors import EfxError
from efx_donation.records import (
    instance_digest,
    load_allocation,
    load_instance,
    save,
    to_json,
)
from efx_donation.runner import (
    ALGORITHMS,
    CHECKS,
    GENERATORS,
    ORACLE_MODES,
    SEED_METHODS,
    ExperimentRunner,
)

logger = logging.getLogger("efx_donation")


def configure_logging(log_dir: str) -> None:
    """Attach the rotating file handler every efx_donation.* logger inherits.

    If the log dir does not exist, make it.
    """
    if any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
        return
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)
    logger.setLevel(logging.DEBUG)
    file_handler = RotatingFileHandler(
        os.path.join(log_dir, "efx_donation.log"), maxBytes=10_000_000, backupCount=3
    )
    file_handler.setLevel(logging.DEBUG)
    formatter = logging.Formatter("%(asctime)s %(name)s %(levelname)s[%(funcName)s]: %(message)s")
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)


def exits_on_error(command: Callable) -> Callable:
    """Turn package errors into their documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except EfxError as err:
            logger.error("%s: %s", type(err).__name__, err)
            click.echo(f"error: {err}", err=True)
            raise SystemExit(err.exit_code) from err

    return wrapper


def _emit(value: Any, out: Optional[str]) -> None:
    if out:
        save(value, out)
    else:
        click.echo(to_json(value), nl=False)


def _runner(ctx: click.Context, oracle_cap: Optional[int]) -> ExperimentRunner:
    return ExperimentRunner(ctx.obj, oracle_cap=oracle_cap)


oracle_cap_option = click.option(
    "--oracle-cap", type=click.IntRange(min=1), help="Override EFX_ORACLE_CAP."
)
out_option = click.option("--out", type=click.Path(dir_okay=False), help="Write here, not stdout.")


@click.group()
@click.pass_context
@exits_on_error
def cli(ctx: click.Context) -> None:
    """EFX allocations with donated items, from Nash-welfare seeds."""
    settings = Settings.from_env()
    configure_logging(settings.log_dir)
    ctx.obj = settings


@cli.command()
@click.argument("kind", type=click.Choice(GENERATORS))
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Number of agents.")
@click.option("--m", "m", type=click.IntRange(min=1), help="Number of items.")
@click.option("--eps", help="Rational parameter, e.g. 1/10.")
@click.option("--max-value", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--rng-seed", type=int, default=0, show_default=True)
@out_option
@click.pass_context
@exits_on_error
def generate(ctx, kind, n, m, eps, max_value, rng_seed, out) -> None:
    """Write a generated instance and print its digest."""
    inst = _runner(ctx, None).generate(kind, n, m, eps, max_value, rng_seed)
    _emit(inst, out)
    click.echo(f"sha256:{instance_digest(inst)}", err=not out)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", type=click.Choice(ALGORITHMS), default="alg1", show_default=True)
@click.option(
    "--seed-method", type=click.Choice(SEED_METHODS), default="oracle", show_default=True
)
@click.option("--seed-file", type=click.Path(exists=True, dir_okay=False))
@click.option("--delta", help="Algorithm 2 delta in (0, 1); defaults to 1/(2n+1).")
@click.option("--trace", is_flag=True, help="Record every round and print it to stderr.")
@oracle_cap_option
@out_option
@click.pass_context
@exits_on_error
def solve(ctx, instance, algorithm, seed_method, seed_file, delta, trace, oracle_cap, out):
    """Seed an allocation, donate items until it is EFX and report the outcome."""
    inst = load_instance(instance)
    seed_allocation = load_allocation(seed_file, inst.m) if seed_file else None
    runner = _runner(ctx, oracle_cap)
    report, run_trace = runner.solve(inst, algorithm, seed_method, seed_allocation, delta, trace)
    _emit(report, out)
    if trace:
        click.echo(runner.trace_table(run_trace), err=True)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.argument("allocation", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--check",
    "checks",
    type=click.Choice(CHECKS),
    multiple=True,
    default=("efx",),
    show_default=True,
)
@click.option("--eps", help="Large-market parameter.")
@click.option("--alpha-pow-n", help="Largest accepted (opt / NW)^n; defaults to 2^(n-1).")
@oracle_cap_option
@out_option
@click.pass_context
@exits_on_error
def verify(ctx, instance, allocation, checks, eps, alpha_pow_n, oracle_cap, out) -> None:
    """Run checkers on an allocation; exit 1 unless every check passes."""
    inst = load_instance(instance)
    a = load_allocation(allocation, inst.m)
    passed, report = _runner(ctx, oracle_cap).verify(inst, a, checks, eps, alpha_pow_n)
    _emit(report, out)
    if not passed:
        raise SystemExit(1)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(ORACLE_MODES), default="opt", show_default=True)
@click.option("--chunks", type=click.IntRange(min=1), default=1, show_default=True)
@oracle_cap_option
@out_option
@click.pass_context
@exits_on_error
def oracle(ctx, instance, mode, chunks, oracle_cap, out) -> None:
    """Brute-force the best Nash product, optionally among EFX allocations only."""
    inst = load_instance(instance)
    _emit(_runner(ctx, oracle_cap).oracle(inst, mode, chunks), out)


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.argument("allocation", type=click.Path(exists=True, dir_okay=False))
@out_option
@click.pass_context
@exits_on_error
def complete(ctx, instance, allocation, out) -> None:
    """Give every donated item back out by envy-cycle elimination."""
    inst = load_instance(instance)
    y = load_allocation(allocation, inst.m)
    _emit(_runner(ctx, None).complete(inst, y), out)


if __name__ == "__main__":
    cli()  # pylint: disable=no-value-for-parameter
