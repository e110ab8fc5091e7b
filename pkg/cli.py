"""
Command-line interface for the sparse confidence set toolkit.

Subcommands: thresholds, bounds, construct, simulate, sensitivity,
cardinality and sample. Exit codes: 0 on success, 2 on invalid input,
3 when a construction is infeasible at the given SNR and --force is absent.
"""

import logging
import math
import shlex
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config.settings import BoundDefaults, ExperimentDefaults, OutputConfig, configure_logging, settings
from inference.bounds import (
    lb_length_floor,
    lb_noncoverage_G,
    lb_noncoverage_G_two_sided,
    lb_support_escape_one_sided,
    lb_support_escape_two_sided,
    minimax_noncoverage,
    thresholds as threshold_report,
)
from inference.errors import InfeasibleError, SparseCIError
from inference.intervals import MethodTag, make_procedure
from inference.model import ProblemParams, SignPattern
from simulation.harness import (
    DEFAULT_METHODS,
    ExperimentSpec,
    cardinality_trace,
    default_alpha_prime_grid,
    default_snr_grid,
    run_experiment,
    run_sensitivity,
)
from simulation.reporting import (
    interval_frame,
    read_interval_csv,
    read_observation_csv,
    write_interval_csv,
    write_summary,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3

# Methods whose construction needs declared (s, a)
_NEEDS_DECLARED = {MethodTag.HAT, MethodTag.BAR, MethodTag.TWO_SIDED_HAT, MethodTag.TWO_SIDED_BAR}


class _ErrorMappingGroup(click.Group):
    """Maps package errors onto the documented exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except InfeasibleError as exc:
            click.echo(f"infeasible: {exc}", err=True)
            ctx.exit(EXIT_INFEASIBLE)
        except (SparseCIError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_VALIDATION)


def _level_options(func):
    """sigma, alpha, alpha', delta with the reference defaults."""
    options = [
        click.option("--sigma", type=float, default=ExperimentDefaults.SIGMA, show_default=True),
        click.option("--alpha", type=float, default=ExperimentDefaults.ALPHA, show_default=True),
        click.option("--alpha-prime", "alpha_prime", type=float, default=ExperimentDefaults.ALPHA_PRIME,
                     show_default=True),
        click.option("--delta", type=float, default=ExperimentDefaults.DELTA, show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _grid_options(func):
    options = [
        click.option("--d", "d", type=int, default=ExperimentDefaults.D, show_default=True),
        click.option("--s", "s", type=int, default=ExperimentDefaults.S, show_default=True),
        click.option("--snr", "snrs", type=float, multiple=True, help="SNR grid point (repeatable)."),
        click.option("--methods", "methods", type=click.Choice([m.value for m in MethodTag]), multiple=True),
        click.option("--reps", type=int, default=ExperimentDefaults.REPS, show_default=True),
        click.option("--seed", type=int, default=ExperimentDefaults.SEED, show_default=True),
        click.option("--sign-pattern", type=click.Choice([p.value for p in SignPattern]),
                     default=SignPattern.ALL_POSITIVE.value, show_default=True),
        click.option("--force", is_flag=True, help="Run constructions below their feasibility cutoff."),
        click.option("--threads", type=click.IntRange(min=1), default=None, envvar="SPARSECI_THREADS",
                     help="Worker count (default: all logical cores)."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _params(d: int, s: int, a: float, sigma: float, alpha: float, alpha_prime: float, delta: float) -> ProblemParams:
    return ProblemParams(d=d, s=s, a=a, sigma=sigma, alpha=alpha, alpha_prime=alpha_prime, delta=delta)


def _spec(d, s, sigma, alpha, alpha_prime, delta, snrs, methods, reps, seed, sign_pattern, force,
          alpha_primes=None, default_methods=DEFAULT_METHODS, default_snrs=None) -> ExperimentSpec:
    grid = tuple(sorted(snrs)) if snrs else (default_snrs or default_snr_grid())
    params = _params(d, s, grid[0] * sigma, sigma, alpha, alpha_prime, delta)
    return ExperimentSpec(
        params=params,
        snr_grid=grid,
        methods=tuple(MethodTag(m) for m in methods) or default_methods,
        reps=reps,
        seed=seed,
        alpha_prime_grid=tuple(alpha_primes) if alpha_primes else None,
        sign_pattern=SignPattern(sign_pattern),
        force=force,
    )


def _command_line() -> str:
    return " ".join(shlex.quote(a) for a in sys.argv)


def _fmt(value: Optional[float], digits: int = 6) -> str:
    return "undefined" if value is None else f"{value:.{digits}f}"


# ===== Command group =====

@click.group(cls=_ErrorMappingGroup)
@click.option("--log-level", default=None, help="Overrides LOG_LEVEL.")
def cli(log_level: Optional[str]):
    """Sparse confidence sets for the Gaussian sequence model."""
    configure_logging(log_level)


@cli.command()
@click.option("--d", "d", type=int, required=True)
@click.option("--s", "s", type=int, required=True)
@click.option("--a", "a", type=float, required=True)
@_level_options
@click.option("--c-s", "c_s", type=float, default=None, help="Default: log(s + 1).")
@click.option("--c-prime", "c_prime", type=float, default=BoundDefaults.C_PRIME, show_default=True)
def thresholds(d, s, a, sigma, alpha, alpha_prime, delta, c_s, c_prime):
    """Print every SNR cutoff and the regime of a/sigma."""
    report = threshold_report(_params(d, s, a, sigma, alpha, alpha_prime, delta), c_s=c_s, c_prime=c_prime)
    click.echo(f"snr = {_fmt(report.snr)}")
    click.echo(f"c_s = {_fmt(report.c_s)}")
    for name, value in report.cutoffs().items():
        click.echo(f"{name} = {_fmt(value)}")
    click.echo(f"one_sided_hat_region = {report.one_sided_hat_region.value}")
    click.echo(f"one_sided_bar_region = {report.one_sided_bar_region.value}")
    click.echo(f"two_sided_hat_region = {report.two_sided_hat_region.value}")
    click.echo(f"two_sided_bar_region = {report.two_sided_bar_region.value}")
    click.echo(f"one_sided_provably_infeasible = {str(report.one_sided_provably_infeasible).lower()}")
    click.echo(f"two_sided_provably_infeasible = {str(report.two_sided_provably_infeasible).lower()}")


@cli.command()
@click.option("--kind", type=click.Choice(["thm1", "thm4", "thm6", "thm8", "cor3"]), required=True)
@click.option("--d", "d", type=int, default=ExperimentDefaults.D, show_default=True)
@click.option("--s", "s", type=int, default=ExperimentDefaults.S, show_default=True)
@click.option("--a", "a", type=float, default=None, help="Minimum signal (thm1/thm6 and --sweep).")
@_level_options
@click.option("--dim", type=int, default=None, help="Dimension argument of G (default: d).")
@click.option("--A", "A", type=int, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--m", "m", type=float, default=None, help="Length criterion bound.")
@click.option("--W", "W", type=float, default=None, help="Slack for the length floor.")
@click.option("--sweep", is_flag=True, help="Maximize over (A, rho) and (B, rho).")
def bounds(kind, d, s, a, sigma, alpha, alpha_prime, delta, dim, A, rho, m, W, sweep):
    """Evaluate a minimax lower bound; prints "name,value,inputs"."""

    def need(**named):
        missing = [k for k, v in named.items() if v is None]
        if missing:
            raise click.UsageError(f"--kind {kind} needs " + ", ".join(f"--{k}" for k in missing))

    dim = d if dim is None else dim
    if kind in ("thm1", "thm6") or sweep:
        need(a=a)
        params = _params(d, s, a, sigma, alpha, alpha_prime, delta)

    if kind == "thm1":
        values = [lb_support_escape_one_sided(params)]
    elif kind == "thm6":
        values = [lb_support_escape_two_sided(params)]
    elif kind == "cor3":
        need(A=A, W=W)
        values = [lb_length_floor(dim, A, W, sigma)]
    elif sweep:
        need(m=m)
        result = minimax_noncoverage(params, m, two_sided=(kind == "thm8"))
        values = [v for v in (result.escape, result.dim_term, result.sparsity_term) if v is not None]
        click.echo(f"max,{result.value:.9g},m={m:.9g}")
    else:
        need(A=A, rho=rho, m=m)
        evaluate = lb_noncoverage_G_two_sided if kind == "thm8" else lb_noncoverage_G
        values = [evaluate(dim, A, rho, m, sigma)]

    for value in values:
        row = value.to_row()
        click.echo(f"{row['name']},{row['value']},{row['inputs']}")


@cli.command()
@click.option("--method", type=click.Choice([m.value for m in MethodTag]), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Interval CSV (default: stdout).")
@click.option("--declared-s", "declared_s", type=int, default=None)
@click.option("--declared-a", "declared_a", type=float, default=None)
@click.option("--support", default=None, help="Comma-separated true support (oracle only).")
@_level_options
@click.option("--force", is_flag=True)
@click.option("--no-half-sparse", "no_half_sparse", is_flag=True, help="Adaptive set without assuming 2s <= d.")
def construct(method, input_path, output_path, declared_s, declared_a, support, sigma, alpha, alpha_prime, delta,
              force, no_half_sparse):
    """Build a sparse confidence set from an observation CSV ("j,x")."""
    method = MethodTag(method)
    obs = read_observation_csv(input_path, sigma)

    if method in _NEEDS_DECLARED and (declared_s is None or declared_a is None):
        raise click.UsageError(f"--method {method.value} needs --declared-s and --declared-a")
    if method == MethodTag.ORACLE and not support:
        raise click.UsageError("--method oracle needs --support")

    params = _params(obs.d, declared_s or 1, declared_a or sigma, sigma, alpha, alpha_prime, delta)
    support_idx = np.array([int(v) for v in support.split(",")]) if support else None
    procedure = make_procedure(method, params, support=support_idx, force=force,
                               assume_half_sparse=not no_half_sparse)
    conf_set = procedure.build(obs)
    for warning in conf_set.warnings:
        click.echo(f"warning: {warning}", err=True)

    if output_path is None:
        click.echo(interval_frame(conf_set).to_csv(index=False, float_format=OutputConfig.FLOAT_FORMAT), nl=False)
    else:
        write_interval_csv(conf_set, output_path)
        read_interval_csv(output_path)
        click.echo(f"selected {conf_set.size} of {conf_set.d}; wrote {output_path}", err=True)


def _finish(summary, out: Optional[Path], default_name: str) -> None:
    path = out or settings.results_dir / default_name
    write_summary(summary, path, command=_command_line())
    click.echo(f"wrote {path}")


@cli.command()
@_grid_options
@_level_options
def simulate(d, s, snrs, methods, reps, seed, sign_pattern, force, threads, out, sigma, alpha, alpha_prime, delta):
    """Coverage, support distance and |S| over an SNR grid."""
    spec = _spec(d, s, sigma, alpha, alpha_prime, delta, snrs, methods, reps, seed, sign_pattern, force)
    _finish(run_experiment(spec, n_jobs=threads), out, "simulate.csv")


@cli.command()
@_grid_options
@_level_options
@click.option("--alpha-primes", "alpha_primes", type=float, multiple=True, help="alpha' grid point (repeatable).")
def sensitivity(d, s, snrs, methods, reps, seed, sign_pattern, force, threads, out, sigma, alpha, alpha_prime,
                delta, alpha_primes):
    """Sweep alpha' at fixed SNR values (default 3.8 and 9).

    Points below a feasibility cutoff are always forced; those rows keep
    infeasible=1 and the sidecar records force=true.
    """
    spec = _spec(d, s, sigma, alpha, alpha_prime, delta, snrs, methods, reps, seed, sign_pattern, True,
                 alpha_primes=alpha_primes or default_alpha_prime_grid(alpha),
                 default_methods=(MethodTag.HAT, MethodTag.BAR),
                 default_snrs=ExperimentDefaults.SENSITIVITY_SNRS)
    _finish(run_sensitivity(spec, n_jobs=threads), out, "sensitivity.csv")


@cli.command()
@_grid_options
@_level_options
def cardinality(d, s, snrs, methods, reps, seed, sign_pattern, force, threads, out, sigma, alpha, alpha_prime, delta):
    """Mean |S| per SNR for the selector-based methods."""
    spec = _spec(d, s, sigma, alpha, alpha_prime, delta, snrs, methods, reps, seed, sign_pattern, force)
    _finish(cardinality_trace(spec, n_jobs=threads), out, "cardinality.csv")


@cli.command()
@click.option("--d", "d", type=int, default=ExperimentDefaults.D, show_default=True)
@click.option("--s", "s", type=int, default=ExperimentDefaults.S, show_default=True)
@click.option("--snr", type=float, default=5.0, show_default=True)
@click.option("--sigma", type=float, default=ExperimentDefaults.SIGMA, show_default=True)
@click.option("--sign-pattern", type=click.Choice([p.value for p in SignPattern]),
              default=SignPattern.ALL_POSITIVE.value, show_default=True)
@click.option("--seed", type=int, default=ExperimentDefaults.SEED, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--theta-out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def sample(d, s, snr, sigma, sign_pattern, seed, out, theta_out):
    """Write a seeded spike-design observation CSV."""
    from data.generate_data import generate_observation, save_sample

    if not (math.isfinite(snr) and snr > 0):
        raise click.BadParameter("snr must be positive", param_hint="--snr")
    theta, obs = generate_observation(d, s, snr, sigma, SignPattern(sign_pattern), seed)
    save_sample(out, theta, obs, theta_out)
    click.echo(f"wrote {out}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="sparseci", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        return 1
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
