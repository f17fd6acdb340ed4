#!/usr/bin/env python3
"""
mmWave Scheduling CLI Tool
Command-line interface for Monte Carlo scheduling experiments

Runs sum-rate sweeps of the scheduling algorithms over transmit power and
ADC resolution, tunes their orthogonality parameters, checks the rate
expressions against their closed forms and prints the quantizer table.

Examples:
    Reproduce the desk-scale power sweep and save it:
        $ mmwave-sched sweep --preset fig2-desk --out fig2.csv

    Custom grid with fewer trials:
        $ mmwave-sched sweep --rho-db=-10,0,10 --bits 1:4 --trials 50

    Run the fast verification checks:
        $ mmwave-sched verify

    Enable debug logging:
        $ mmwave-sched --log-level DEBUG sweep --trials 5
"""

import functools
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click
import pandas as pd
from loguru import logger
from rich.console import Console
from rich.table import Table

from mmwave_scheduling import __version__
from mmwave_scheduling.config import DEFAULT_CONFIG, LOG_LEVELS, Config
from mmwave_scheduling.exceptions import SchedulingToolsError
from mmwave_scheduling.harness import (
    PRESETS,
    emit_csv,
    run_sweep,
    summarize,
    tune_parameters,
)
from mmwave_scheduling.models import SchedulerId, SweepSpec
from mmwave_scheduling.quantize import TABLE_MAX_BITS, aqnm_params, high_resolution_beta
from mmwave_scheduling.utils import format_rate, parse_list
from mmwave_scheduling.verification import run_verification

# Exit codes
EXIT_CODE_SUCCESS = 0
EXIT_CODE_ERROR = 1
EXIT_CODE_INTERRUPT = 130  # Standard exit code for SIGINT

console = Console()


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    config: Optional[Config] = None,
) -> str:
    """
    Setup logging configuration

    Args:
        log_level: Logging level (overrides config and MMWAVE_LOG_LEVEL)
        log_file: Optional log file path

    Returns:
        The level in force
    """
    config = config or Config()
    level = (log_level or config.get("logging.level", "INFO")).upper()
    log_format = config.get("logging.format", DEFAULT_CONFIG["logging"]["format"])
    file_path = log_file or config.get("logging.file")

    logger.remove()
    logger.add(sys.stderr, level=level, format=log_format)

    if file_path:
        try:
            Path(file_path).parent.mkdir(parents=True, exist_ok=True)
            logger.add(file_path, level=level, format=log_format)
        except OSError as e:
            click.echo(f"Warning: Failed to setup file logging: {e}", err=True)

    return level


def _list_option(cast):
    """click callback turning "a,b,c" into a typed list"""

    def callback(ctx, param, value):
        try:
            return parse_list(value, cast)
        except ValueError as e:
            raise click.BadParameter(str(e)) from e

    return callback


def handle_errors(command):
    """Map library errors to exit code 1 and Ctrl+C to 130."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except KeyboardInterrupt:
            logger.info("Operation cancelled by user")
            console.print("\n[yellow]Operation cancelled by user.[/yellow]")
            sys.exit(EXIT_CODE_INTERRUPT)
        except (SchedulingToolsError, OSError) as e:
            logger.error(f"Command failed: {e}")
            console.print(f"[red]Error:[/red] {e}")
            sys.exit(EXIT_CODE_ERROR)

    return wrapper


def build_spec(
    config: Config,
    preset=None,
    rho_db=None,
    bits=None,
    trials=None,
    seed=None,
    algorithms=None,
    epsilon=None,
    n_ol=None,
) -> SweepSpec:
    """
    SweepSpec from the config file with command-line flags applied on top.

    Flags also override a preset's grids. An explicit N_OL replaces any
    per-resolution N_OL schedule, and an explicit epsilon or N_OL also
    replaces the matching per-algorithm value.
    """
    config.apply_overrides(
        {
            "sweep.preset": preset,
            "sweep.rho_db": rho_db,
            "sweep.bits": bits,
            "sweep.trials": trials,
            "sweep.seed": seed,
            "sweep.algorithms": algorithms,
            "system.ortho_threshold": epsilon,
            "system.beam_overlap_limit": n_ol,
        }
    )
    spec = config.to_sweep_spec()

    changes = {}
    if rho_db:
        changes["rho_db_grid"] = tuple(rho_db)
    if bits:
        changes["bits_grid"] = tuple(bits)
    if trials is not None:
        changes["trials"] = trials
    system_changes = {
        name: value
        for name, value in (("ortho_threshold", epsilon), ("beam_overlap_limit", n_ol))
        if value is not None
    }
    if system_changes:
        changes["base_config"] = replace(spec.base_config, **system_changes)
    if n_ol is not None:
        changes["n_ol_overrides"] = {}
    if system_changes and spec.algorithm_params:
        changes["algorithm_params"] = {
            algorithm: {k: v for k, v in params.items() if k not in system_changes}
            for algorithm, params in spec.algorithm_params.items()
        }
    return replace(spec, **changes) if changes else spec


def _label(algorithm: str) -> str:
    return SchedulerId.parse(algorithm).label


def create_summary_table(summary: pd.DataFrame) -> Table:
    """Create a table of mean sum rates per algorithm and grid point."""
    table = Table(title="Sweep summary", show_header=True)
    table.add_column("Algorithm", style="cyan")
    table.add_column("rho (dB)", justify="right")
    table.add_column("Bits", justify="right")
    table.add_column("Sum rate", justify="right")
    table.add_column("Std err", justify="right")
    table.add_column("Users", justify="right")
    table.add_column("vs random", justify="right")

    for record in summary.to_dict("records"):
        gain = record["gain_over_random"]
        if pd.isna(gain):
            gain_text = "-"
        else:
            color = "green" if gain >= 0 else "red"
            gain_text = f"[{color}]{gain:+.1%}[/{color}]"
        std_error = record["std_error"]
        table.add_row(
            _label(record["algorithm"]),
            f"{record['rho_db']:g}",
            str(record["bits"]),
            format_rate(record["mean_sum_rate"]),
            "-" if pd.isna(std_error) else f"{std_error:.3f}",
            f"{record['mean_selected']:.2f}",
            gain_text,
        )

    return table


def create_tune_table(table_data: pd.DataFrame) -> Table:
    """Create a table of mean sum rates per parameter setting."""
    table = Table(title="Parameter tuning", show_header=True)
    table.add_column("Algorithm", style="cyan")
    table.add_column("epsilon", justify="right")
    table.add_column("N_OL", justify="right")
    table.add_column("Sum rate", justify="right")
    table.add_column("Best")

    for record in table_data.to_dict("records"):
        table.add_row(
            _label(record["algorithm"]),
            "-" if pd.isna(record["epsilon"]) else f"{record['epsilon']:g}",
            "-" if pd.isna(record["n_ol"]) else str(int(record["n_ol"])),
            format_rate(record["mean_sum_rate"]),
            "[green]*[/green]" if record["best"] else "",
        )

    return table


def create_verification_table(results) -> Table:
    """Create a table of verification check outcomes."""
    table = Table(title="Verification", show_header=True)
    table.add_column("Check", style="cyan")
    table.add_column("Result")
    table.add_column("Time (s)", justify="right")
    table.add_column("Detail")

    for result in results:
        status = "[green]PASS[/green]" if result.passed else "[red]FAIL[/red]"
        table.add_row(result.name, status, f"{result.seconds:.1f}", result.detail)

    return table


def create_quantizer_table(max_bits: int) -> Table:
    """Create the distortion factor table for resolutions 1..max_bits."""
    table = Table(title="AQNM quantizer", show_header=True)
    table.add_column("Bits", justify="right", style="cyan")
    table.add_column("beta", justify="right")
    table.add_column("alpha", justify="right")
    table.add_column("Source")
    table.add_column("Formula beta", justify="right")

    for bits in range(1, max_bits + 1):
        params = aqnm_params(bits)
        source = "Lloyd-Max" if bits <= TABLE_MAX_BITS else "high-resolution"
        table.add_row(
            str(bits),
            f"{params.beta:.6g}",
            f"{params.alpha:.6g}",
            source,
            f"{high_resolution_beta(bits):.6g}",
        )

    return table


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    help="YAML configuration file",
)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    help="Logging level (default: from config, MMWAVE_LOG_LEVEL or INFO)",
)
@click.option("--log-file", type=click.Path(dir_okay=False), help="Also log to this file")
@click.version_option(__version__, prog_name="mmwave-sched")
@click.pass_context
def cli(ctx, config_path, log_level, log_file):
    """Uplink mmWave MU-MIMO scheduling with low-resolution ADCs."""
    try:
        config = Config(config_path)
    except SchedulingToolsError as e:
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(EXIT_CODE_ERROR)
    setup_logging(log_level=log_level, log_file=log_file, config=config)
    ctx.obj = config


@cli.command()
@click.option(
    "--preset",
    type=click.Choice(sorted(PRESETS), case_sensitive=False),
    help="Reference experiment preset",
)
@click.option("--rho-db", callback=_list_option(float), help="Transmit powers in dB, e.g. -10,0,10")
@click.option("--bits", callback=_list_option(int), help="ADC resolutions, e.g. 1,2,3 or 1:9")
@click.option("--trials", type=click.IntRange(min=1), help="Monte Carlo trials per grid point")
@click.option("--seed", type=click.IntRange(min=0), help="Master seed")
@click.option("--algorithms", callback=_list_option(str), help="Comma-separated scheduler ids")
@click.option("--epsilon", type=click.FloatRange(0.0, 1.0), help="Orthogonality threshold")
@click.option("--n-ol", type=click.IntRange(min=0), help="Beam overlap limit at every resolution")
@click.option("--workers", type=click.IntRange(min=1), help="Threads evaluating trials")
@click.option("--out", type=click.Path(dir_okay=False), help="Write per-trial rows to this CSV")
@click.option("--no-summary", is_flag=True, help="Skip the summary table")
@click.pass_obj
@handle_errors
def sweep(config, preset, rho_db, bits, trials, seed, algorithms, epsilon, n_ol, workers, out, no_summary):
    """Run a sum-rate sweep over transmit power and ADC resolution."""
    spec = build_spec(config, preset, rho_db, bits, trials, seed, algorithms, epsilon, n_ol)
    workers = workers or config.get("sweep.workers", 1)

    console.print(
        f"Running [cyan]{spec.name}[/cyan]: {spec.trials} trials, "
        f"{len(spec.grid_points())} grid points, {len(spec.algorithms)} algorithms"
    )
    result = run_sweep(spec, workers=workers)

    if out:
        emit_csv(result, out)
        console.print(f"[green]Wrote {len(result)} rows to {out}[/green]")
    if not no_summary:
        console.print(create_summary_table(summarize(result)))


@cli.command()
@click.option(
    "--preset",
    type=click.Choice(sorted(PRESETS), case_sensitive=False),
    help="Reference experiment preset",
)
@click.option("--epsilons", callback=_list_option(float), default="0.3,0.5,0.7,0.9", show_default=True)
@click.option("--n-ol-values", callback=_list_option(int), default="1,2,3,4", show_default=True)
@click.option("--trials", type=click.IntRange(min=1), help="Monte Carlo trials per setting")
@click.option("--seed", type=click.IntRange(min=0), help="Master seed")
@click.pass_obj
@handle_errors
def tune(config, preset, epsilons, n_ol_values, trials, seed):
    """Grid-search epsilon and N_OL for CSS, SUS and beam selection."""
    spec = build_spec(config, preset=preset, trials=trials, seed=seed)
    table_data = tune_parameters(
        spec, epsilons, n_ol_values, workers=config.get("sweep.workers", 1)
    )
    console.print(create_tune_table(table_data))


@cli.command()
@click.option("--full", is_flag=True, help="Also run the sweep-based trend checks (minutes)")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.pass_obj
@handle_errors
def verify(config, full, seed):
    """Check rate expressions and schedulers against closed forms and the oracle."""
    results = run_verification(full=full, seed=seed)
    console.print(create_verification_table(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        console.print(f"[red]{len(failed)} check(s) failed[/red]")
        sys.exit(EXIT_CODE_ERROR)
    console.print(f"[green]All {len(results)} checks passed[/green]")


@cli.command("quantizer-table")
@click.option("--max-bits", type=click.IntRange(min=1), default=9, show_default=True)
@handle_errors
def quantizer_table(max_bits):
    """Print the distortion factor beta and gain alpha per ADC resolution."""
    console.print(create_quantizer_table(max_bits))


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
