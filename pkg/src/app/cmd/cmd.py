# =============================================================================
# cmd.py
# =============================================================================
# Purpose:
# Command-line front end. Every subcommand builds an ExperimentConfig from an
# optional JSON config file plus command-line overrides, runs it through the
# FileExperimentManager and prints the summary.
#
# Exit status:
#   0  success
#   1  numeric error (truncation, propagation, normalization, ...)
#   2  invalid configuration
#   3  validation ran but its check failed (validate-oracle)
#
# Failures are printed to stderr as a JSON error report {code, message, data}.
# =============================================================================

import json
import logging
from typing import Any, Dict

import click

from models.errors import CavityFockError, ConfigError
from models.experiment import ExperimentConfig, ExperimentKind, RunState, parse_config_data
from runner.manager import FileExperimentManager
from utilities import io
from utilities.presets import PresetRegistry

logger = logging.getLogger(__name__)

EXIT_NUMERIC_ERROR = 1
EXIT_CONFIG_ERROR = 2
EXIT_VALIDATION_FAILED = 3


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


# -----------------------------------------------------------------------------
# Shared options and config assembly
# -----------------------------------------------------------------------------

def experiment_options(func=None, *, atoms: bool = True):
    """Options every experiment subcommand accepts; atoms=False drops -m/--atoms."""
    if func is None:
        return lambda f: experiment_options(f, atoms=atoms)
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="JSON experiment config; command-line options override it"),
        click.option("--seed", type=int, default=None, help="Random seed (default 0)"),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Output file (default: <output dir>/<kind>.<format>)"),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
                     help="Output format"),
    ]
    if atoms:
        options.append(click.option("-m", "--atoms", type=int, default=None, help="Number of atoms"))
    options.append(click.option("--nmax", type=int, default=None, help="Photon-number cutoff"))
    for option in reversed(options):
        func = option(func)
    return func


def _overrides(**values: Any) -> Dict[str, Any]:
    names = {"seed": "seed", "out": "output", "fmt": "format", "atoms": "m", "nmax": "nmax",
             "count": "count", "realizations": "realizations"}
    return {names[key]: value for key, value in values.items() if value is not None}


def _read_config_file(path: str) -> Dict[str, Any]:
    with open(path, "r") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}", path=path) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object", path=path)
    return data


def _merge(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    # nested objects (the oracle grid) are merged key by key
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            _merge(data[key], value)
        else:
            data[key] = value
    return data


def load_config(kind: ExperimentKind, config_path: str | None, overrides: Dict[str, Any]) -> ExperimentConfig:
    data = _read_config_file(config_path) if config_path else {}
    if data.get("kind", kind.value) != kind.value:
        raise ConfigError(
            f"config file describes a '{data['kind']}' experiment, not '{kind.value}'",
            kind=data["kind"],
        )
    data["kind"] = kind.value
    return parse_config_data(_merge(data, overrides))


def _report_failure(ctx: click.Context, error: CavityFockError) -> None:
    logger.error(f"{type(error).__name__}: {error.message}")
    click.echo(error.to_report().model_dump_json(), err=True)
    ctx.exit(EXIT_CONFIG_ERROR if isinstance(error, ConfigError) else EXIT_NUMERIC_ERROR)


def _execute(ctx: click.Context, build) -> None:
    try:
        config = build()
        result = FileExperimentManager().run(config)
    except CavityFockError as e:
        _report_failure(ctx, e)
        return

    for path in result.outputs:
        click.echo(f"Wrote {path}")
    click.echo(f"Manifest {result.manifest}")
    click.echo(io.dumps_json(result.summary), nl=False)
    if result.state is RunState.FAILED:
        ctx.exit(EXIT_VALIDATION_FAILED)


def _experiment(ctx: click.Context, kind: ExperimentKind, config_path: str | None, **values: Any) -> None:
    _execute(ctx, lambda: load_config(kind, config_path, _overrides(**values)))


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------

@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log per-step debug messages")
def cli(verbose: bool):
    """Cavity Fock-state preparation by passing atoms."""
    configure_logging(verbose)


@cli.command("filter")
@experiment_options
@click.pass_context
def filter_command(ctx, config_path, **values):
    """Tabulate a filter function over n = 0..nmax."""
    _experiment(ctx, ExperimentKind.FILTER_DUMP, config_path, **values)


@cli.command()
@experiment_options
@click.pass_context
def ensemble(ctx, config_path, **values):
    """Nonselective evolution of the photon distribution over m atoms."""
    _experiment(ctx, ExperimentKind.ENSEMBLE, config_path, **values)


@cli.command()
@experiment_options
@click.option("--count", type=int, default=None, help="Number of sampled trajectories")
@click.pass_context
def trajectories(ctx, config_path, **values):
    """Sample selective measurement records."""
    _experiment(ctx, ExperimentKind.TRAJECTORIES, config_path, **values)


@cli.command("brute-force")
@experiment_options
@click.pass_context
def brute_force(ctx, config_path, **values):
    """Average every outcome branch and compare with the recurrence."""
    _experiment(ctx, ExperimentKind.BRUTE_FORCE, config_path, **values)


@cli.command()
@experiment_options
@click.pass_context
def binomial(ctx, config_path, **values):
    """Adiabatic binomial law against the recurrence."""
    _experiment(ctx, ExperimentKind.BINOMIAL, config_path, **values)


@cli.command("trap-schedule")
@experiment_options
@click.option("--realizations", type=int, default=None, help="Noise realizations per noisy curve")
@click.pass_context
def trap_schedule(ctx, config_path, **values):
    """Build a Fock state with a velocity schedule of trapping atoms."""
    _experiment(ctx, ExperimentKind.TRAP_SCHEDULE, config_path, **values)


@cli.command()
@experiment_options(atoms=False)
@click.pass_context
def validate(ctx, config_path, nmax, **values):
    """Compare the closed-form filter with direct integration."""
    overrides = _overrides(**values)
    if nmax is not None:
        overrides["oracle"] = {"nmax": nmax}
    _execute(ctx, lambda: load_config(ExperimentKind.VALIDATE_ORACLE, config_path, overrides))


@cli.command()
@experiment_options
@click.pass_context
def scaling(ctx, config_path, **values):
    """Atoms needed to reach a Fock state, per preparation method."""
    _experiment(ctx, ExperimentKind.SCALING, config_path, **values)


@cli.command()
@click.argument("name")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Output format")
@click.option("-m", "--atoms", type=int, default=None, help="Number of atoms")
@click.option("--realizations", type=int, default=None, help="Noise realizations per noisy curve")
@click.pass_context
def preset(ctx, name, **values):
    """Run a named preset (fig1, fig2)."""
    _execute(ctx, lambda: PresetRegistry().get(name, _overrides(**values)))


if __name__ == "__main__":
    cli()
