# =============================================================================
# runner/manager.py
# =============================================================================
# Purpose:
# Runs one ExperimentConfig end to end.
#
# - ExperimentManager: the abstract interface every runner implements
# - FileExperimentManager: dispatches on the experiment kind, writes the data
#   file and a manifest (<output stem>.manifest.json) holding the resolved
#   config, library versions and sha256 checksums of every output
#
# Outputs depend only on the config (seed included), so two runs of the same
# config produce byte-identical files on one platform.
# =============================================================================

import logging
import platform
from abc import ABC, abstractmethod
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np
import pydantic
import scipy

from cavity import fockspace
from cavity.filters import adiabatic_filter, build_filter, oracle_deviation
from cavity.measurement import (
    binomial_closed_form,
    brute_force_ensemble,
    ensemble_run,
    sample_trajectories,
)
from cavity.trapping import atoms_to_threshold, build_schedule, preparation_cost, run_schedule
from config import Config
from models.distribution import InitialFieldSpec, PhotonDistribution
from models.experiment import (
    ExperimentConfig,
    ExperimentKind,
    OutputFormat,
    RunResult,
    RunState,
    dump_config,
)
from models.pulse import AtomCase
from models.schedule import NoiseModel
from utilities import io

logger = logging.getLogger(__name__)

PACKAGE_NAME = "cavity-fock-filters"


def library_versions() -> Dict[str, str]:
    try:
        package_version = metadata.version(PACKAGE_NAME)
    except metadata.PackageNotFoundError:
        package_version = "unknown"
    return {
        PACKAGE_NAME: package_version,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def output_path(config: ExperimentConfig) -> Path:
    if config.output:
        return Path(config.output)
    Config.setup_output_dir()
    return Config.default_output_path(config.kind.value, config.format.value)


def manifest_path(output: Path) -> Path:
    return output.with_name(f"{output.stem}.manifest.json")


# -----------------------------------------------------------------------------
# ExperimentManager (abstract base class)
# -----------------------------------------------------------------------------

class ExperimentManager(ABC):
    """
    Interface for experiment runners.

    run() executes a validated config and reports the files it produced.
    Numeric failures propagate as CavityFockError subclasses.
    """

    @abstractmethod
    def run(self, config: ExperimentConfig) -> RunResult:
        pass


# -----------------------------------------------------------------------------
# FileExperimentManager
# -----------------------------------------------------------------------------

class FileExperimentManager(ExperimentManager):
    """Writes each experiment's data file plus its manifest."""

    def __init__(self):
        self.handlers: Dict[ExperimentKind, Callable[[ExperimentConfig, Path], Dict[str, Any]]] = {
            ExperimentKind.FILTER_DUMP: self._filter_dump,
            ExperimentKind.ENSEMBLE: self._ensemble,
            ExperimentKind.TRAJECTORIES: self._trajectories,
            ExperimentKind.BRUTE_FORCE: self._brute_force,
            ExperimentKind.BINOMIAL: self._binomial,
            ExperimentKind.TRAP_SCHEDULE: self._trap_schedule,
            ExperimentKind.VALIDATE_ORACLE: self._validate_oracle,
            ExperimentKind.SCALING: self._scaling,
        }

    def run(self, config: ExperimentConfig) -> RunResult:
        output = output_path(config)
        logger.info(f"Running {config.kind.value} experiment (seed={config.seed}) -> {output}")

        summary = self.handlers[config.kind](config, output)
        state = RunState.FAILED if summary.pop("failed", False) else RunState.COMPLETED

        manifest = manifest_path(output)
        io.write_json(
            manifest,
            {
                "config": dump_config(config),
                "state": state.value,
                "summary": summary,
                "versions": library_versions(),
                "outputs": [{"path": output.name, "sha256": io.sha256_file(output)}],
            },
        )
        logger.info(f"{config.kind.value} experiment {state.value}")
        return RunResult(state=state, outputs=[str(output)], manifest=str(manifest), summary=summary)

    # -------------------------------------------------------------------------
    # Shared setup
    # -------------------------------------------------------------------------
    @staticmethod
    def _initial(config: ExperimentConfig) -> PhotonDistribution:
        return fockspace.make_distribution(config.field, config.nmax)

    @staticmethod
    def _table_nmax(config: ExperimentConfig, d0: PhotonDistribution) -> int:
        # highest manifold m case (a) atoms can reach from d0
        return d0.nmax + config.m + 1

    # -------------------------------------------------------------------------
    # Experiment kinds
    # -------------------------------------------------------------------------
    def _filter_dump(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        nmax = config.nmax if config.nmax is not None else self._table_nmax(config, self._initial(config))
        table = build_filter(config.filter, nmax)
        if config.format is OutputFormat.JSON:
            io.write_json(output, table.model_dump(mode="json"))
        else:
            io.write_csv(output, ["n", "p_plus", "p_minus"], table.csv_rows())
        return {"nmax": table.nmax, "provenance": table.provenance.value}

    def _ensemble(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        d0 = self._initial(config)
        table = build_filter(config.filter, self._table_nmax(config, d0))
        history = ensemble_run(d0, table, config.case, config.m)
        kept = [m for m in range(config.m + 1) if m % config.stride == 0 or m == config.m]

        if config.format is OutputFormat.JSON:
            io.write_json(
                output,
                {"m": kept, "distributions": [history[m].probs.tolist() for m in kept]},
            )
        else:
            rows = ((m, n, float(p)) for m in kept for n, p in enumerate(history[m].probs))
            io.write_csv(output, ["m", "n", "probability"], rows)

        final = history[-1]
        return {
            "final_nmax": final.nmax,
            "final_mean": fockspace.mean_photon(final),
            "final_variance": fockspace.variance(final),
        }

    def _trajectories(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        d0 = self._initial(config)
        table = build_filter(config.filter, self._table_nmax(config, d0))
        trajectories = sample_trajectories(d0, table, config.case, config.m, config.count, config.seed)

        if config.format is OutputFormat.JSON:
            io.write_json_lines(
                output, ({"index": i, **t.to_record()} for i, t in enumerate(trajectories))
            )
        else:
            rows = (
                (i, t.sequence.label(), t.probability, fockspace.mean_photon(t.final), fockspace.variance(t.final))
                for i, t in enumerate(trajectories)
            )
            io.write_csv(output, ["index", "sequence", "probability", "mean", "variance"], rows)

        distinct = len({t.sequence.entries for t in trajectories})
        return {"count": len(trajectories), "distinct_sequences": distinct}

    def _brute_force(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        d0 = self._initial(config)
        table = build_filter(config.filter, self._table_nmax(config, d0))
        averaged = brute_force_ensemble(d0, table, config.case, config.m)
        recurrence = ensemble_run(d0, table, config.case, config.m)[-1]
        return self._write_comparison(config, output, "brute_force", averaged, "recurrence", recurrence)

    def _binomial(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        kappa = float(build_filter(config.filter, 1).p_plus[1])
        closed = binomial_closed_form(kappa, config.m)
        vacuum = fockspace.make_distribution(InitialFieldSpec.vacuum())
        recurrence = ensemble_run(vacuum, adiabatic_filter(kappa, config.m + 1), AtomCase.A, config.m)[-1]
        summary = self._write_comparison(config, output, "closed_form", closed, "recurrence", recurrence)
        summary["kappa"] = kappa
        summary["variance"] = fockspace.variance(closed)
        summary["expected_variance"] = config.m * kappa * (1.0 - kappa)
        return summary

    @staticmethod
    def _write_comparison(
        config: ExperimentConfig,
        output: Path,
        left_name: str,
        left: PhotonDistribution,
        right_name: str,
        right: PhotonDistribution,
    ) -> Dict[str, Any]:
        nmax = max(left.nmax, right.nmax)
        left, right = fockspace.pad(left, nmax), fockspace.pad(right, nmax)
        diff = np.abs(left.probs - right.probs)

        if config.format is OutputFormat.JSON:
            io.write_json(output, {left_name: left.probs.tolist(), right_name: right.probs.tolist()})
        else:
            rows = ((n, float(a), float(b), float(d)) for n, (a, b, d) in enumerate(zip(left.probs, right.probs, diff)))
            io.write_csv(output, ["n", left_name, right_name, "abs_diff"], rows)
        return {"max_abs_diff": float(diff.max())}

    def _trap_schedule(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        d0 = self._initial(config)
        curves = []
        for spec in config.schedules:
            schedule = build_schedule(spec, config.m)
            for sigma in config.noise_sigmas:
                series = run_schedule(
                    d0,
                    schedule,
                    config.case,
                    NoiseModel(relative_sigma=sigma, seed=config.seed),
                    config.target_n,
                    config.realizations if sigma > 0 else 1,
                )
                curves.append((f"{spec.kind}@{sigma:g}", spec, series))

        if config.format is OutputFormat.JSON:
            io.write_json(
                output,
                [
                    {"curve": label, "schedule": spec.model_dump(mode="json"), "series": series.model_dump(mode="json")}
                    for label, spec, series in curves
                ],
            )
        else:
            rows = ((label, *row) for label, _, series in curves for row in series.csv_rows())
            io.write_csv(output, ["curve", "m", "mean_probability", "stddev"], rows)

        return {
            "threshold": config.threshold,
            "atoms_to_threshold": {
                label: atoms_to_threshold(series.mean, config.threshold) for label, _, series in curves
            },
            "resampled": {label: series.resampled for label, _, series in curves},
        }

    def _validate_oracle(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        grid = config.oracle
        rows = oracle_deviation(
            grid.lambda1s, grid.lambda2s, grid.etas, grid.nmax, grid.window, grid.tol, grid.workers
        )
        header = ["lambda1", "lambda2", "eta", "n", "analytic", "numeric", "abs_diff"]
        if config.format is OutputFormat.JSON:
            io.write_json(output, [dict(zip(header, row)) for row in rows])
        else:
            io.write_csv(output, header, rows)

        worst = max((row[-1] for row in rows), default=0.0)
        failed = worst > Config.ORACLE_TOLERANCE
        if failed:
            logger.error(f"Oracle check failed: max |analytic - numeric| = {worst:.3e} > {Config.ORACLE_TOLERANCE}")
        return {"max_abs_diff": worst, "tolerance": Config.ORACLE_TOLERANCE, "failed": failed}

    def _scaling(self, config: ExperimentConfig, output: Path) -> Dict[str, Any]:
        d0 = self._initial(config)
        kinds = ("adiabatic", "fixed", "incrementing")
        rows = []
        for n_prime in config.n_primes:
            costs = [preparation_cost(d0, n_prime, kind, config.threshold, config.max_atoms) for kind in kinds]
            logger.debug(f"scaling: n'={n_prime} -> {dict(zip(kinds, costs))}")
            rows.append((n_prime, *costs))

        if config.format is OutputFormat.JSON:
            io.write_json(output, [dict(zip(("n_prime", *kinds), row)) for row in rows])
        else:
            io.write_csv(output, ["n_prime", *kinds], rows)
        return {"threshold": config.threshold, "max_atoms": config.max_atoms}
