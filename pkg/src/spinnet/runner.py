"""Experiment driver: parallel trajectory ensembles, CSV series, manifests.

Trajectory i of run r is seeded from SeedSequence(master, spawn_key=(r, 0, i)),
so every trajectory is reproducible in isolation and results cannot depend
on which worker computed it.  Workers accumulate contiguous index ranges
and the main process merges them in order; the dyadic accumulator makes the
merged sums identical for every worker count, hence byte-identical CSVs.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, observables
from .config import ExperimentConfig
from .dynamics import propagate_sequence, run_trajectory
from .graphs import EnsembleSpec
from .moments import EnsembleAccumulator, EnsembleMoments
from .oracles import (
    build_exact_maps,
    exact_moment_series,
    fullspace_evolve,
    embed_excitation_state,
    reduced_pair_full,
    reduced_qubit_full,
    subspace_reduced_pair,
    subspace_reduced_qubit,
)

__all__ = [
    "CSV_HEADER",
    "RunUnit",
    "compute_ensemble",
    "expand_runs",
    "oracle_check",
    "run_experiment",
    "worker_count_from_env",
    "write_csv",
]

CSV_HEADER = [
    "k", "t",
    "fbar", "fbar_se",
    "s1", "s1_se",
    "c12", "c12_se",
    "c13", "c13_se",
    "c34", "c34_se",
    "s12", "s12_se",
]

WORKERS_ENV = "SPINNET_WORKERS"


class ConfigGuardError(ValueError):
    """A resource guard rejected the configuration."""


def worker_count_from_env(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{WORKERS_ENV} must be at least 1, got {value}")
    return value


@dataclass(frozen=True)
class RunUnit:
    """One (nodes, ensemble parameter) combination of an experiment."""

    index: int
    label: str
    spec: EnsembleSpec


def expand_runs(cfg: ExperimentConfig) -> list[RunUnit]:
    units = []
    values = cfg.xi if cfg.ensemble == "gilbert" else cfg.temperature
    for n in cfg.nodes:
        for value in values:
            if cfg.ensemble == "gilbert":
                spec = EnsembleSpec("gilbert", n, xi=value)
                label = f"N{n}_xi{value:g}"
            else:
                spec = EnsembleSpec("thermal", n, temperature=value)
                label = f"N{n}_T{value:g}"
            units.append(RunUnit(len(units), label, spec))
    return units


def _trajectory_rng(master_seed: int, run_index: int, traj_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(run_index, 0, traj_index))
    )


def _accumulate_range(spec, dt, n_steps, coupling_scale, master_seed, run_index,
                      lo, hi, retain) -> EnsembleAccumulator:
    acc = EnsembleAccumulator(
        n_steps, min(4, spec.n_nodes), retain_records=retain, start_index=lo
    )
    for i in range(lo, hi):
        tm = run_trajectory(
            spec, dt, n_steps, coupling_scale, rng=_trajectory_rng(master_seed, run_index, i)
        )
        acc.add(tm)
    return acc


def _worker(payload):
    return _accumulate_range(*payload)


def compute_ensemble(
    spec: EnsembleSpec,
    dt: float,
    n_steps: int,
    coupling_scale: float,
    master_seed: int,
    n_realizations: int,
    run_index: int = 0,
    retain_records: bool = False,
    workers: int = 1,
) -> EnsembleMoments:
    """Ensemble moments over ``n_realizations`` independent trajectories."""
    workers = max(1, min(workers, n_realizations))
    if workers == 1:
        acc = _accumulate_range(
            spec, dt, n_steps, coupling_scale, master_seed, run_index,
            0, n_realizations, retain_records,
        )
        return acc.finalize()

    bounds = np.linspace(0, n_realizations, workers + 1, dtype=int)
    payloads = [
        (spec, dt, n_steps, coupling_scale, master_seed, run_index,
         int(bounds[w]), int(bounds[w + 1]), retain_records)
        for w in range(workers)
        if bounds[w] < bounds[w + 1]
    ]
    with ProcessPoolExecutor(max_workers=len(payloads)) as pool:
        parts = list(pool.map(_worker, payloads))
    acc = parts[0]
    for part in parts[1:]:
        acc.merge(part)
    return acc.finalize()


def _format_value(x) -> str:
    return repr(float(x))


def write_csv(path, series_obj: observables.ObservableSeries, dt: float):
    """Write the fixed 14-column schema; absent values become empty fields."""
    lines = [",".join(CSV_HEADER)]
    n_rows = series_obj.t.shape[0]
    for k in range(n_rows):
        row = [str(k), _format_value(k * dt)]
        for name in observables.OBSERVABLE_COLUMNS:
            col = series_obj.column(name)
            row.append(_format_value(col[k]) if col is not None else "")
            se = series_obj.se.get(name)
            row.append(_format_value(se[k]) if se is not None else "")
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _manifest_lines(cfg: ExperimentConfig, meta: dict) -> list[str]:
    def fmt(value):
        if isinstance(value, tuple):
            return ",".join(str(v) for v in value)
        return str(value)

    lines = [f"{key} = {fmt(getattr(cfg, key))}" for key in (
        "nodes", "ensemble", "xi", "temperature", "dt", "steps", "realizations",
        "seed", "coupling_scale", "observables", "bootstrap", "out",
    )]
    lines.extend(f"meta.{key} = {value}" for key, value in meta.items())
    return lines


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[str]:
    """Run every unit of the experiment; write one CSV each plus a manifest.

    Returns the CSV paths.  Raises ConfigError for invalid configuration,
    OSError for filesystem trouble and IntegrityError if an observable
    leaves its admissible range.
    """
    cfg.validate()
    if workers is None:
        workers = worker_count_from_env()
    t_start = time.monotonic()
    os.makedirs(cfg.out, exist_ok=True)
    columns = cfg.columns()
    csv_paths = []
    meta = {"version": __version__, "workers": workers}
    for unit in expand_runs(cfg):
        mom = compute_ensemble(
            unit.spec, cfg.dt, cfg.steps, cfg.coupling_scale, cfg.seed,
            cfg.realizations, run_index=unit.index,
            retain_records=cfg.bootstrap > 0, workers=workers,
        )
        ser = observables.series(mom, cfg.dt, columns=columns)
        if cfg.bootstrap > 0 and cfg.realizations >= 2:
            se_seed = np.random.SeedSequence(cfg.seed, spawn_key=(unit.index, 1))
            ser.se = observables.bootstrap_standard_errors(
                mom, cfg.bootstrap, se_seed, columns=columns
            )
        path = os.path.join(cfg.out, f"{unit.label}.csv")
        write_csv(path, ser, cfg.dt)
        csv_paths.append(path)
        meta[f"csv.{unit.label}"] = os.path.basename(path)
    meta["wall_time_s"] = f"{time.monotonic() - t_start:.3f}"
    manifest_path = os.path.join(cfg.out, "manifest.txt")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(_manifest_lines(cfg, meta)) + "\n")
    return csv_paths


@dataclass
class OracleCheck:
    name: str
    measured: float
    bound: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: measured {self.measured:.3e}, bound {self.bound:.3e}"


_ORACLE_MAX_NODES = 6


def oracle_check(cfg: ExperimentConfig, workers: int | None = None) -> list[OracleCheck]:
    """Cross-validate the Monte Carlo path against both exact engines.

    Restricted to configurations with at most 6 nodes.  Compares ensemble
    means against the exact moment-map powers (within 4 bootstrap standard
    errors per step) and per-trajectory reduced states against the full
    2^N evolution (within 1e-10).
    """
    cfg.validate()
    for n in cfg.nodes:
        if n > _ORACLE_MAX_NODES:
            raise ConfigGuardError(
                f"oracle check supports at most {_ORACLE_MAX_NODES} nodes, got {n}"
            )
    if workers is None:
        workers = worker_count_from_env()
    checks = []
    n_steps = min(cfg.steps, 20)
    for unit in expand_runs(cfg):
        mom = compute_ensemble(
            unit.spec, cfg.dt, n_steps, cfg.coupling_scale, cfg.seed,
            cfg.realizations, run_index=unit.index, retain_records=True, workers=workers,
        )
        columns = ("fbar", "s1", "c12", "s12") if unit.spec.n_nodes < 4 else None
        mc = observables.series(mom, cfg.dt, columns=columns)
        se = observables.bootstrap_standard_errors(
            mom, 200, np.random.SeedSequence(cfg.seed, spawn_key=(unit.index, 1)),
            columns=columns,
        )
        maps = build_exact_maps(unit.spec, cfg.dt, cfg.coupling_scale)
        exact = observables.series(exact_moment_series(maps, n_steps), cfg.dt, columns=columns)
        for name in se:
            dev = np.abs(mc.column(name) - exact.column(name))
            tol = np.where(se[name] > 0.0, 4.0 * se[name], 1e-12)
            fraction = float(np.mean(dev <= tol))
            checks.append(OracleCheck(
                f"{unit.label} {name} within 4 SE of exact maps (fraction of steps)",
                fraction, 0.95, fraction >= 0.95,
            ))
        checks.append(_fullspace_check(unit, cfg))
    return checks


def _fullspace_check(unit: RunUnit, cfg: ExperimentConfig) -> OracleCheck:
    spec = unit.spec
    n = spec.n_nodes
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(unit.index, 2)))
    worst = 0.0
    bell = np.zeros(n, dtype=complex)
    bell[:2] = 1.0 / np.sqrt(2.0)
    single = np.zeros(n, dtype=complex)
    theta, phi = 1.1, 0.7
    c0 = np.cos(theta / 2.0)
    single[0] = np.exp(1j * phi) * np.sin(theta / 2.0)
    for _ in range(5):
        graphs = [spec.sample(rng) for _ in range(10)]
        props = propagate_sequence(graphs, cfg.dt, cfg.coupling_scale)
        for c_vac, amps0 in ((0.0, bell), (c0, single)):
            psi = embed_excitation_state(c_vac, amps0)
            for step, prop in enumerate(props[1:], start=1):
                psi = fullspace_evolve([graphs[step - 1]], psi, cfg.dt, cfg.coupling_scale)
                amps = prop.matrix @ amps0
                worst = max(worst, float(np.max(np.abs(
                    reduced_qubit_full(psi, 1, n) - subspace_reduced_qubit(c_vac, amps)
                ))))
                worst = max(worst, float(np.max(np.abs(
                    reduced_pair_full(psi, (1, 2), n) - subspace_reduced_pair(c_vac, amps, (1, 2))
                ))))
    return OracleCheck(
        f"{unit.label} one-excitation vs full-space reduced states (max deviation)",
        worst, 1e-10, worst < 1e-10,
    )
