"""Experiment configuration: defaults, presets, key-value files, validation."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "OBSERVABLE_NAMES",
    "PRESETS",
    "parse_config_text",
]

OBSERVABLE_NAMES = ("fidelity", "entropy1", "conc12", "conc13", "conc34", "entropy12")

# config observable name -> series column name
OBSERVABLE_TO_COLUMN = {
    "fidelity": "fbar",
    "entropy1": "s1",
    "conc12": "c12",
    "conc13": "c13",
    "conc34": "c34",
    "entropy12": "s12",
}

_PAIR_OBSERVABLES = ("conc13", "conc34", "entropy12")


class ConfigError(ValueError):
    """Invalid configuration; carries the offending parameter name."""

    def __init__(self, parameter: str, message: str):
        super().__init__(f"{parameter}: {message}")
        self.parameter = parameter


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an ensemble sweep over nodes x parameter values.

    ``nodes`` and the ensemble parameter (``xi`` or ``temperature``) may
    hold several values; the runner executes the cross product and writes
    one CSV per combination.
    """

    nodes: tuple[int, ...] = (32,)
    ensemble: str = "gilbert"
    xi: tuple[float, ...] = (0.3,)
    temperature: tuple[float, ...] = ()
    dt: float = 0.015
    steps: int = 1000
    realizations: int = 400
    seed: int = 0
    coupling_scale: float = 1.0
    observables: tuple[str, ...] = OBSERVABLE_NAMES
    bootstrap: int = 0
    out: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.ensemble not in ("gilbert", "thermal"):
            raise ConfigError("ensemble", f"must be 'gilbert' or 'thermal', got {self.ensemble!r}")
        if not self.nodes:
            raise ConfigError("nodes", "needs at least one value")
        for n in self.nodes:
            if n < 2:
                raise ConfigError("nodes", f"needs at least 2 nodes, got {n}")
            if n < 4 and any(name in self.observables for name in _PAIR_OBSERVABLES):
                raise ConfigError(
                    "nodes",
                    f"{', '.join(_PAIR_OBSERVABLES)} need at least 4 nodes, got {n}",
                )
        if self.ensemble == "gilbert":
            if not self.xi:
                raise ConfigError("xi", "gilbert ensemble needs at least one xi value")
            for x in self.xi:
                if not 0.0 <= x <= 1.0:
                    raise ConfigError("xi", f"must be in [0, 1], got {x}")
        else:
            if not self.temperature:
                raise ConfigError("temperature", "thermal ensemble needs at least one value")
            for t in self.temperature:
                if t <= 0.0:
                    raise ConfigError("temperature", f"must be positive, got {t}")
        if self.dt <= 0.0:
            raise ConfigError("dt", f"must be positive, got {self.dt}")
        if self.steps < 0:
            raise ConfigError("steps", f"must be nonnegative, got {self.steps}")
        if self.realizations < 1:
            raise ConfigError("realizations", f"must be at least 1, got {self.realizations}")
        if self.coupling_scale <= 0.0:
            raise ConfigError("coupling_scale", f"must be positive, got {self.coupling_scale}")
        if self.bootstrap < 0:
            raise ConfigError("bootstrap", f"must be nonnegative, got {self.bootstrap}")
        if not self.observables:
            raise ConfigError("observables", "needs at least one observable")
        for name in self.observables:
            if name not in OBSERVABLE_NAMES:
                raise ConfigError(
                    "observables", f"unknown observable {name!r}; choices: {', '.join(OBSERVABLE_NAMES)}"
                )
        return self

    def columns(self) -> tuple[str, ...]:
        """Series column names of the selected observables."""
        return tuple(OBSERVABLE_TO_COLUMN[name] for name in self.observables)


# parameter sets behind --preset; the xi sweep is a representative sample
PRESETS = {
    "fig1": dict(nodes=(32,), ensemble="gilbert", xi=(0.05, 0.1, 0.3, 0.6, 0.9, 1.0),
                 dt=0.015, steps=1000, realizations=400),
    "fig2": dict(nodes=(8, 16, 32), ensemble="gilbert", xi=(0.3,),
                 dt=0.015, steps=1000, realizations=400),
}
PRESETS["fig3"] = dict(PRESETS["fig1"])
PRESETS["fig4"] = dict(PRESETS["fig1"])
PRESETS["fig5"] = dict(PRESETS["fig1"])


_INT_FIELDS = {"steps", "realizations", "seed", "bootstrap"}
_FLOAT_FIELDS = {"dt", "coupling_scale"}
_INT_TUPLE_FIELDS = {"nodes"}
_FLOAT_TUPLE_FIELDS = {"xi", "temperature"}
_STR_TUPLE_FIELDS = {"observables"}
_STR_FIELDS = {"ensemble", "out"}
_ALL_FIELDS = {f.name for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_FIELDS:
            return int(raw)
        if key in _FLOAT_FIELDS:
            return float(raw)
        if key in _INT_TUPLE_FIELDS:
            return tuple(int(part) for part in raw.split(",") if part.strip())
        if key in _FLOAT_TUPLE_FIELDS:
            return tuple(float(part) for part in raw.split(",") if part.strip())
        if key in _STR_TUPLE_FIELDS:
            return tuple(part.strip() for part in raw.split(",") if part.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r}: {exc}") from None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into config field values.

    Blank lines and '#' comments are skipped.  ``meta.*`` keys (written
    into manifests for information) are ignored, so a manifest can be fed
    back as a config file to reproduce its run.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {stripped!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key.startswith("meta."):
            continue
        if key not in _ALL_FIELDS:
            raise ConfigError(key, "unknown configuration key")
        values[key] = _convert(key, raw)
    return values


def apply_updates(cfg: ExperimentConfig, updates: dict) -> ExperimentConfig:
    return replace(cfg, **updates)
