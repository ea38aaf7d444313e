"""Experiment configuration: flat key = value files with one section per concern.

Example::

    [model]
    omega = 1.0
    omega0 = 1.0
    g = 1.0
    n_atoms = 20

    [convergence]
    ladder = 50 100 200 400
    levels = 1 50 100 200
    tol = 1e-6
    parity = +1

    [analysis]
    window = 0.5 3.0
    dos_bins = 60
    spacing_bins = 40
    segments = 50
    unfolding = polynomial
    degree = 6

    [goe]
    dim = 1000
    samples = 50
    window_fraction = 0.5

Unknown keys are rejected so typos never silently fall back to defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from dickeaudit.model import ModelParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # [model]
    omega: float = 1.0
    omega0: float = 1.0
    g: float = 1.0
    n_atoms: int = 20
    # [convergence]
    ladder: tuple[int, ...] = (50, 100, 200, 400, 800)
    levels: tuple[int, ...] = (1, 50, 100, 200)
    tol: float = 1e-6
    parity: str = "+1"  # "+1", "-1", or "both"
    # [analysis]
    window: tuple[float, float] = (0.5, 5.0)  # E/N
    dos_bins: int = 60
    spacing_bins: int = 40
    segments: int = 50
    unfolding: str = "polynomial"
    degree: int = 6
    surrogate: str = "none"  # "none" | "poisson" (chaos-path test mode)
    # [goe]
    goe_dim: int = 1000
    goe_samples: int = 50
    goe_window_fraction: float = 0.5
    # [limits]
    dim_cap: int = 40_000
    # runtime (CLI flags, not config file keys)
    out_dir: str = "out"
    seed: int = 0
    allow_unconverged: bool = False

    def __post_init__(self):
        if self.window[0] >= self.window[1]:
            raise ConfigError(f"window lo must be < hi, got {self.window}")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ConfigError(f"ladder must be strictly increasing, got {self.ladder}")
        if self.parity not in ("+1", "-1", "both"):
            raise ConfigError(f"parity must be '+1', '-1' or 'both', got {self.parity!r}")
        if self.surrogate not in ("none", "poisson"):
            raise ConfigError(f"surrogate must be 'none' or 'poisson', got {self.surrogate!r}")
        self.model_params()  # validates physical parameters

    def model_params(self) -> ModelParams:
        return ModelParams(self.omega, self.omega0, self.g, self.n_atoms)

    def sectors(self):
        from dickeaudit.model import EVEN, ODD

        return {"+1": (EVEN,), "-1": (ODD,), "both": (EVEN, ODD)}[self.parity]

    def echo(self) -> dict[str, str]:
        """Flat key/value view of every setting, for the run manifest."""
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, tuple):
                val = " ".join(repr(v) if isinstance(v, float) else str(v) for v in val)
            out[f"config.{f.name}"] = str(val)
        return out


_SCHEMA = {
    ("model", "omega"): ("omega", float),
    ("model", "omega0"): ("omega0", float),
    ("model", "g"): ("g", float),
    ("model", "n_atoms"): ("n_atoms", int),
    ("convergence", "ladder"): ("ladder", "int_list"),
    ("convergence", "levels"): ("levels", "int_list"),
    ("convergence", "tol"): ("tol", float),
    ("convergence", "parity"): ("parity", str),
    ("analysis", "window"): ("window", "float_pair"),
    ("analysis", "dos_bins"): ("dos_bins", int),
    ("analysis", "spacing_bins"): ("spacing_bins", int),
    ("analysis", "segments"): ("segments", int),
    ("analysis", "unfolding"): ("unfolding", str),
    ("analysis", "degree"): ("degree", int),
    ("analysis", "surrogate"): ("surrogate", str),
    ("goe", "dim"): ("goe_dim", int),
    ("goe", "samples"): ("goe_samples", int),
    ("goe", "window_fraction"): ("goe_window_fraction", float),
    ("limits", "dim_cap"): ("dim_cap", int),
}


def _convert(raw: str, kind, where: str):
    try:
        if kind == "int_list":
            return tuple(int(tok) for tok in raw.split())
        if kind == "float_pair":
            lo, hi = (float(tok) for tok in raw.split())
            return (lo, hi)
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value {raw!r} for {where}") from exc


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    """Parse a config file; keyword overrides (out_dir, seed, ...) win."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            entry = _SCHEMA.get((section, key))
            if entry is None:
                raise ConfigError(f"unknown config key [{section}] {key}")
            name, kind = entry
            values[name] = _convert(raw, kind, f"[{section}] {key}")
    values.update(overrides)
    return ExperimentConfig(**values)
