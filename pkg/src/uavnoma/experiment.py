"""Experiment files: a base scenario plus an optional Cartesian grid.

An experiment file is a YAML mapping whose top-level keys are ScenarioConfig
fields, plus two optional sections::

    grid:                       # expanded in the order given, first key outermost
      region.horizontal_angle_deg: [1, 5]
      radio.altitude_m: {start: 10, stop: 150, step: 10}   # inclusive range
      ordering: [distance, fejer-kernel]
    pdf:
      statistic: fejer-of-selected
      bins: 50
"""

from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .config import ConfigError, ScenarioConfig, Violation, config_from_dict, validate
from .engine import Statistic

SECTIONS = ("grid", "pdf")
_COUNTERPART = {"horizontal_angle_deg": "horizontal_angle_rad",
                "horizontal_angle_rad": "horizontal_angle_deg",
                "beam_azimuth_deg": "beam_azimuth_rad",
                "beam_azimuth_rad": "beam_azimuth_deg"}


@dataclass
class Experiment:
    base: dict[str, Any]
    grid: dict[str, list] = field(default_factory=dict)
    pdf_statistic: Statistic = Statistic.FEJER_OF_SELECTED
    pdf_bins: int = 50

    def configs(self, **overrides) -> list[ScenarioConfig]:
        """Every grid point as a validated config, in expansion order."""
        keys = list(self.grid)
        out = []
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            tree = copy.deepcopy(self.base)
            for key, value in zip(keys, combo):
                _set(tree, key, value)
            for key, value in overrides.items():
                if value is not None:
                    _set(tree, key, value)
            out.append(validate(config_from_dict(tree)))
        return out


def _set(tree: dict, dotted: str, value) -> None:
    *parents, leaf = dotted.split(".")
    node = tree
    for p in parents:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError([Violation(dotted, "parent is not a mapping")])
    if leaf in _COUNTERPART:
        node.pop(_COUNTERPART[leaf], None)
    node[leaf] = value


def _axis(name: str, spec) -> list:
    if isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "step"}
        if extra or not {"start", "stop", "step"} <= set(spec):
            raise ConfigError([Violation(f"grid.{name}", "range needs exactly start, stop, step")])
        start, stop, step = spec["start"], spec["stop"], spec["step"]
        if step <= 0:
            raise ConfigError([Violation(f"grid.{name}", "step must be > 0")])
        count = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(count) if start + i * step <= stop + 1e-9 * abs(step)]
    if isinstance(spec, list) and spec:
        return spec
    raise ConfigError([Violation(f"grid.{name}", "must be a non-empty list or a range mapping")])


def parse_experiment(tree: dict[str, Any]) -> Experiment:
    if not isinstance(tree, dict):
        raise ConfigError([Violation("<root>", "experiment file must be a mapping")])
    base = {k: v for k, v in tree.items() if k not in SECTIONS}
    grid = {k: _axis(k, v) for k, v in (tree.get("grid") or {}).items()}
    pdf = dict(tree.get("pdf") or {})
    extra = set(pdf) - {"statistic", "bins"}
    if extra:
        raise ConfigError([Violation(f"pdf.{k}", "unknown key") for k in sorted(extra)])
    try:
        statistic = Statistic(pdf.get("statistic", Statistic.FEJER_OF_SELECTED.value))
    except ValueError:
        raise ConfigError([Violation("pdf.statistic", f"unknown statistic {pdf['statistic']!r}")]) from None
    bins = pdf.get("bins", 50)
    if not isinstance(bins, int) or bins < 1:
        raise ConfigError([Violation("pdf.bins", "must be a positive integer")])
    exp = Experiment(base, grid, statistic, bins)
    exp.configs()   # surface schema errors at load time
    return exp


def shipped(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``shipped("fig2")``."""
    return Path(str(resources.files("uavnoma") / "configs" / f"{name}.yaml"))


def load_experiment(path) -> Experiment:
    """Load an experiment file; a bare name like ``fig2`` resolves to a shipped config."""
    p = Path(path)
    if not p.exists() and shipped(str(path)).exists():
        p = shipped(str(path))
    text = p.read_text(encoding="utf-8")
    return parse_experiment(yaml.safe_load(text) or {})
