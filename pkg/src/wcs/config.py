"""Run configuration: module parameters from an INI file plus overrides.

The config file uses one section per module, e.g.::

    [permanence]
    k_exit = 3
    m_edge_frac = 0.03
    theta_occ = 0.9

    [flicker]
    static_region_mode = true

The ``WCS_CONFIG`` environment variable supplies a default path; explicit
``--set section.key=value`` overrides win over the file, which wins over the
built-in defaults. Every value is bounds-checked before any computation runs.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields

from .causality import CausalityParams
from .flicker import FlickerParams
from .interchange import ValidationError
from .permanence import PermanenceParams
from .relations import RelationParams

CONFIG_ENV_VAR = "WCS_CONFIG"


@dataclass(frozen=True)
class HarnessParams:
    split_seed: int = 0
    val_fraction: float = 0.2
    model_agg: str = "mean"  # per-model aggregation: mean | median


@dataclass
class RunConfig:
    permanence: PermanenceParams = field(default_factory=PermanenceParams)
    relations: RelationParams = field(default_factory=RelationParams)
    causality: CausalityParams = field(default_factory=CausalityParams)
    flicker: FlickerParams = field(default_factory=FlickerParams)
    harness: HarnessParams = field(default_factory=HarnessParams)


_SECTIONS = {
    "permanence": PermanenceParams,
    "relations": RelationParams,
    "causality": CausalityParams,
    "flicker": FlickerParams,
    "harness": HarnessParams,
}

# key -> (parser, bounds description, bounds check)
_CHECKS = {
    ("permanence", "k_exit"): ("int", "k_exit >= 1", lambda v: v >= 1),
    ("permanence", "m_edge_frac"): ("float", "0 <= m_edge_frac <= 1", lambda v: 0 <= v <= 1),
    ("permanence", "theta_occ"): ("float", "0 < theta_occ <= 1", lambda v: 0 < v <= 1),
    ("relations", "tau_jump"): ("float", "tau_jump > 0", lambda v: v > 0),
    ("causality", "v_min"): ("float", "v_min >= 0", lambda v: v >= 0),
    ("causality", "alpha_max"): ("float", "alpha_max > 0", lambda v: v > 0),
    ("causality", "w_cause"): ("int", "w_cause >= 0", lambda v: v >= 0),
    ("causality", "w_effect"): ("int", "w_effect >= 0", lambda v: v >= 0),
    ("causality", "p_near_frac"): ("float", "p_near_frac >= 0", lambda v: v >= 0),
    ("causality", "agent_classes"): ("strlist", "comma-separated class labels", lambda v: True),
    ("flicker", "c_max"): ("float", "0 < c_max <= 1", lambda v: 0 < v <= 1),
    ("flicker", "tau_cut"): ("float", "tau_cut > 0", lambda v: v > 0),
    ("flicker", "static_region_mode"): ("bool", "true/false", lambda v: True),
    ("flicker", "cut_exclusion"): ("bool", "true/false", lambda v: True),
    ("harness", "split_seed"): ("int", "any integer", lambda v: True),
    ("harness", "val_fraction"): ("float", "0 < val_fraction < 1", lambda v: 0 < v < 1),
    ("harness", "model_agg"): ("str", "mean or median", lambda v: v in ("mean", "median")),
}


def _parse_value(kind: str, raw: str):
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "strlist":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    return raw.strip()


def config_help_lines() -> list[str]:
    """Every config key with its default, for --help epilogs."""
    lines = []
    for section, cls in _SECTIONS.items():
        defaults = cls()
        for f in fields(cls):
            kind, bounds, _ = _CHECKS[(section, f.name)]
            default = getattr(defaults, f.name)
            if isinstance(default, tuple):
                default = ",".join(default)
            lines.append(f"  {section}.{f.name} = {default}  ({bounds})")
    return lines


def load_config(path: str | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Build a RunConfig from defaults, an optional INI file, and
    ``section.key=value`` override strings (in that precedence order)."""
    values: dict[tuple[str, str], object] = {}

    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path:
        if not os.path.exists(path):
            raise ValidationError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        parser.read(path)
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ValidationError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                values[(section, key)] = raw

    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValidationError(f"override {item!r} is not section.key=value")
        dotted, raw = item.split("=", 1)
        section, key = dotted.split(".", 1)
        values[(section.strip(), key.strip())] = raw

    kwargs: dict[str, dict] = {s: {} for s in _SECTIONS}
    for (section, key), raw in values.items():
        if (section, key) not in _CHECKS:
            raise ValidationError(f"unknown config key {section}.{key}")
        kind, bounds, check = _CHECKS[(section, key)]
        try:
            value = _parse_value(kind, str(raw))
        except ValueError as e:
            raise ValidationError(f"{section}.{key}: {e}") from e
        if not check(value):
            raise ValidationError(f"{section}.{key}={value} violates {bounds}")
        kwargs[section][key] = value

    return RunConfig(**{
        section: cls(**kwargs[section]) for section, cls in _SECTIONS.items()
    })
