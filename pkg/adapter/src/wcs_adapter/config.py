"""Adapter configuration: model identifiers and extraction knobs."""

from __future__ import annotations

import json
from dataclasses import dataclass

DETECTORS = ("bgsub",)
TRACKERS = ("iou",)
FLOW_ESTIMATORS = ("farneback",)


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    detector: str = "bgsub"
    tracker: str = "iou"
    flow: str = "farneback"
    confidence_threshold: float = 0.25
    stride: int = 1
    device: str = "cpu"
    reid: bool = False                 # appearance-embedding identity merge
    reid_similarity: float = 0.9
    reid_max_gap: int = 5

    def validate(self):
        if self.detector not in DETECTORS:
            raise ConfigError(f"unknown detector {self.detector!r} (have {DETECTORS})")
        if self.tracker not in TRACKERS:
            raise ConfigError(f"unknown tracker {self.tracker!r} (have {TRACKERS})")
        if self.flow not in FLOW_ESTIMATORS:
            raise ConfigError(f"unknown flow estimator {self.flow!r} (have {FLOW_ESTIMATORS})")
        if not (0.0 < self.confidence_threshold < 1.0):
            raise ConfigError("confidence_threshold must be in (0, 1)")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if not (0.0 < self.reid_similarity <= 1.0):
            raise ConfigError("reid_similarity must be in (0, 1]")


def load_adapter_config(path: str | None) -> AdapterConfig:
    if path is None:
        cfg = AdapterConfig()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: not valid JSON ({e})") from e
        try:
            cfg = AdapterConfig(**data)
        except TypeError as e:
            raise ConfigError(f"{path}: {e}") from e
    cfg.validate()
    return cfg
