"""World Consistency Score: no-reference video consistency evaluation.

Four submetrics (object permanence, relation stability, causal compliance,
flicker penalty) computed from tracker/flow bundles, combined by learned
non-negative weights, with an evaluation harness and a synthetic world
simulator for controlled testing.
"""

__version__ = "0.1.0"

from .combiner import (
    FitResult,
    SubmetricVector,
    WeightVector,
    equal_weights,
    fit_weights,
    score,
)
from .config import RunConfig, load_config
from .interchange import Bundle, Track, TrackSet, VideoMeta, read_bundle, write_bundle
from .scoring import BundleScore, score_bundle
from .worldsim import Injection, SceneScript, inject, simulate

__all__ = [
    "Bundle", "BundleScore", "FitResult", "Injection", "RunConfig", "SceneScript",
    "SubmetricVector", "Track", "TrackSet", "VideoMeta", "WeightVector",
    "equal_weights", "fit_weights", "inject", "load_config", "read_bundle",
    "score", "score_bundle", "simulate", "write_bundle",
]
