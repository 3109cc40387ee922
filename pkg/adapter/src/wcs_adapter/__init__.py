"""Perception adapter for the WCS scoring engine.

Decodes a video, runs detection + multi-object tracking + dense optical flow,
and writes an interchange bundle (tracks.txt, frames.wcsf, flow.wcsw) that the
``wcs`` CLI consumes. Contains no metric logic.
"""

__version__ = "0.1.0"

from .config import AdapterConfig
from .extract import extract

__all__ = ["AdapterConfig", "extract"]
