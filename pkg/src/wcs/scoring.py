"""One-stop scoring of a bundle: all four submetrics plus per-module diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

from .causality import CausalReport, compute_cc
from .combiner import SubmetricVector, WeightVector, display_score, score
from .config import RunConfig
from .flicker import FlickerSeries, compute_fp
from .interchange import Bundle, ValidationError
from .permanence import PermanenceReport, compute_op
from .relations import RelationEvent, compute_rs


@dataclass
class BundleScore:
    video_id: str
    op: float
    rs: float
    cc: float
    fp: float | None  # None when the bundle has no frames/flow
    permanence: PermanenceReport
    relation_events: list[RelationEvent]
    causal: CausalReport
    flicker: FlickerSeries | None

    def submetrics(self, fp_override: float | None = None) -> SubmetricVector:
        fp = self.fp if self.fp is not None else fp_override
        if fp is None:
            raise ValidationError(
                f"{self.video_id}: flicker penalty unavailable (bundle has no frames/flow) "
                "and no override was given"
            )
        return SubmetricVector(op=self.op, rs=self.rs, cc=self.cc, fp=fp)


def score_bundle(bundle: Bundle, cfg: RunConfig) -> BundleScore:
    tracks = bundle.tracks
    perm = compute_op(tracks, cfg.permanence)
    rs, rel_events = compute_rs(tracks, cfg.relations)
    causal = compute_cc(tracks, cfg.causality)
    flick = None
    if bundle.has_pixels:
        flick = compute_fp(bundle.frames, bundle.flow, tracks, cfg.flicker)
    return BundleScore(
        video_id=tracks.meta.video_id,
        op=perm.op,
        rs=rs,
        cc=causal.cc,
        fp=flick.fp if flick is not None else None,
        permanence=perm,
        relation_events=rel_events,
        causal=causal,
        flicker=flick,
    )


def build_report(bs: BundleScore, weights: WeightVector,
                 fp_override: float | None = None) -> dict:
    sub = bs.submetrics(fp_override)
    wcs = score(sub, weights)
    report = {
        "schema": 1,
        "video_id": bs.video_id,
        "weights": weights.as_dict(),
        "submetrics": {"op": sub.op, "rs": sub.rs, "cc": sub.cc, "fp": sub.fp},
        "wcs": wcs,
        "wcs_display": display_score(wcs),
        "permanence": {
            "op": bs.permanence.op,
            "per_object": [
                {"object_id": o.object_id,
                 "persistence_ratio": o.persistence_ratio,
                 "exemption": o.exemption.value}
                for o in bs.permanence.per_object
            ],
        },
        "relations": {
            "rs": bs.rs,
            "events": [
                {"pair": list(e.pair), "frame": e.frame, "kind": e.kind.value,
                 "magnitude": e.magnitude}
                for e in bs.relation_events
            ],
        },
        "causality": {
            "cc": bs.causal.cc,
            "n_events": bs.causal.n_events,
            "violations": [
                {"kind": v.kind.value, "object_id": v.object_id, "frame": v.frame,
                 "partner_id": v.partner_id, "violation": v.violation_kind.value}
                for v in bs.causal.violations
            ],
            "motion_energy": bs.causal.motion_energy,
        },
    }
    if bs.flicker is not None:
        report["flicker"] = {
            "fp": bs.flicker.fp,
            "residuals": bs.flicker.residuals,
            "static_coverage": bs.flicker.static_coverage,
            "cut_transitions": [t + 1 for t, c in enumerate(bs.flicker.cut_flags) if c],
            "degenerate_transitions": [t + 1 for t, d in enumerate(bs.flicker.degenerate_flags) if d],
            "kernel_backend": bs.flicker.kernel_backend,
        }
    else:
        report["flicker"] = {"available": False, "fp_override": fp_override}
    return report
