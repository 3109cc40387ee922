"""Validation pipelines: correlation against human scores, pairwise preference
agreement, deterministic train/validation splitting, and the injection
sensitivity sweep.

Datasets arrive as a manifest CSV::

    video_id,bundle_path,model_label,human_score[,extra metric columns...]

``bundle_path`` may be empty when the manifest carries precomputed ``op``,
``rs``, ``cc``, ``fp`` columns instead; external baseline metrics ride along
as extra columns and get correlated, never computed.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .combiner import SubmetricVector, WeightVector, score
from .config import RunConfig
from .interchange import ParseError, ValidationError, read_bundle
from .scoring import score_bundle
from .worldsim import Injection, InjectionError, SimBundle, inject

RESERVED_COLUMNS = ("video_id", "bundle_path", "model_label", "human_score")
SUBMETRIC_COLUMNS = ("op", "rs", "cc", "fp")


class CorrelationError(Exception):
    """Correlation is undefined for this sample (too small or constant)."""


@dataclass
class ManifestRow:
    video_id: str
    bundle_path: str | None
    model_label: str | None
    human_score: float | None
    submetrics: SubmetricVector | None = None
    extras: dict[str, float] = field(default_factory=dict)


@dataclass
class ScoredVideo:
    video_id: str
    submetrics: SubmetricVector
    wcs: float
    human_score: float | None = None
    model_label: str | None = None
    extras: dict[str, float] = field(default_factory=dict)


@dataclass
class ModelSummary:
    model_label: str
    n: int
    wcs: float
    human: float


@dataclass
class CorrelationReport:
    n: int
    pearson: float
    spearman: float
    fisher_ci_low: float | None = None
    fisher_ci_high: float | None = None
    per_model: list[ModelSummary] = field(default_factory=list)
    kendall_tau: float | None = None


# ---------------------------------------------------------------------------
# rank statistics (implemented directly; the tests carry an independent
# straight-loop reference)

def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise CorrelationError(f"need >= 3 paired samples, got {len(x)}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.sum(xc * xc))
    syy = float(np.sum(yc * yc))
    if sxx == 0.0 or syy == 0.0:
        raise CorrelationError("constant column: " + ("x" if sxx == 0.0 else "y"))
    return float(np.sum(xc * yc)) / math.sqrt(sxx * syy)


def average_ranks(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=float)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    return pearson(average_ranks(x), average_ranks(y))


def kendall_tau(x, y) -> float:
    """Tau-b (tie-corrected); quadratic scan, meant for per-model summaries."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        raise CorrelationError("kendall tau needs >= 2 samples")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0:
        raise CorrelationError("constant column in kendall tau")
    return (concordant - discordant) / denom


def fisher_interval(r: float, n: int, z_crit: float = 1.959963984540054) -> tuple[float, float]:
    """95% confidence interval for a Pearson r via the Fisher z-transform."""
    if n <= 3 or abs(r) >= 1.0:
        return (r, r)
    z = math.atanh(r)
    half = z_crit / math.sqrt(n - 3)
    return (math.tanh(z - half), math.tanh(z + half))


# ---------------------------------------------------------------------------
# manifest handling

def read_manifest(path) -> list[ManifestRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "video_id" not in reader.fieldnames:
            raise ParseError(path, 0, "manifest needs a video_id column")
        fieldnames = list(reader.fieldnames)
        raw_rows = list(reader)
    extra_cols = [c for c in fieldnames if c not in RESERVED_COLUMNS + SUBMETRIC_COLUMNS]
    has_submetrics = all(c in fieldnames for c in SUBMETRIC_COLUMNS)
    base_dir = os.path.dirname(os.path.abspath(path))
    rows = []
    seen = set()
    for raw in raw_rows:
        vid = (raw.get("video_id") or "").strip()
        if not vid:
            raise ValidationError("manifest row with empty video_id")
        if vid in seen:
            raise ValidationError(f"duplicate video_id {vid!r} in manifest")
        seen.add(vid)
        bundle_path = (raw.get("bundle_path") or "").strip() or None
        if bundle_path and not os.path.isabs(bundle_path):
            bundle_path = os.path.join(base_dir, bundle_path)
        def parse_float(column, text):
            try:
                value = float(text)
            except ValueError as e:
                raise ValidationError(f"{vid}: bad {column} value {text!r}") from e
            if not math.isfinite(value):
                raise ValidationError(f"{vid}: non-finite {column}")
            return value

        human_raw = (raw.get("human_score") or "").strip()
        human = parse_float("human_score", human_raw) if human_raw else None
        sub = None
        if bundle_path is None:
            if not has_submetrics:
                raise ValidationError(
                    f"{vid}: no bundle_path and no op/rs/cc/fp columns to score from"
                )
            sub = SubmetricVector(**{c: parse_float(c, raw[c]) for c in SUBMETRIC_COLUMNS})
        extras = {}
        for c in extra_cols:
            v = (raw.get(c) or "").strip()
            if v:
                extras[c] = parse_float(c, v)
        rows.append(ManifestRow(video_id=vid, bundle_path=bundle_path,
                                model_label=(raw.get("model_label") or "").strip() or None,
                                human_score=human, submetrics=sub, extras=extras))
    return rows


def _score_one(args) -> tuple[str, SubmetricVector]:
    bundle_path, cfg = args
    bundle = read_bundle(bundle_path)
    bs = score_bundle(bundle, cfg)
    return bundle.tracks.meta.video_id, bs.submetrics()


def score_manifest(rows: list[ManifestRow], cfg: RunConfig, weights: WeightVector,
                   jobs: int = 1) -> list[ScoredVideo]:
    """Score every manifest row; bundles are read and evaluated (in parallel
    when jobs > 1), precomputed rows pass through. Output is sorted by
    video_id regardless of job count."""
    need = [(r.video_id, r.bundle_path) for r in rows if r.submetrics is None]
    computed: dict[str, SubmetricVector] = {}
    if need:
        work = [(path, cfg) for _, path in need]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_score_one, work))
        else:
            results = [_score_one(w) for w in work]
        for vid, sub in results:
            computed[vid] = sub
    out = []
    for r in rows:
        sub = r.submetrics if r.submetrics is not None else computed[r.video_id]
        out.append(ScoredVideo(
            video_id=r.video_id, submetrics=sub, wcs=score(sub, weights),
            human_score=r.human_score, model_label=r.model_label, extras=dict(r.extras),
        ))
    out.sort(key=lambda s: s.video_id)
    return out


# ---------------------------------------------------------------------------
# correlation

def correlate(scored: list[ScoredVideo], model_agg: str = "mean") -> CorrelationReport:
    rows = [s for s in scored if s.human_score is not None]
    if len(rows) < 3:
        raise CorrelationError(f"need >= 3 videos with human scores, got {len(rows)}")
    wcs = [s.wcs for s in rows]
    human = [s.human_score for s in rows]
    if np.ptp(human) == 0:
        raise CorrelationError("constant column: human_score")
    if np.ptp(wcs) == 0:
        raise CorrelationError("constant column: wcs")
    r = pearson(wcs, human)
    rho = spearman(wcs, human)
    ci = fisher_interval(r, len(rows))
    report = CorrelationReport(n=len(rows), pearson=r, spearman=rho,
                               fisher_ci_low=ci[0], fisher_ci_high=ci[1])
    labels = sorted({s.model_label for s in rows if s.model_label})
    if len(labels) >= 2:
        agg = np.median if model_agg == "median" else np.mean
        for label in labels:
            group = [s for s in rows if s.model_label == label]
            report.per_model.append(ModelSummary(
                model_label=label, n=len(group),
                wcs=float(agg([s.wcs for s in group])),
                human=float(agg([s.human_score for s in group])),
            ))
        try:
            report.kendall_tau = kendall_tau(
                [m.wcs for m in report.per_model], [m.human for m in report.per_model]
            )
        except CorrelationError:
            report.kendall_tau = None
    return report


def metric_correlations(scored: list[ScoredVideo]) -> dict[str, dict[str, float]]:
    """Pearson/Spearman of wcs and every ingested extra metric column against
    the human scores; columns that are constant or missing are skipped."""
    rows = [s for s in scored if s.human_score is not None]
    human = [s.human_score for s in rows]
    table: dict[str, dict[str, float]] = {}
    columns: dict[str, list[tuple[float, float]]] = {"wcs": [(s.wcs, h) for s, h in zip(rows, human)]}
    names = sorted({name for s in rows for name in s.extras})
    for name in names:
        columns[name] = [(s.extras[name], s.human_score) for s in rows if name in s.extras]
    for name, pairs in columns.items():
        if len(pairs) < 3:
            continue
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        try:
            table[name] = {"pearson": pearson(xs, ys), "spearman": spearman(xs, ys),
                           "n": len(pairs)}
        except CorrelationError:
            continue
    return table


# ---------------------------------------------------------------------------
# pairwise preference agreement

@dataclass
class PreferencePair:
    wcs_a: float
    wcs_b: float
    preferred: str  # "a" or "b"


def pairwise_agreement(pairs: list[PreferencePair]) -> float:
    """Fraction of pairs where the preferred video scores strictly higher;
    exact ties count half."""
    if not pairs:
        raise CorrelationError("no preference pairs")
    total = 0.0
    for p in pairs:
        hi, lo = (p.wcs_a, p.wcs_b) if p.preferred == "a" else (p.wcs_b, p.wcs_a)
        if hi > lo:
            total += 1.0
        elif hi == lo:
            total += 0.5
    return total / len(pairs)


# ---------------------------------------------------------------------------
# deterministic splitting

def assign_split(video_id: str, seed: int, val_fraction: float) -> str:
    """'train' or 'val' by hashing the video id; stable across runs and platforms."""
    digest = hashlib.sha256(f"{seed}:{video_id}".encode("utf-8")).digest()
    u = int.from_bytes(digest[:8], "big") / 2.0 ** 64
    return "val" if u < val_fraction else "train"


def split_rows(rows, seed: int, val_fraction: float):
    train, val = [], []
    for r in rows:
        (val if assign_split(r.video_id, seed, val_fraction) == "val" else train).append(r)
    return train, val


# ---------------------------------------------------------------------------
# sensitivity sweep

@dataclass
class SensitivityRow:
    injection: str
    applied: bool
    reason: str | None = None
    clean: dict | None = None
    corrupted: dict | None = None
    delta_op: float | None = None
    delta_rs: float | None = None
    delta_cc: float | None = None
    delta_fp: float | None = None
    delta_wcs: float | None = None


def sensitivity_suite(bundle: SimBundle, injections: list[Injection],
                      weights: WeightVector, cfg: RunConfig) -> list[SensitivityRow]:
    """Score the clean bundle once, then each corruption, and report deltas.
    Inapplicable injections are reported as skipped, not errors."""
    clean_sub = score_bundle(bundle.as_bundle(), cfg).submetrics()
    clean_wcs = score(clean_sub, weights)
    rows = []
    for inj in injections:
        try:
            corrupted = inject(bundle, inj)
        except InjectionError as e:
            rows.append(SensitivityRow(injection=inj.kind, applied=False, reason=str(e)))
            continue
        sub = score_bundle(corrupted.as_bundle(), cfg).submetrics()
        wcs = score(sub, weights)
        rows.append(SensitivityRow(
            injection=inj.kind, applied=True,
            clean={"op": clean_sub.op, "rs": clean_sub.rs, "cc": clean_sub.cc,
                   "fp": clean_sub.fp, "wcs": clean_wcs},
            corrupted={"op": sub.op, "rs": sub.rs, "cc": sub.cc, "fp": sub.fp, "wcs": wcs},
            delta_op=sub.op - clean_sub.op,
            delta_rs=sub.rs - clean_sub.rs,
            delta_cc=sub.cc - clean_sub.cc,
            delta_fp=sub.fp - clean_sub.fp,
            delta_wcs=wcs - clean_wcs,
        ))
    return rows
