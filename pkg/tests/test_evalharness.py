import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcs.combiner import SubmetricVector, equal_weights
from wcs.config import load_config
from wcs.evalharness import (
    CorrelationError,
    PreferencePair,
    ScoredVideo,
    assign_split,
    correlate,
    fisher_interval,
    kendall_tau,
    metric_correlations,
    pairwise_agreement,
    pearson,
    read_manifest,
    score_manifest,
    sensitivity_suite,
    spearman,
)
from wcs.worldsim import (
    simulate,
    standard_injections,
    standard_scene,
    write_sim_bundle,
)

from reference import ref_pearson, ref_spearman

CFG = load_config()


def scored(wcs_values, human_values, labels=None):
    out = []
    for i, (w, h) in enumerate(zip(wcs_values, human_values)):
        out.append(ScoredVideo(
            video_id=f"v{i:03d}",
            submetrics=SubmetricVector(0.5, 0.5, 0.5, 0.5),
            wcs=w, human_score=h,
            model_label=labels[i] if labels else None,
        ))
    return out


def test_perfect_correlation():
    vals = [0.1, 0.4, 0.2, 0.9, 0.6]
    report = correlate(scored(vals, vals))
    assert report.pearson == pytest.approx(1.0)
    assert report.spearman == pytest.approx(1.0)


def test_perfect_anticorrelation():
    vals = [0.1, 0.4, 0.2, 0.9, 0.6]
    report = correlate(scored(vals, [-v for v in vals]))
    assert report.pearson == pytest.approx(-1.0)
    assert report.spearman == pytest.approx(-1.0)


def test_hand_dataset_matches_long_hand_formula():
    xs = [1.0, 2.0, 3.0, 4.0, 5.0]
    ys = [2.0, 1.0, 4.0, 3.0, 5.0]
    report = correlate(scored(xs, ys))
    assert abs(report.pearson - ref_pearson(xs, ys)) < 1e-12
    assert abs(report.spearman - ref_spearman(xs, ys)) < 1e-12


def test_too_few_or_constant_rejected():
    with pytest.raises(CorrelationError):
        correlate(scored([1.0, 2.0], [1.0, 2.0]))
    with pytest.raises(CorrelationError) as ei:
        correlate(scored([1.0, 2.0, 3.0], [5.0, 5.0, 5.0]))
    assert "human_score" in str(ei.value)
    with pytest.raises(CorrelationError) as ei:
        correlate(scored([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
    assert "wcs" in str(ei.value)


def test_spearman_with_ties():
    xs = [1.0, 2.0, 2.0, 3.0]
    ys = [10.0, 20.0, 20.0, 30.0]
    assert spearman(xs, ys) == pytest.approx(1.0)
    xs2 = [1.0, 2.0, 2.0, 3.0]
    ys2 = [3.0, 2.0, 2.0, 1.0]
    assert spearman(xs2, ys2) == pytest.approx(-1.0)


def test_fisher_interval_brackets_r():
    low, high = fisher_interval(0.8, 30)
    assert low < 0.8 < high
    assert (-1 <= low) and (high <= 1)
    assert fisher_interval(1.0, 30) == (1.0, 1.0)
    assert fisher_interval(0.5, 3) == (0.5, 0.5)


def test_per_model_summary_and_kendall():
    wcs_vals = [0.9, 0.8, 0.3, 0.2, 0.6, 0.5]
    human = [9.0, 8.0, 3.0, 2.0, 6.0, 5.0]
    labels = ["good", "good", "bad", "bad", "mid", "mid"]
    report = correlate(scored(wcs_vals, human, labels))
    assert [m.model_label for m in report.per_model] == ["bad", "good", "mid"]
    by = {m.model_label: m for m in report.per_model}
    assert by["good"].wcs == pytest.approx(0.85)
    assert by["good"].human == pytest.approx(8.5)
    assert report.kendall_tau == pytest.approx(1.0)


def test_kendall_tau_hand_value():
    # concordant minus discordant over total: classic small case
    x = [1.0, 2.0, 3.0, 4.0]
    y = [1.0, 3.0, 2.0, 4.0]
    assert kendall_tau(x, y) == pytest.approx((5 - 1) / 6)


def test_pairwise_agreement_conventions():
    assert pairwise_agreement([PreferencePair(0.8, 0.2, "a"),
                               PreferencePair(0.1, 0.9, "b")]) == 1.0
    assert pairwise_agreement([PreferencePair(0.5, 0.5, "a"),
                               PreferencePair(0.5, 0.5, "b")]) == 0.5
    assert pairwise_agreement([PreferencePair(0.2, 0.8, "a")]) == 0.0


def test_split_is_deterministic_and_balanced():
    ids = [f"video-{i}" for i in range(2000)]
    first = [assign_split(v, seed=0, val_fraction=0.2) for v in ids]
    second = [assign_split(v, seed=0, val_fraction=0.2) for v in ids]
    assert first == second
    frac = first.count("val") / len(first)
    assert 0.15 < frac < 0.25
    moved = sum(a != b for a, b in zip(
        first, [assign_split(v, seed=1, val_fraction=0.2) for v in ids]))
    assert moved > 0


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_statistics_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 21))
    xs = rng.normal(size=n)
    ys = rng.normal(size=n)
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        return
    assert abs(pearson(xs, ys) - ref_pearson(list(xs), list(ys))) < 1e-12
    assert abs(spearman(xs, ys) - ref_spearman(list(xs), list(ys))) < 1e-12


def test_manifest_with_precomputed_submetrics(tmp_path):
    path = tmp_path / "m.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["video_id", "bundle_path", "model_label", "human_score",
                    "op", "rs", "cc", "fp", "fvd"])
        w.writerow(["a", "", "m1", "0.9", "1.0", "1.0", "1.0", "0.0", "12.5"])
        w.writerow(["b", "", "m1", "0.5", "0.6", "0.8", "0.9", "0.2", "30.0"])
        w.writerow(["c", "", "m2", "0.2", "0.2", "0.5", "0.4", "0.6", "55.0"])
    rows = read_manifest(path)
    assert [r.video_id for r in rows] == ["a", "b", "c"]
    assert rows[0].submetrics == SubmetricVector(1.0, 1.0, 1.0, 0.0)
    assert rows[2].extras == {"fvd": 55.0}
    scored_rows = score_manifest(rows, CFG, equal_weights())
    assert scored_rows[0].wcs == pytest.approx(0.75)
    table = metric_correlations(scored_rows)
    assert set(table) == {"wcs", "fvd"}
    assert table["fvd"]["pearson"] < 0  # lower fvd on better videos


def test_manifest_with_bundles(tmp_path):
    bdir = tmp_path / "bundle"
    write_sim_bundle(simulate(standard_scene()), bdir)
    path = tmp_path / "m.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["video_id", "bundle_path", "model_label", "human_score"])
        w.writerow(["standard", "bundle", "m1", "0.9"])
    rows = read_manifest(path)
    out = score_manifest(rows, CFG, equal_weights())
    assert out[0].wcs == pytest.approx(0.75)


def test_score_manifest_parallel_matches_serial(tmp_path):
    paths = []
    for i in range(3):
        d = tmp_path / f"b{i}"
        write_sim_bundle(simulate(standard_scene(video_id=f"v{i}")), d)
        paths.append(d)
    mpath = tmp_path / "m.csv"
    with open(mpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["video_id", "bundle_path", "model_label", "human_score"])
        for i, d in enumerate(paths):
            w.writerow([f"v{i}", d.name, "m", "0.5"])
    rows = read_manifest(mpath)
    serial = score_manifest(rows, CFG, equal_weights(), jobs=1)
    parallel = score_manifest(rows, CFG, equal_weights(), jobs=4)
    assert [(s.video_id, s.wcs) for s in serial] == [(s.video_id, s.wcs) for s in parallel]


def test_sensitivity_suite_signs():
    bundle = simulate(standard_scene())
    rows = sensitivity_suite(bundle, standard_injections(bundle), equal_weights(), CFG)
    by = {r.injection: r for r in rows}
    assert by["vanish_midway"].delta_op < -0.05
    assert by["vanish_midway"].delta_wcs < 0
    assert by["brightness_flicker"].delta_fp > 0.05
    assert by["brightness_flicker"].delta_wcs < 0
    assert by["frame_swap"].delta_fp > 0 or by["frame_swap"].delta_cc < 0
    assert by["spontaneous_motion"].delta_cc < 0
    assert by["teleport"].delta_rs < 0
    assert abs(by["constant_color_filter"].delta_wcs) < 0.01
    assert not by["frozen_reaction"].applied
    assert "collision" in by["frozen_reaction"].reason
