"""Command line front end.

Subcommands: score, fit, correlate, ablate, sensitivity, simulate, inject.
Exit codes: 0 success, 2 invalid input, 3 numeric failure. Outputs are
canonical JSON written atomically, so failed runs never leave partial files
and identical inputs always produce identical bytes (including under --jobs).
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile

from . import __version__
from .combiner import (
    FitError,
    FitResult,
    ablate,
    equal_weights,
    fit_weights,
    read_weight_file,
    write_weight_file,
)
from .config import CONFIG_ENV_VAR, config_help_lines, load_config
from .evalharness import (
    CorrelationError,
    correlate,
    metric_correlations,
    read_manifest,
    score_manifest,
    sensitivity_suite,
    split_rows,
)
from .interchange import ParseError, ValidationError, read_bundle, write_report
from .scoring import build_report, score_bundle
from .worldsim import (
    Injection,
    InjectionError,
    ScriptError,
    inject,
    load_script,
    read_sim_bundle,
    save_script,
    simulate,
    standard_injections,
    standard_scene,
    write_sim_bundle,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3

_CONFIG_EPILOG = "config keys (override with --set section.key=value):\n" + "\n".join(config_help_lines())


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None,
                   help=f"INI config path (default: ${CONFIG_ENV_VAR} if set)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="SECTION.KEY=VALUE", help="override one config key")


def _add_weights(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--weights", help="weight file (canonical JSON)")
    g.add_argument("--equal-weights", action="store_true",
                   help="use the 0.25/0.25/0.25/0.25 baseline with zero bias")


def _resolve_weights(args) -> FitResult:
    if getattr(args, "equal_weights", False):
        return FitResult(weights=equal_weights(), rmse=0.0)
    return read_weight_file(args.weights)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wcs",
        description="World Consistency Score toolkit: score videos, learn weights, "
                    "run validation analyses, and generate synthetic test worlds.",
    )
    parser.add_argument("--version", action="version", version=f"wcs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("score", help="score one or more bundles",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("bundles", nargs="+", help="bundle directories")
    _add_weights(p)
    p.add_argument("--fp-override", type=float, default=None,
                   help="flicker penalty to assume when a bundle has no frames/flow")
    p.add_argument("--scale-100", action="store_true",
                   help="print the 0-100 display score instead of the raw one")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.add_argument("-o", "--output", required=True, help="report JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("fit", help="learn weights from a manifest with human scores",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("manifest", help="dataset manifest CSV")
    p.add_argument("--standardize", action="store_true",
                   help="z-score features before fitting (weights mapped back)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="weight file path")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("correlate", help="correlate scores against human judgments",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("manifest")
    _add_weights(p)
    p.add_argument("--agg", choices=("mean", "median"), default=None,
                   help="per-model aggregation (default from config)")
    p.add_argument("--table", action="store_true",
                   help="print a plain-text per-metric correlation table")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("ablate", help="leave-one-submetric-out refits",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("manifest")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sensitivity", help="score a simulator bundle against its corruptions",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("bundle", help="simulator bundle directory (needs world.json)")
    _add_weights(p)
    p.add_argument("--injections", default=None,
                   help="JSON file with a list of injections (default: standard battery)")
    p.add_argument("-o", "--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("simulate", help="render a synthetic world bundle",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("script", nargs="?", default=None, help="scene script JSON")
    p.add_argument("--preset", choices=("standard",), default=None,
                   help="use a built-in scene instead of a script file")
    p.add_argument("--video-id", default=None, help="override the scene's video id")
    p.add_argument("--dump-script", default=None,
                   help="also write the effective scene script here")
    p.add_argument("-o", "--output", required=True, help="bundle directory")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inject", help="corrupt a simulator bundle",
                       epilog=_CONFIG_EPILOG, formatter_class=fmt)
    p.add_argument("bundle", help="simulator bundle directory")
    p.add_argument("injection", help="injection JSON (inline string or a file path)")
    p.add_argument("-o", "--output", required=True, help="corrupted bundle directory")
    _add_common(p)
    p.set_defaults(func=cmd_inject)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies

def _score_one_bundle(job):
    path, cfg, weights, fp_override = job
    bundle = read_bundle(path)
    bs = score_bundle(bundle, cfg)
    return build_report(bs, weights, fp_override=fp_override)


def cmd_score(args) -> int:
    cfg = load_config(args.config, args.overrides)
    weights = _resolve_weights(args).weights
    jobs = [(path, cfg, weights, args.fp_override) for path in args.bundles]
    if args.jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_score_one_bundle, jobs))
    else:
        reports = [_score_one_bundle(j) for j in jobs]
    reports.sort(key=lambda r: r["video_id"])
    doc = reports[0] if len(reports) == 1 else {"schema": 1, "videos": reports}
    write_report(doc, args.output)
    for r in reports:
        if args.scale_100:
            print(f"{r['video_id']} wcs_display={r['wcs_display']:g}")
        else:
            print(f"{r['video_id']} wcs={r['wcs']:.6f}")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = load_config(args.config, args.overrides)
    rows = read_manifest(args.manifest)
    scored = score_manifest(rows, cfg, equal_weights(), jobs=args.jobs)
    labelled = [(s.submetrics, s.human_score) for s in scored if s.human_score is not None]
    fit = fit_weights([x for x, _ in labelled], [y for _, y in labelled],
                      standardize=args.standardize)
    write_weight_file(fit, args.output)
    w = fit.weights
    print(f"fitted on {len(labelled)} videos: "
          f"w_op={w.w_op:.6g} w_rs={w.w_rs:.6g} w_cc={w.w_cc:.6g} w_fp={w.w_fp:.6g} "
          f"b={w.b:.6g} rmse={fit.rmse:.6g}")
    import numpy as np

    from .combiner import predict
    eq_pred = predict([x for x, _ in labelled], equal_weights())
    eq_rmse = float(np.sqrt(np.mean((eq_pred - np.array([y for _, y in labelled])) ** 2)))
    print(f"equal-weights baseline: rmse={eq_rmse:.6g}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    cfg = load_config(args.config, args.overrides)
    weights = _resolve_weights(args).weights
    rows = read_manifest(args.manifest)
    scored = score_manifest(rows, cfg, weights, jobs=args.jobs)
    agg = args.agg or cfg.harness.model_agg
    report = correlate(scored, model_agg=agg)
    doc = {
        "schema": 1,
        "n": report.n,
        "pearson": report.pearson,
        "spearman": report.spearman,
        "fisher_ci": [report.fisher_ci_low, report.fisher_ci_high],
        "per_model": [
            {"model_label": m.model_label, "n": m.n, "wcs": m.wcs, "human": m.human}
            for m in report.per_model
        ],
        "kendall_tau": report.kendall_tau,
        "metrics": metric_correlations(scored),
        "videos": [
            {"video_id": s.video_id, "wcs": s.wcs, "human_score": s.human_score}
            for s in scored
        ],
    }
    write_report(doc, args.output)
    print(f"n={report.n} pearson={report.pearson:.4f} spearman={report.spearman:.4f}")
    if args.table:
        print(f"{'metric':<16} {'pearson':>9} {'spearman':>9} {'n':>5}")
        for name, row in doc["metrics"].items():
            print(f"{name:<16} {row['pearson']:>9.4f} {row['spearman']:>9.4f} {row['n']:>5d}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = load_config(args.config, args.overrides)
    rows = [r for r in read_manifest(args.manifest) if r.human_score is not None]
    train_rows, val_rows = split_rows(rows, cfg.harness.split_seed, cfg.harness.val_fraction)
    if not val_rows:
        raise ValidationError("validation split is empty; lower harness.val_fraction or add rows")
    weights = equal_weights()
    train = score_manifest(train_rows, cfg, weights, jobs=args.jobs)
    val = score_manifest(val_rows, cfg, weights, jobs=args.jobs)
    baseline = fit_weights([s.submetrics for s in train], [s.human_score for s in train],
                           standardize=args.standardize)
    variants = ablate(
        [s.submetrics for s in train], [s.human_score for s in train],
        [s.submetrics for s in val], [s.human_score for s in val],
        standardize=args.standardize,
    )
    from .combiner import predict
    from .evalharness import pearson

    bl_pred = predict([s.submetrics for s in val], baseline.weights)
    try:
        bl_r = pearson(bl_pred, [s.human_score for s in val])
    except CorrelationError:
        bl_r = None
    doc = {
        "schema": 1,
        "n_train": len(train),
        "n_val": len(val),
        "baseline": {"weights": baseline.weights.as_dict(), "train_rmse": baseline.rmse,
                     "val_pearson": bl_r},
        "variants": [
            {"dropped": v.dropped, "weights": v.fit.weights.as_dict(),
             "train_rmse": v.train_rmse, "val_pearson": v.val_pearson}
            for v in variants
        ],
    }
    write_report(doc, args.output)
    for v in variants:
        r = "n/a" if v.val_pearson is None else f"{v.val_pearson:.4f}"
        print(f"drop {v.dropped}: train_rmse={v.train_rmse:.6g} val_pearson={r}")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg = load_config(args.config, args.overrides)
    weights = _resolve_weights(args).weights
    bundle = read_sim_bundle(args.bundle)
    if args.injections:
        with open(args.injections, "r", encoding="utf-8") as fh:
            injections = [Injection.from_dict(d) for d in json.load(fh)]
    else:
        injections = standard_injections(bundle)
    rows = sensitivity_suite(bundle, injections, weights, cfg)
    doc = {
        "schema": 1,
        "video_id": bundle.tracks.meta.video_id,
        "rows": [
            {
                "injection": r.injection, "applied": r.applied, "reason": r.reason,
                "clean": r.clean, "corrupted": r.corrupted,
                "delta_op": r.delta_op, "delta_rs": r.delta_rs, "delta_cc": r.delta_cc,
                "delta_fp": r.delta_fp, "delta_wcs": r.delta_wcs,
            }
            for r in rows
        ],
    }
    write_report(doc, args.output)
    for r in rows:
        if r.applied:
            print(f"{r.injection}: dOP={r.delta_op:+.4f} dRS={r.delta_rs:+.4f} "
                  f"dCC={r.delta_cc:+.4f} dFP={r.delta_fp:+.4f} dWCS={r.delta_wcs:+.4f}")
        else:
            print(f"{r.injection}: skipped ({r.reason})")
    return EXIT_OK


def _write_bundle_atomic(bundle, out_dir, writer) -> None:
    parent = os.path.dirname(os.path.abspath(out_dir)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(dir=parent, prefix=".tmp-bundle-")
    try:
        writer(bundle, tmp)
        if os.path.isdir(out_dir):
            shutil.rmtree(out_dir)
        os.replace(tmp, out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def cmd_simulate(args) -> int:
    load_config(args.config, args.overrides)  # validate, even though unused here
    if (args.script is None) == (args.preset is None):
        raise ValidationError("give exactly one of a script file or --preset")
    script = standard_scene() if args.preset else load_script(args.script)
    if args.video_id:
        script.video_id = args.video_id
    bundle = simulate(script)
    _write_bundle_atomic(bundle, args.output, write_sim_bundle)
    if args.dump_script:
        save_script(script, args.dump_script)
    print(f"simulated {script.video_id}: T={script.frame_count} "
          f"{script.height}x{script.width}, {len(script.objects)} objects, "
          f"{len(bundle.events)} events -> {args.output}")
    return EXIT_OK


def cmd_inject(args) -> int:
    load_config(args.config, args.overrides)
    bundle = read_sim_bundle(args.bundle)
    spec = args.injection
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        try:
            data = json.loads(spec)
        except json.JSONDecodeError as e:
            raise ValidationError(f"injection is neither a file nor valid JSON: {e}") from e
    try:
        injection = Injection.from_dict(data)
    except TypeError as e:
        raise ValidationError(f"bad injection spec: {e}") from e
    corrupted = inject(bundle, injection)
    _write_bundle_atomic(corrupted, args.output, write_sim_bundle)
    print(f"injected {injection.kind} -> {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ScriptError, InjectionError,
            FileNotFoundError, NotADirectoryError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (FitError, CorrelationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
