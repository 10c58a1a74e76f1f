"""Command-line interface.

Exit codes: 0 success, 1 validation (bad arguments, malformed config,
unknown preset), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import TissueBenchError


def _cmd_probe(args: argparse.Namespace) -> int:
    from dataclasses import replace

    from .harness import run_scenario
    from .presets import load_experiment_config
    from .telemetry import write_telemetry_csv

    cfg = load_experiment_config(args.tissue, seed=args.seed)
    if args.vision:
        cfg = replace(cfg, vision_enabled=True)
    samples, summary = run_scenario(cfg)
    write_telemetry_csv(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")
    print(f"  avg contact force : {summary.avg_contact_force_n:8.3f} N")
    print(f"  rest->probe delta : {summary.force_delta_rest_to_probe_n:8.3f} N")
    print(f"  probe duration    : {summary.probe_duration_s:8.3f} s")
    print(f"  dwell drift       : {summary.dwell_force_drift_n:8.3f} N")
    print(f"  max force         : {summary.max_force_n:8.3f} N")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    from .harness import run_scenario
    from .presets import load_experiment_config
    from .telemetry import write_telemetry_csv

    results = {}
    for label, source, out in (("a", args.a, args.out_a), ("b", args.b, args.out_b)):
        cfg = load_experiment_config(source, seed=args.seed)
        samples, summary = run_scenario(cfg)
        results[label] = summary
        if out:
            write_telemetry_csv(samples, out)
    a, b = results["a"], results["b"]
    print(f"{'':22s}{args.a:>14s}{args.b:>14s}")
    print(f"{'avg contact force N':22s}{a.avg_contact_force_n:14.3f}{b.avg_contact_force_n:14.3f}")
    print(f"{'rest->probe delta N':22s}{a.force_delta_rest_to_probe_n:14.3f}{b.force_delta_rest_to_probe_n:14.3f}")
    print(f"{'probe duration s':22s}{a.probe_duration_s:14.3f}{b.probe_duration_s:14.3f}")
    if a.force_delta_rest_to_probe_n > 0:
        ratio = b.force_delta_rest_to_probe_n / a.force_delta_rest_to_probe_n
        print(f"{'delta ratio b/a':22s}{ratio:14.3f}")
    return 0


def _cmd_dataset_build(args: argparse.Namespace) -> int:
    from .vision.dataset import AugmentationConfig, build_dataset

    aug = None if args.no_augment else AugmentationConfig(seed=args.seed)
    ds = build_dataset(
        n_base=args.n, aug=aug, seed=args.seed, keep_frames=args.frames
    )
    ds.write(args.out, write_frames=args.frames)
    sizes = ds.base_split_sizes()
    print(f"wrote {len(ds.records)} records ({args.n} base) to {args.out}")
    print(f"splits: train={sizes['train']} val={sizes['val']} test={sizes['test']}")
    return 0


def _read_manifest(path: Path):
    import csv

    from .vision.dataset import MANIFEST_COLUMNS

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise TissueBenchError(f"manifest missing columns: {missing}")
        return list(reader)


def _cmd_regressor_train(args: argparse.Namespace) -> int:
    from .vision import FeatureExtractor
    from .vision.regress import fit_area_regressor

    train_rows = _read_manifest(Path(args.dataset) / "train.csv")
    val_rows = _read_manifest(Path(args.dataset) / "val.csv")
    extractor = FeatureExtractor()
    reg = fit_area_regressor(
        [float(r["contour_area_px2"]) for r in train_rows],
        [float(r["ground_truth_pct"]) for r in train_rows],
        extractor.reference_area,
        degree=args.degree,
        val_areas=[float(r["contour_area_px2"]) for r in val_rows],
        val_deformations_pct=[float(r["ground_truth_pct"]) for r in val_rows],
    )
    reg.save(args.out)
    print(f"trained degree-{reg.degree} regressor on {reg.train_size} records")
    print(f"validation RMSE: {reg.val_rmse_pct:.4f}%")
    return 0


def _cmd_regressor_eval(args: argparse.Namespace) -> int:
    import numpy as np

    from .vision import FeatureExtractor
    from .vision.regress import AreaRegressor, predict_deformation

    reg = AreaRegressor.load(args.regressor)
    rows = _read_manifest(Path(args.dataset) / "test.csv")
    extractor = FeatureExtractor()
    errors = [
        predict_deformation(reg, float(r["contour_area_px2"]),
                            extractor.reference_area)
        - float(r["ground_truth_pct"])
        for r in rows
    ]
    rmse = float(np.sqrt(np.mean(np.square(errors))))
    print(f"test RMSE over {len(rows)} records: {rmse:.4f}%")
    return 0


def _cmd_vision_eval(args: argparse.Namespace) -> int:
    import numpy as np

    from .harness import evaluate_vision
    from .vision import FeatureExtractor, SoftmaxAreaClassifier, build_dataset
    from .vision.regress import fit_area_regressor

    ds = build_dataset(n_base=args.n, seed=args.seed)
    extractor = FeatureExtractor()
    classifier = SoftmaxAreaClassifier()
    train = ds.split_records("train")
    reg = fit_area_regressor(
        [r.contour_area_px2 for r in train],
        [r.ground_truth_pct for r in train],
        extractor.reference_area,
    )
    report = evaluate_vision(ds.records, classifier, extractor, regressor=reg)
    print(f"evaluated {report.n_evaluated} records")
    for name, acc in report.per_class_accuracy.items():
        shown = "n/a" if np.isnan(acc) else f"{acc:.1%}"
        print(f"  {name}: {shown}")
    print(f"confusion:\n{report.confusion}")
    print(f"regression RMSE: {report.regression_rmse_pct:.4f}%")
    print(f"mean |optimized - truth|: {report.mean_abs_optimized_error_pct:.4f}%")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceConfig, serve

    serve(ServiceConfig(
        host=args.host,
        port=args.port,
        tissue_preset=args.tissue,
        time_scale=args.time_scale,
        seed=args.seed,
    ))
    return 0


def _leaf_seed(leaf: argparse.ArgumentParser) -> None:
    # Accept --seed after the subcommand too; SUPPRESS keeps an absent leaf
    # flag from clobbering the top-level value.
    leaf.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                      help="master random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tissuebench",
        description="Tool-tissue interaction testbed: scenarios, datasets, "
                    "regression, and the live teleoperation service.",
    )
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probe", help="run one probe/dwell/retract scenario")
    p.add_argument("--tissue", default="ecoflex10",
                   help="preset name or JSON config path")
    p.add_argument("--out", required=True, help="telemetry CSV output path")
    p.add_argument("--vision", action="store_true",
                   help="populate the vision channels (slower)")
    _leaf_seed(p)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("compare", help="run two tissues through one schedule")
    p.add_argument("--a", default="ecoflex10")
    p.add_argument("--b", default="ecoflex30")
    p.add_argument("--out-a", default=None)
    p.add_argument("--out-b", default=None)
    _leaf_seed(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("dataset", help="dataset operations")
    dsub = p.add_subparsers(dest="dataset_command", required=True)
    b = dsub.add_parser("build", help="render and label a dataset")
    b.add_argument("--n", type=int, default=1500, help="base frame count")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--frames", action="store_true", help="also write PGM frames")
    b.add_argument("--no-augment", action="store_true")
    _leaf_seed(b)
    b.set_defaults(func=_cmd_dataset_build)

    p = sub.add_parser("regressor", help="train or evaluate the area regressor")
    rsub = p.add_subparsers(dest="regressor_command", required=True)
    t = rsub.add_parser("train")
    t.add_argument("--dataset", required=True, help="dataset directory")
    t.add_argument("--out", required=True, help="regressor JSON output path")
    t.add_argument("--degree", type=int, default=1)
    t.set_defaults(func=_cmd_regressor_train)
    e = rsub.add_parser("eval")
    e.add_argument("--regressor", required=True)
    e.add_argument("--dataset", required=True)
    e.set_defaults(func=_cmd_regressor_eval)

    p = sub.add_parser("vision", help="vision pipeline evaluation")
    vsub = p.add_subparsers(dest="vision_command", required=True)
    v = vsub.add_parser("eval")
    v.add_argument("--n", type=int, default=400)
    _leaf_seed(v)
    v.set_defaults(func=_cmd_vision_eval)

    p = sub.add_parser("serve", help="run the live teleoperation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8790)
    p.add_argument("--tissue", default="ecoflex10")
    p.add_argument("--time-scale", type=float, default=1.0)
    _leaf_seed(p)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are validation failures here
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except TissueBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
