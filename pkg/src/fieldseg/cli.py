"""Command-line pipeline: synth -> fields -> segment -> eval.

Subcommands map 1:1 onto the module operations; `pipeline` chains all
four on one output directory. Every subcommand processes files
independently and exits nonzero if any file fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diffusion import LEAKY, RENORMALIZED, DiffusionConfig, run_diffusion
from .edt import edt_field_map
from .grid import LabelImage, Segmentation
from .io import (
    read_fmap,
    read_label_png,
    write_field_png,
    write_fmap,
    write_label_png,
    write_label_viz_png,
)
from .metrics import evaluate, write_metrics_csv
from .poisson import poisson_field_map_with_reports
from .synth import SynthSpec, generate_dataset
from .watershed import WatershedParams, segment

_RULES = {"leaky": LEAKY, "renormalized": RENORMALIZED}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_synth(args) -> int:
    spec = SynthSpec(
        seed=args.seed,
        width=args.width,
        height=args.height,
        n_instances=args.n_instances,
        shape_kind=args.shape,
        radius_range=(args.radius_min, args.radius_max),
        min_gap=args.min_gap,
        touching_fraction=args.touching_fraction,
        noise_amplitude=args.noise,
    )
    stems = generate_dataset(spec, args.n_images, args.out)
    print(f"wrote {len(stems)} image/label pairs to {args.out}")
    return 0


def _compute_field(labels: LabelImage, args):
    """Returns (field, report_dict) for the chosen method."""
    if args.method == "poisson":
        field, reports = poisson_field_map_with_reports(labels)
        detail = {
            "max_residual": max((r.max_residual for r in reports), default=0.0),
            "instances": len(reports),
            "strategies": sorted({r.solve_strategy for r in reports}),
        }
    elif args.method == "diffusion":
        config = DiffusionConfig(
            convergence_epsilon=args.diffusion_eps,
            max_iterations=args.max_iterations,
            boundary_rule=_RULES[args.boundary_rule],
        )
        field, report = run_diffusion(labels, config)
        detail = {
            "iterations": report.iterations,
            "instances": len(report.iterations),
        }
    else:
        field = edt_field_map(labels)
        detail = {"instances": labels.max_id}
    return field, detail


def cmd_fields(args) -> int:
    labels_dir = Path(args.labels)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(labels_dir.glob("*.png"))
    if not paths:
        print(f"warning: no label PNGs found in {labels_dir}", file=sys.stderr)
        return 0
    report: dict[str, dict] = {}
    failures = 0
    for path in paths:
        try:
            labels = read_label_png(path)
            field, detail = _compute_field(labels, args)
        except (ValueError, RuntimeError, OSError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        write_fmap(field, out_dir / f"{path.stem}.fmap")
        if args.viz:
            viz_dir = out_dir / "viz"
            viz_dir.mkdir(exist_ok=True)
            write_field_png(field, viz_dir / f"{path.stem}.png")
        report[path.stem] = detail
    with open(out_dir / "report.json", "w") as fh:
        json.dump({"method": args.method, "images": report}, fh, indent=2, sort_keys=True)
    print(f"wrote {len(report)} field maps to {out_dir} ({args.method})")
    return 1 if failures else 0


def cmd_segment(args) -> int:
    fields_dir = Path(args.fields)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = WatershedParams(
        background_epsilon=args.epsilon, h=args.h, connectivity=args.connectivity
    )
    paths = sorted(fields_dir.glob("*.fmap"))
    if not paths:
        print(f"warning: no FMAP files found in {fields_dir}", file=sys.stderr)
        return 0
    failures = 0
    for path in paths:
        try:
            field = read_fmap(path)
            seg = segment(field, params)
        except (ValueError, RuntimeError, OSError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        write_label_png(LabelImage(seg.instance_map), out_dir / f"{path.stem}.png")
        if args.viz:
            viz_dir = out_dir / "viz"
            viz_dir.mkdir(exist_ok=True)
            write_label_viz_png(seg.instance_map, viz_dir / f"{path.stem}.png")
    print(f"wrote {len(paths) - failures} segmentations to {out_dir}")
    return 1 if failures else 0


def cmd_eval(args) -> int:
    gt_dir = Path(args.gt)
    pred_dir = Path(args.pred)
    gt_stems = {p.stem for p in gt_dir.glob("*.png")}
    pred_stems = {p.stem for p in pred_dir.glob("*.png")}
    if gt_stems != pred_stems:
        orphans = sorted(gt_stems ^ pred_stems)
        return _fail(f"gt/pred filename mismatch, orphans: {', '.join(orphans)}")
    rows = []
    for stem in sorted(gt_stems):
        gt = read_label_png(gt_dir / f"{stem}.png")
        pred_labels = read_label_png(pred_dir / f"{stem}.png")
        pred = Segmentation(pred_labels.labels, pred_labels.labels == 0)
        rows.append((stem, evaluate(gt, pred)))
    write_metrics_csv(rows, args.out)
    if rows:
        mean = sum(r.pq for _, r in rows) / len(rows)
        print(f"evaluated {len(rows)} images, mean PQ {mean:.4f} -> {args.out}")
    else:
        print(f"evaluated 0 images -> {args.out}")
    return 0


def cmd_pipeline(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rc = cmd_synth(argparse.Namespace(**{**vars(args), "out": out}))
    if rc:
        return rc
    rc = cmd_fields(argparse.Namespace(**{**vars(args), "labels": out / "labels", "out": out / "fields"}))
    if rc:
        return rc
    rc = cmd_segment(argparse.Namespace(**{**vars(args), "fields": out / "fields", "out": out / "pred"}))
    if rc:
        return rc
    return cmd_eval(
        argparse.Namespace(
            **{**vars(args), "gt": out / "labels", "pred": out / "pred", "out": out / "metrics.csv"}
        )
    )


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-images", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--n-instances", type=int, default=6)
    p.add_argument("--shape", choices=["disk", "ellipse", "blob"], default="disk")
    p.add_argument("--radius-min", type=float, default=4.0)
    p.add_argument("--radius-max", type=float, default=10.0)
    p.add_argument("--min-gap", type=int, default=2)
    p.add_argument("--touching-fraction", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.05)


def _add_field_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=["poisson", "diffusion", "edt"], default="poisson")
    p.add_argument("--diffusion-eps", type=float, default=0.01)
    p.add_argument("--boundary-rule", choices=["leaky", "renormalized"], default="leaky")
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.add_argument("--viz", action="store_true")


def _add_watershed_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--h", type=float, default=0.30)
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=8)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fieldseg",
        description="Field-map cell segmentation: synthesize, generate fields, segment, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic image/label dataset")
    p.add_argument("--out", required=True)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fields", help="compute field maps from label images")
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    _add_field_flags(p)
    p.set_defaults(func=cmd_fields)

    p = sub.add_parser("segment", help="watershed-segment field maps")
    p.add_argument("--fields", required=True)
    p.add_argument("--out", required=True)
    _add_watershed_flags(p)
    p.add_argument("--viz", action="store_true")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="synth + fields + segment + eval in one run")
    p.add_argument("--out", required=True)
    _add_synth_flags(p)
    _add_field_flags(p)
    _add_watershed_flags(p)
    p.set_defaults(func=cmd_pipeline)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
