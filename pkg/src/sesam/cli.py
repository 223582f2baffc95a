"""Operator entry point.

Subcommands: refine, bootstrap, evaluate, ablate, cost, gen-scene. All
stochastic stages derive from --seed, so a recorded manifest reproduces a
run byte-for-byte. The FILE_PROTOCOL oracle executable comes from
--oracle-cmd or the SESAM_ORACLE_CMD environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import ablate as ablate_mod
from . import lbl, scenes
from .cost import AnnotationKind, annotation_hours, cost_performance_table, table_csv
from .errors import SesamError
from .fusion import SourceTag, compose_supervision
from .metrics import evaluate
from .oracle import MockOracle, exact_oracle
from .raster import LabelMap
from .refine import (
    RefinementConfig,
    WeakAnnotation,
    WeakKind,
    bootstrap_coarse,
    refine_labels,
)
from .sampling import Strategy
from .selection import SelectionStrategy
from .wire import FileProtocolOracle


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except SesamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sesam", description="weak-label refinement toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_refine = sub.add_parser("refine", help="refine weak labels with the oracle")
    p_refine.add_argument("--weak", required=True, nargs="+", help="LBL1 weak label file(s)")
    p_refine.add_argument("--kind", default="coarse", choices=[k.value for k in WeakKind])
    p_refine.add_argument("--oracle", required=True, choices=["mock", "exact", "file"])
    p_refine.add_argument("--scene", nargs="*", default=[], help="scene JSON per input (mock/exact oracle)")
    p_refine.add_argument("--image-ref", nargs="*", default=[], help="image reference per input (file oracle)")
    p_refine.add_argument("--oracle-cmd", default=None, help="adapter command for --oracle file")
    p_refine.add_argument("--pseudo-labels", default=None, help="LBL1 pseudo-label file")
    p_refine.add_argument("--pseudo-conf", default=None, help="SCF1 confidence file")
    p_refine.add_argument("--out", required=True, help="output directory")
    p_refine.add_argument("--jobs", type=int, default=1, help="parallel workers across images")
    p_refine.add_argument("--iteration", type=int, default=0, help="training iteration (resampling schedule)")
    _config_flags(p_refine)
    p_refine.set_defaults(func=cmd_refine)

    p_boot = sub.add_parser("bootstrap", help="coarse masks from sparse labels")
    p_boot.add_argument("--weak", required=True)
    p_boot.add_argument("--kind", required=True, choices=["point", "scribble"])
    p_boot.add_argument("--oracle", required=True, choices=["mock", "exact", "file"])
    p_boot.add_argument("--scene", default=None)
    p_boot.add_argument("--image-ref", default=None)
    p_boot.add_argument("--oracle-cmd", default=None)
    p_boot.add_argument("--out", required=True, help="output LBL1 path")
    _config_flags(p_boot)
    p_boot.set_defaults(func=cmd_bootstrap)

    p_eval = sub.add_parser("evaluate", help="compare a prediction to ground truth")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--added-region", default=None, help="LBL1 mask restricting the counts")
    p_eval.add_argument("--exclude", default="", help="comma-separated class ids to drop from the mean")
    p_eval.add_argument("--csv", default=None, help="write the per-class table here")
    p_eval.set_defaults(func=cmd_evaluate)

    p_abl = sub.add_parser("ablate", help="sweep samplers/selection/points/thresholds")
    p_abl.add_argument("--suite", default=None, help="directory of scene_*.json (default: built-in suite)")
    p_abl.add_argument("--count", type=int, default=20, help="built-in suite size")
    p_abl.add_argument("--sweep", default="all", choices=["sampler", "selection", "n", "tau", "all"])
    p_abl.add_argument("--noise", type=int, default=2)
    p_abl.add_argument("--erosion", type=int, default=1)
    p_abl.add_argument("--out", default=None, help="write CSV here (default stdout)")
    _config_flags(p_abl)
    p_abl.set_defaults(func=cmd_ablate)

    p_cost = sub.add_parser("cost", help="annotation-cost arithmetic")
    p_cost.add_argument("kind", nargs="?", default=None, help="fine|coarse|scribble|point")
    p_cost.add_argument("n_images", nargs="?", type=int, default=None)
    p_cost.add_argument("--entries", nargs="*", default=[], help="kind:n_images:miou rows for the table")
    p_cost.set_defaults(func=cmd_cost)

    p_gen = sub.add_parser("gen-scene", help="generate mock scenes and weak labels")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--count", type=int, default=1)
    p_gen.add_argument("--seed", type=int, default=7)
    p_gen.add_argument("--width", type=int, default=96)
    p_gen.add_argument("--height", type=int, default=96)
    p_gen.add_argument("--noise", type=int, default=0)
    p_gen.add_argument("--erosion", type=int, default=2)
    p_gen.set_defaults(func=cmd_gen_scene)

    return parser


def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON config file (flags override)")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tau1", type=float, default=None)
    p.add_argument("--tau2", type=float, default=None)
    p.add_argument("--theta1", type=float, default=None)
    p.add_argument("--theta2", type=float, default=None)
    p.add_argument("--resample-period", type=int, default=None)
    p.add_argument("--connectivity", type=int, default=None, choices=[4, 8])
    p.add_argument("--sampler", default=None, choices=[s.value for s in Strategy])
    p.add_argument("--selection", default=None, choices=[s.value for s in SelectionStrategy])
    p.add_argument("--seed", type=int, default=None)


def _resolve_config(args, parser) -> RefinementConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    overrides = {
        "k": args.k,
        "tau1": args.tau1,
        "tau2": args.tau2,
        "theta1": args.theta1,
        "theta2": args.theta2,
        "resample_period_m": args.resample_period,
        "connectivity": args.connectivity,
        "sampler_strategy": args.sampler,
        "selection_strategy": args.selection,
        "seed": args.seed,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RefinementConfig.from_dict(base)
    except (SesamError, TypeError, ValueError) as exc:
        parser.error(f"invalid configuration: {exc}")


def _make_oracle(args, parser, scene_path: str | None):
    if args.oracle in ("mock", "exact"):
        if not scene_path:
            parser.error("--scene is required with the mock/exact oracle")
        scene = scenes.load_scene(scene_path)
        oracle = exact_oracle(scene) if args.oracle == "exact" else MockOracle(scene)
        return oracle, scene.image_ref
    oracle = FileProtocolOracle(args.oracle_cmd)
    return oracle, None


def _refine_one(job: dict) -> dict:
    """Worker for one image; must stay picklable for --jobs."""
    args_ns = argparse.Namespace(**job["oracle_args"])
    cfg = RefinementConfig.from_dict(job["config"])
    parser = argparse.ArgumentParser()
    parser.error = lambda msg: (_ for _ in ()).throw(SesamError(msg))
    oracle, scene_ref = _make_oracle(args_ns, parser, job["scene"])
    image_ref = job["image_ref"] or scene_ref or Path(job["weak"]).stem
    weak_map = lbl.read_label_map(job["weak"])

    t0 = time.perf_counter()
    kind = WeakKind(job["kind"])
    if kind is not WeakKind.COARSE:
        weak_map = bootstrap_coarse(
            WeakAnnotation(kind, weak_map), oracle, cfg, image_ref
        )

    pseudo = None
    if job["pseudo_labels"]:
        plab = lbl.read_label_map(job["pseudo_labels"])
        pconf = lbl.read_scalar_field(job["pseudo_conf"])
        pseudo = (plab, pconf)

    refined, audit = refine_labels(weak_map, oracle, cfg, pseudo, image_ref)

    out_dir = Path(job["out"])
    stem = job["stem"]
    lbl.write_label_map(out_dir / f"sesam{stem}.lbl", refined)

    from .refine import oracle_layer

    sam_layer = oracle_layer(refined, weak_map)
    if pseudo is not None:
        from .fusion import filter_pseudo

        pseudo_layer = filter_pseudo(pseudo[0], pseudo[1], cfg.theta1)
    else:
        pseudo_layer = LabelMap.full_ignore(
            refined.width, refined.height, refined.class_count
        )
    sup = compose_supervision(weak_map, sam_layer, pseudo_layer)
    lbl.write_label_map(out_dir / f"supervision_labels{stem}.lbl", sup.labels)
    lbl.write_label_map(out_dir / f"supervision_source{stem}.lbl", sup.source_map())
    (out_dir / f"audit{stem}.jsonl").write_text(
        "".join(rec.to_json_line() + "\n" for rec in audit)
    )
    counts = sup.tag_counts()
    return {
        "weak": job["weak"],
        "image_ref": image_ref,
        "stem": stem,
        "seconds": round(time.perf_counter() - t0, 4),
        "instances": len(audit),
        "pixel_counts": {tag.name.lower(): counts[tag] for tag in SourceTag},
    }


def cmd_refine(args, parser) -> int:
    cfg = _resolve_config(args, parser)
    from .refine import should_resample

    if not should_resample(args.iteration, cfg.resample_period_m):
        print(
            f"iteration {args.iteration}: oracle pass skipped "
            f"(resample period {cfg.resample_period_m})"
        )
        return 0
    if args.oracle in ("mock", "exact") and len(args.scene) != len(args.weak):
        parser.error("--scene must pair one scene JSON with each --weak input")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    oracle_args = {
        "oracle": args.oracle,
        "oracle_cmd": args.oracle_cmd,
    }
    jobs = []
    multi = len(args.weak) > 1
    for i, weak_path in enumerate(args.weak):
        jobs.append(
            {
                "weak": weak_path,
                "kind": args.kind,
                "scene": args.scene[i] if i < len(args.scene) else None,
                "image_ref": args.image_ref[i] if i < len(args.image_ref) else None,
                "pseudo_labels": args.pseudo_labels,
                "pseudo_conf": args.pseudo_conf,
                "out": str(out_dir),
                "stem": f"_{Path(weak_path).stem}" if multi else "",
                "config": cfg.to_dict(),
                "oracle_args": oracle_args,
            }
        )
    if args.pseudo_labels and not args.pseudo_conf:
        parser.error("--pseudo-labels requires --pseudo-conf")

    t0 = time.perf_counter()
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_refine_one, jobs))
    else:
        results = [_refine_one(job) for job in jobs]

    manifest = {
        "command": "refine",
        "config": cfg.to_dict(),
        "oracle": args.oracle,
        "kind": args.kind,
        "seed": cfg.seed,
        "iteration": args.iteration,
        "inputs": args.weak,
        "scenes": args.scene,
        "out": str(out_dir),
        "total_seconds": round(time.perf_counter() - t0, 4),
        "images": results,
        "trainer_handoff": asdict(cfg.trainer_handoff),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for r in results:
        print(
            f"{r['image_ref']}: {r['instances']} instances, "
            f"pixels {r['pixel_counts']}"
        )
    return 0


def cmd_bootstrap(args, parser) -> int:
    cfg = _resolve_config(args, parser)
    oracle, scene_ref = _make_oracle(args, parser, args.scene)
    image_ref = args.image_ref or scene_ref or Path(args.weak).stem
    weak_map = lbl.read_label_map(args.weak)
    coarse = bootstrap_coarse(
        WeakAnnotation(WeakKind(args.kind), weak_map), oracle, cfg, image_ref
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    lbl.write_label_map(args.out, coarse)
    labeled = int((coarse.labels != coarse.ignore_value).sum())
    print(f"{image_ref}: bootstrapped {labeled} labeled pixels -> {args.out}")
    return 0


def cmd_evaluate(args, parser) -> int:
    pred = lbl.read_label_map(args.pred)
    gt = lbl.read_label_map(args.gt)
    region = None
    if args.added_region:
        region = lbl.read_mask(args.added_region)
    exclude = tuple(int(c) for c in args.exclude.split(",") if c.strip() != "")
    report = evaluate(pred, gt, added_region=region, exclude_classes=exclude)
    print(report.text_block())
    csv = report.per_class_csv()
    if args.csv:
        Path(args.csv).write_text(csv + "\n")
    else:
        print(csv)
    return 0


def cmd_ablate(args, parser) -> int:
    cfg = _resolve_config(args, parser)
    if args.suite:
        paths = sorted(Path(args.suite).glob("scene_*.json"))
        if not paths:
            parser.error(f"no scene_*.json under {args.suite}")
        suite = [scenes.load_scene(p) for p in paths]
    else:
        suite = scenes.build_suite(count=args.count, seed=cfg.seed or 7)
    rows = []
    if args.sweep in ("sampler", "all"):
        rows += ablate_mod.sweep_samplers(suite, cfg, args.erosion, args.noise)
    if args.sweep in ("selection", "all"):
        rows += ablate_mod.sweep_selection(suite, cfg, args.erosion, args.noise)
    if args.sweep in ("n", "all"):
        rows += ablate_mod.sweep_point_count(suite, cfg, range(1, 11), args.erosion, args.noise)
    if args.sweep in ("tau", "all"):
        rows += ablate_mod.sweep_thresholds(suite, cfg, erosion=args.erosion, noise=args.noise)
    csv = ablate_mod.results_csv(rows)
    if args.out:
        Path(args.out).write_text(csv + "\n")
    print(csv)
    return 0


def cmd_cost(args, parser) -> int:
    if args.entries:
        entries = []
        for spec in args.entries:
            try:
                kind, n, miou = spec.split(":")
                entries.append((AnnotationKind(kind.lower()), int(n), float(miou)))
            except ValueError:
                parser.error(f"bad --entries item {spec!r}, want kind:n:miou")
        print(table_csv(cost_performance_table(entries)))
        return 0
    if args.kind is None or args.n_images is None:
        parser.error("give `cost KIND N_IMAGES` or --entries rows")
    hours = annotation_hours(AnnotationKind(args.kind.lower()), args.n_images)
    print(f"{hours:.4f}")
    return 0


def cmd_gen_scene(args, parser) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        scene = scenes.generate_scene(
            args.seed * 1000 + i,
            width=args.width,
            height=args.height,
            noise=args.noise,
            image_ref=f"suite-{args.seed}-{i:03d}",
        )
        stem = f"_{i:03d}" if args.count > 1 else ""
        scenes.save_scene(out_dir / f"scene{stem}.json", scene)
        gt = scene.ground_truth()
        lbl.write_label_map(out_dir / f"gt{stem}.lbl", gt)
        lbl.write_label_map(
            out_dir / f"coarse{stem}.lbl", scenes.coarse_from_gt(gt, args.erosion)
        )
        lbl.write_label_map(
            out_dir / f"points{stem}.lbl", scenes.points_from_gt(gt, seed=scene.seed)
        )
        lbl.write_label_map(
            out_dir / f"scribbles{stem}.lbl", scenes.scribbles_from_gt(gt)
        )
    print(f"wrote {args.count} scene(s) under {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
