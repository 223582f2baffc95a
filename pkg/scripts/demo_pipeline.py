#!/usr/bin/env python3
"""Walk the full loop on one synthetic scene: bootstrap sparse points into
a coarse map, then alternate simulated-teacher pseudo-labels with oracle
resampling on the M-iteration schedule, printing mIoU as the labels grow.

The "teacher" here anneals toward ground truth, standing in for the
external segmentation network that consumes the supervision maps.

Usage: python scripts/demo_pipeline.py [--seed 11] [--iterations 16]
"""

import argparse

import numpy as np

from sesam.fusion import compose_supervision, filter_pseudo
from sesam.metrics import evaluate
from sesam.oracle import MockOracle
from sesam.raster import IGNORE_VALUE, LabelMap, ScalarField
from sesam.refine import (
    RefinementConfig,
    WeakAnnotation,
    WeakKind,
    bootstrap_coarse,
    refine_labels,
    should_resample,
)
from sesam.scenes import build_suite, points_from_gt


def simulated_teacher(gt: LabelMap, progress: float, rng) -> tuple[LabelMap, ScalarField]:
    """Pseudo-labels that sharpen as training 'progresses': confidence on
    foreground ramps toward 1, with some mislabeled speckle early on."""
    noise = rng.random(gt.labels.shape) < 0.3 * (1 - progress)
    labels = np.where(noise, IGNORE_VALUE, gt.labels).astype(np.uint16)
    labels[gt.labels == 0] = IGNORE_VALUE
    conf = np.where(gt.labels != 0, 0.94 + 0.06 * progress, 0.5)
    conf = conf - 0.01 * rng.random(gt.labels.shape)
    return LabelMap(labels, gt.class_count), ScalarField(np.clip(conf, 0, 1))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--iterations", type=int, default=16)
    args = ap.parse_args()

    scene = build_suite(count=1, seed=args.seed)[0]
    gt = scene.ground_truth()
    sparse = points_from_gt(gt, seed=args.seed)
    cfg = RefinementConfig(seed=args.seed)
    oracle = MockOracle(scene)
    rng = np.random.default_rng(args.seed)

    coarse = bootstrap_coarse(
        WeakAnnotation(WeakKind.POINT, sparse), oracle, cfg, scene.image_ref
    )
    print(f"bootstrap: mIoU {evaluate(coarse, gt, exclude_classes=(0,)).miou:.4f}")

    refined = coarse
    for it in range(args.iterations):
        if not should_resample(it, cfg.resample_period_m):
            continue
        pseudo = simulated_teacher(gt, progress=it / max(1, args.iterations - 1), rng=rng)
        refined, audit = refine_labels(
            coarse, oracle, cfg, pseudo=pseudo, image_ref=scene.image_ref
        )
        sup = compose_supervision(
            coarse,
            LabelMap(
                np.where(
                    coarse.labels == IGNORE_VALUE, refined.labels, IGNORE_VALUE
                ).astype(np.uint16),
                refined.class_count,
            ),
            filter_pseudo(pseudo[0], pseudo[1], cfg.theta1),
        )
        counts = {tag.name: n for tag, n in sup.tag_counts().items()}
        miou = evaluate(refined, gt, exclude_classes=(0,)).miou
        print(
            f"iteration {it:2d}: oracle pass over {len(audit)} instances, "
            f"mIoU {miou:.4f}, supervision {counts}"
        )
        # the refined labels become the next iteration's coarse annotation
        coarse = refined

    final = evaluate(refined, gt, exclude_classes=(0,))
    print(f"final: mIoU {final.miou:.4f}, recall {final.recall:.4f}")


if __name__ == "__main__":
    main()
