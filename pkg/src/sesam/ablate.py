"""Sweep drivers: run the refinement pipeline over a scene suite under
varying samplers, selection strategies, point counts, and thresholds,
scoring each setting on the labels it added."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .metrics import evaluate
from .oracle import MockOracle, MockScene, with_noise
from .raster import BinaryMask, LabelMap
from .refine import RefinementConfig, refine_labels
from .sampling import Strategy
from .scenes import BACKGROUND, coarse_from_gt, corner_confidence
from .selection import SelectionStrategy

SAMPLER_ORDER = [
    Strategy.SKELETON_GRID,
    Strategy.RANDOM,
    Strategy.CENTER,
    Strategy.BOUNDARY,
    Strategy.TOP_CONFIDENCE,
]
SELECTION_ORDER = [
    SelectionStrategy.WEAK_AWARE,
    SelectionStrategy.BEST_SCORE,
    SelectionStrategy.RANDOM,
]


@dataclass(frozen=True)
class SweepResult:
    setting: str
    precision: float
    recall: float
    f1: float
    miou: float


def added_region(weak: LabelMap, refined: LabelMap, gt: LabelMap) -> BinaryMask:
    """Pixels the refinement was responsible for: unlabeled in the weak
    map and either carrying a foreground ground-truth class or written by
    the refinement (so both misses and spills count)."""
    unlabeled = weak.labels == weak.ignore_value
    needed = (gt.labels != BACKGROUND) & (gt.labels != gt.ignore_value)
    written = refined.labels != refined.ignore_value
    return BinaryMask(unlabeled & (needed | written))


def run_suite(
    scenes: list[MockScene],
    cfg: RefinementConfig,
    erosion: int = 1,
    noise: int | None = None,
) -> SweepResult:
    """One pipeline pass over every scene; added-label counts are pooled
    across the suite before computing precision/recall/F1."""
    tp = fp = fn = 0
    mious: list[float] = []
    for scene in scenes:
        run = with_noise(scene, noise) if noise is not None else scene
        gt = run.ground_truth()
        weak = coarse_from_gt(gt, erosion)
        oracle = MockOracle(run)
        conf = corner_confidence(run.width, run.height, seed=run.seed)
        pseudo = (LabelMap.full_ignore(run.width, run.height, gt.class_count), conf)
        refined, _ = refine_labels(
            weak, oracle, cfg, pseudo=pseudo, image_ref=run.image_ref
        )
        region = added_region(weak, refined, gt)
        if region.area == 0:
            continue
        report = evaluate(
            refined, gt, added_region=region, exclude_classes=(BACKGROUND,)
        )
        for c in range(1, max(gt.class_count, refined.class_count)):
            if c < len(report.confusion_counts):
                ctp, cfp, cfn = report.confusion_counts[c]
                tp, fp, fn = tp + ctp, fp + cfp, fn + cfn
        full = evaluate(refined, gt, exclude_classes=(BACKGROUND,))
        mious.append(full.miou)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SweepResult("", precision, recall, f1, float(np.mean(mious)))


def sweep_samplers(
    scenes: list[MockScene],
    cfg: RefinementConfig,
    erosion: int = 1,
    noise: int | None = None,
) -> list[SweepResult]:
    out = []
    for strategy in SAMPLER_ORDER:
        res = run_suite(
            scenes, replace(cfg, sampler_strategy=strategy), erosion, noise
        )
        out.append(replace(res, setting=strategy.value))
    return out


def sweep_selection(
    scenes: list[MockScene],
    cfg: RefinementConfig,
    erosion: int = 1,
    noise: int | None = None,
) -> list[SweepResult]:
    out = []
    for strategy in SELECTION_ORDER:
        res = run_suite(
            scenes, replace(cfg, selection_strategy=strategy), erosion, noise
        )
        out.append(replace(res, setting=strategy.value))
    return out


def sweep_point_count(
    scenes: list[MockScene],
    cfg: RefinementConfig,
    ks: range = range(1, 11),
    erosion: int = 1,
    noise: int | None = None,
) -> list[SweepResult]:
    out = []
    for k in ks:
        res = run_suite(scenes, replace(cfg, k=k), erosion, noise)
        out.append(replace(res, setting=f"n={k}"))
    return out


def sweep_thresholds(
    scenes: list[MockScene],
    cfg: RefinementConfig,
    tau1s: tuple[float, ...] = (0.1, 0.3, 0.5),
    tau2s: tuple[float, ...] = (0.5, 0.7, 0.9),
    erosion: int = 1,
    noise: int | None = None,
) -> list[SweepResult]:
    out = []
    for t1 in tau1s:
        for t2 in tau2s:
            res = run_suite(
                scenes, replace(cfg, tau1=t1, tau2=t2), erosion, noise
            )
            out.append(replace(res, setting=f"tau=({t1},{t2})"))
    return out


def results_csv(rows: list[SweepResult]) -> str:
    out = ["setting,precision,recall,f1,miou"]
    for r in rows:
        out.append(
            f"{r.setting},{r.precision:.4f},{r.recall:.4f},{r.f1:.4f},{r.miou:.4f}"
        )
    return "\n".join(out)
