"""Segmentation evaluation: per-class IoU, mIoU, added-label precision/
recall/F1, and the weak-over-fine performance ratio."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoValidPixels, ZeroFineBaseline
from .raster import BinaryMask, LabelMap


@dataclass
class EvalReport:
    per_class_iou: list[float | None]  # None = class absent from gt and pred
    miou: float
    precision: float
    recall: float
    f1: float
    confusion_counts: list[tuple[int, int, int]]  # (tp, fp, fn) per class
    evaluated_classes: list[int]  # classes entering the mIoU mean

    def text_block(self) -> str:
        lines = [
            f"miou: {self.miou:.4f}",
            f"precision: {self.precision:.4f}",
            f"recall: {self.recall:.4f}",
            f"f1: {self.f1:.4f}",
            f"classes_in_mean: {','.join(str(c) for c in self.evaluated_classes)}",
        ]
        return "\n".join(lines)

    def per_class_csv(self) -> str:
        rows = ["class,iou,tp,fp,fn"]
        for c, iou in enumerate(self.per_class_iou):
            if iou is None:
                continue
            tp, fp, fn = self.confusion_counts[c]
            rows.append(f"{c},{iou:.6f},{tp},{fp},{fn}")
        return "\n".join(rows)


def evaluate(
    pred: LabelMap,
    gt: LabelMap,
    added_region: BinaryMask | None = None,
    exclude_classes: tuple[int, ...] = (),
) -> EvalReport:
    """Compare a prediction against ground truth.

    Ground-truth ignore pixels never count. When ``added_region`` is
    given, all counts are restricted to it. ``exclude_classes`` drops
    classes from the mIoU mean and the micro precision/recall pools
    (their pixels still count as false positives of other classes).
    An ignore-valued prediction on a labeled pixel is a false negative.
    """
    if pred.labels.shape != gt.labels.shape:
        raise DimensionMismatch("prediction and ground truth differ in size")
    valid = gt.labels != gt.ignore_value
    if added_region is not None:
        if added_region.bits.shape != gt.labels.shape:
            raise DimensionMismatch("added_region misaligned with ground truth")
        valid = valid & added_region.bits
    if not valid.any():
        raise NoValidPixels("no ground-truth-labeled pixels in the region")

    n_classes = max(pred.class_count, gt.class_count)
    p = pred.labels[valid]
    g = gt.labels[valid]
    excluded = set(exclude_classes)

    confusion: list[tuple[int, int, int]] = []
    per_class: list[float | None] = []
    in_mean: list[int] = []
    tp_sum = fp_sum = fn_sum = 0
    for c in range(n_classes):
        pred_c = p == c
        gt_c = g == c
        tp = int(np.count_nonzero(pred_c & gt_c))
        fp = int(np.count_nonzero(pred_c & ~gt_c))
        fn = int(np.count_nonzero(gt_c & ~pred_c))
        confusion.append((tp, fp, fn))
        if tp + fp + fn == 0:
            per_class.append(None)
            continue
        per_class.append(tp / (tp + fp + fn))
        if gt_c.any() and c not in excluded:
            in_mean.append(c)
        if c not in excluded:
            tp_sum += tp
            fp_sum += fp
            fn_sum += fn

    if not in_mean:
        raise NoValidPixels("every ground-truth class is excluded")
    miou = float(np.mean([per_class[c] for c in in_mean]))
    precision = tp_sum / (tp_sum + fp_sum) if tp_sum + fp_sum else 0.0
    recall = tp_sum / (tp_sum + fn_sum) if tp_sum + fn_sum else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(per_class, miou, precision, recall, f1, confusion, in_mean)


def wvf(weak_miou: float, fine_miou: float) -> float:
    """Weak-over-fine supervision performance ratio, in percent."""
    if fine_miou <= 0.0:
        raise ZeroFineBaseline("fine-supervision baseline must be positive")
    return 100.0 * weak_miou / fine_miou
