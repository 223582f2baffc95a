"""Per-pixel composition of the three supervision sources.

Weak labels beat oracle-derived labels, which beat pseudo-labels; every
pixel of the fused map carries a tag naming the source that won.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DimensionMismatch
from .raster import LabelMap, ScalarField


class SourceTag(IntEnum):
    WEAK = 0
    SAM = 1
    PSEUDO = 2
    IGNORE = 3


@dataclass
class SupervisionMap:
    labels: LabelMap
    source: np.ndarray  # uint16 raster of SourceTag values

    def __post_init__(self):
        self.source = np.asarray(self.source, dtype=np.uint16)
        if self.source.shape != self.labels.labels.shape:
            raise DimensionMismatch("source tags misaligned with labels")
        tag_is_ignore = self.source == SourceTag.IGNORE
        label_is_ignore = self.labels.labels == self.labels.ignore_value
        if not np.array_equal(tag_is_ignore, label_is_ignore):
            raise ValueError("IGNORE tags must coincide with ignore labels")

    def tag_counts(self) -> dict[SourceTag, int]:
        return {
            tag: int(np.count_nonzero(self.source == tag)) for tag in SourceTag
        }

    def source_map(self) -> LabelMap:
        """Source tags as a 4-class label map (for LBL1 serialization)."""
        return LabelMap(self.source, class_count=4)


def filter_pseudo(
    pred: LabelMap, confidence: ScalarField, theta1: float
) -> LabelMap:
    """Keep predictions at confidence >= theta1, ignore the rest."""
    if not (0.0 < theta1 <= 1.0):
        raise ValueError("theta1 must lie in (0, 1]")
    if (pred.height, pred.width) != (confidence.height, confidence.width):
        raise DimensionMismatch("confidence misaligned with predictions")
    keep = confidence.values >= theta1
    labels = np.where(keep, pred.labels, pred.ignore_value).astype(np.uint16)
    return LabelMap(labels, pred.class_count, pred.ignore_value)


def compose_supervision(
    weak: LabelMap, sam: LabelMap, pseudo: LabelMap
) -> SupervisionMap:
    """Fuse the three label layers: first non-ignore of (weak, sam, pseudo)
    wins per pixel and its tag is recorded."""
    shapes = {m.labels.shape for m in (weak, sam, pseudo)}
    if len(shapes) != 1:
        raise DimensionMismatch("supervision layers differ in dimensions")
    ignore = weak.ignore_value
    out = np.full_like(weak.labels, ignore)
    tags = np.full(weak.labels.shape, int(SourceTag.IGNORE), dtype=np.uint16)
    for layer, tag in (
        (pseudo, SourceTag.PSEUDO),
        (sam, SourceTag.SAM),
        (weak, SourceTag.WEAK),
    ):
        labeled = layer.labels != layer.ignore_value
        out[labeled] = layer.labels[labeled]
        tags[labeled] = int(tag)
    class_count = max(weak.class_count, sam.class_count, pseudo.class_count)
    return SupervisionMap(LabelMap(out, class_count, ignore), tags)


def layer_from_tag(sup: SupervisionMap, tag: SourceTag) -> LabelMap:
    """Extract one source's labels from a fused map (others become ignore)."""
    labels = np.where(
        sup.source == int(tag), sup.labels.labels, sup.labels.ignore_value
    ).astype(np.uint16)
    return LabelMap(labels, sup.labels.class_count, sup.labels.ignore_value)
