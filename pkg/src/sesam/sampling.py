"""Point-prompt selection from instance masks.

The default strategy partitions the instance's bounding box into a
near-square grid sized by the cell-count formula
ceil(s1/sqrt(S/k)) x ceil(s2/sqrt(S/k)), picks k foreground-bearing
cells at random, and draws one pixel per cell weighted by the instance's
normalized distance field, so draws concentrate along the shape's medial
ridge while staying spread across the whole region. Four baseline
strategies (random / center / boundary / top-confidence) exist for
ablations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyMask, MissingConfidence
from .raster import BinaryMask, Box, ScalarField, bounding_box, distance_field


class Strategy(str, Enum):
    SKELETON_GRID = "skeleton_grid"
    RANDOM = "random"
    CENTER = "center"
    BOUNDARY = "boundary"
    TOP_CONFIDENCE = "top_confidence"


@dataclass(frozen=True)
class SamplerSpec:
    strategy: Strategy = Strategy.SKELETON_GRID
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class PointPrompt:
    x: int
    y: int
    class_id: int


def grid_partition(box: Box, k: int) -> list[Box]:
    """Tile a box into the prompt-sampling grid.

    Column/row counts follow ceil(s1/sqrt(S/k)) x ceil(s2/sqrt(S/k)) with
    S = s1*s2, clamped to the side length so every cell is at least one
    pixel wide (the formula can demand more cells than pixels when k
    exceeds the box area). Cells tile the box exactly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    cols, rows = grid_shape(box.s1, box.s2, k)
    cols = min(cols, box.s1)
    rows = min(rows, box.s2)
    xs = [box.x0 + (i * box.s1) // cols for i in range(cols)] + [box.x1]
    ys = [box.y0 + (j * box.s2) // rows for j in range(rows)] + [box.y1]
    return [
        Box(xs[i], ys[j], xs[i + 1], ys[j + 1])
        for j in range(rows)
        for i in range(cols)
    ]


def grid_shape(s1: int, s2: int, k: int) -> tuple[int, int]:
    """(columns, rows) from the unclamped cell-count formula."""
    cell_side = math.sqrt((s1 * s2) / k)
    return math.ceil(s1 / cell_side), math.ceil(s2 / cell_side)


def sample_prompts(
    instance: BinaryMask,
    spec: SamplerSpec,
    confidence: ScalarField | None = None,
    class_id: int = 0,
) -> list[PointPrompt]:
    """Draw up to ``spec.k`` distinct prompt points inside an instance.

    Deterministic for a fixed (instance, spec, confidence). The grid
    strategy returns at most one point per grid cell, so it yields fewer
    than k points when fewer than k cells contain foreground.
    """
    if instance.area == 0:
        raise EmptyMask("cannot sample prompts from an empty instance")
    if spec.strategy is Strategy.TOP_CONFIDENCE and confidence is None:
        raise MissingConfidence("top-confidence sampling needs a confidence field")

    rng = np.random.default_rng(spec.seed)
    if spec.strategy is Strategy.SKELETON_GRID:
        coords = _grid_weighted(instance, spec.k, rng)
    elif spec.strategy is Strategy.RANDOM:
        coords = _uniform(instance, spec.k, rng)
    elif spec.strategy is Strategy.CENTER:
        field = distance_field(instance)
        coords = _top_k(instance, field.values, spec.k, largest=True)
    elif spec.strategy is Strategy.BOUNDARY:
        field = distance_field(instance)
        coords = _top_k(instance, field.values, spec.k, largest=False)
    else:  # TOP_CONFIDENCE
        coords = _top_k(instance, confidence.values, spec.k, largest=True)
    return [PointPrompt(int(x), int(y), class_id) for y, x in coords]


def _grid_weighted(
    instance: BinaryMask, k: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    field = distance_field(instance).values
    cells = grid_partition(bounding_box(instance), k)
    occupied = [
        c for c in cells if instance.bits[c.y0 : c.y1, c.x0 : c.x1].any()
    ]
    take = min(k, len(occupied))
    chosen = rng.choice(len(occupied), size=take, replace=False)
    coords: list[tuple[int, int]] = []
    for idx in sorted(chosen.tolist()):
        cell = occupied[idx]
        sub = instance.bits[cell.y0 : cell.y1, cell.x0 : cell.x1]
        ys, xs = np.nonzero(sub)
        weights = field[cell.y0 : cell.y1, cell.x0 : cell.x1][ys, xs]
        pick = rng.choice(ys.size, p=weights / weights.sum())
        coords.append((cell.y0 + int(ys[pick]), cell.x0 + int(xs[pick])))
    return coords


def _uniform(
    instance: BinaryMask, k: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    ys, xs = np.nonzero(instance.bits)
    take = min(k, ys.size)
    picks = rng.choice(ys.size, size=take, replace=False)
    return [(int(ys[i]), int(xs[i])) for i in picks.tolist()]


def _top_k(
    instance: BinaryMask, values: np.ndarray, k: int, largest: bool
) -> list[tuple[int, int]]:
    # Row-major order breaks ties deterministically: stable sort on the
    # flattened foreground.
    ys, xs = np.nonzero(instance.bits)
    vals = values[ys, xs]
    order = np.argsort(-vals if largest else vals, kind="stable")
    take = min(k, ys.size)
    return [(int(ys[i]), int(xs[i])) for i in order[:take].tolist()]
