"""Candidate-mask scoring and selection against a weak reference mask.

Coverage r = |S∩W|/|W| is a recall proxy; compatibility p = |S∩W|/|S| a
precision proxy. The weak-aware strategy keeps candidates with r >= tau1
and p >= tau2 and returns the most compatible one, falling back to the
globally most compatible candidate when none qualifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyCandidate, EmptyWeakMask
from .raster import BinaryMask, mask_overlap


class SelectionStrategy(str, Enum):
    WEAK_AWARE = "weak_aware"
    BEST_SCORE = "best_score"
    RANDOM = "random"


@dataclass(frozen=True)
class SelectionConfig:
    tau1: float = 0.3
    tau2: float = 0.7
    strategy: SelectionStrategy = SelectionStrategy.WEAK_AWARE

    def __post_init__(self):
        if not (0.0 <= self.tau1 <= 1.0 and 0.0 <= self.tau2 <= 1.0):
            raise ValueError("tau1 and tau2 must lie in [0, 1]")


@dataclass
class CandidateMaskSet:
    """Exactly three oracle masks (whole/part/subpart order) with scores."""

    candidates: list[BinaryMask]
    scores: tuple[float, float, float]

    def __post_init__(self):
        if len(self.candidates) != 3:
            raise ValueError("candidate set must hold exactly 3 masks")
        shapes = {(c.height, c.width) for c in self.candidates}
        if len(shapes) != 1:
            raise ValueError("candidates must share dimensions")
        if len(self.scores) != 3 or any(
            not np.isfinite(s) or s < 0.0 or s > 1.0 for s in self.scores
        ):
            raise ValueError("scores must be three finite reals in [0, 1]")

    @property
    def width(self) -> int:
        return self.candidates[0].width

    @property
    def height(self) -> int:
        return self.candidates[0].height


@dataclass(frozen=True)
class Selection:
    index: int
    mask: BinaryMask
    r: float
    p: float


def coverage_score(candidate: BinaryMask, weak: BinaryMask) -> float:
    """Fraction of the weak mask covered by the candidate."""
    inter, _, w_area = mask_overlap(candidate, weak)
    if w_area == 0:
        raise EmptyWeakMask("coverage against an empty weak mask")
    return inter / w_area


def compatibility_score(candidate: BinaryMask, weak: BinaryMask) -> float:
    """Fraction of the candidate lying inside the weak mask."""
    inter, c_area, _ = mask_overlap(candidate, weak)
    if c_area == 0:
        raise EmptyCandidate("compatibility of an empty candidate")
    return inter / c_area


def select_mask(
    candidate_set: CandidateMaskSet,
    weak: BinaryMask,
    cfg: SelectionConfig,
    seed: int = 0,
) -> Selection:
    """Pick one of the three candidates.

    Empty candidates score p = 0 and only win when all three are empty
    (index 0 then). Ties always resolve to the lowest index.
    """
    if weak.area == 0:
        raise EmptyWeakMask("selection against an empty weak mask")
    rs, ps, areas = [], [], []
    for cand in candidate_set.candidates:
        inter, c_area, w_area = mask_overlap(cand, weak)
        rs.append(inter / w_area)
        ps.append(inter / c_area if c_area else 0.0)
        areas.append(c_area)

    if cfg.strategy is SelectionStrategy.BEST_SCORE:
        idx = int(np.argmax(candidate_set.scores))
    elif cfg.strategy is SelectionStrategy.RANDOM:
        idx = int(np.random.default_rng(seed).integers(0, 3))
    else:
        feasible = [
            i
            for i in range(3)
            if areas[i] > 0 and rs[i] >= cfg.tau1 and ps[i] >= cfg.tau2
        ]
        pool = feasible if feasible else [i for i in range(3) if areas[i] > 0]
        if not pool:
            pool = [0]
        idx = max(pool, key=lambda i: (ps[i], -i))

    return Selection(idx, candidate_set.candidates[idx], rs[idx], ps[idx])
