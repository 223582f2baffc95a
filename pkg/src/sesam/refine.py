"""The label-refinement pipeline.

Per class: optionally extend the coarse mask with high-confidence
pseudo-labels, split it into connected instances, sample prompt points
per instance, query the oracle, select one candidate per instance, and
write the selected pixels back under the precedence rule (weak labels
are never overwritten; oracle-vs-oracle conflicts go to the higher
compatibility score, ties to the lower class id).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from enum import Enum

import numpy as np

from .errors import ConfigError, DimensionMismatch, OracleFailure, SesamError
from .oracle import Oracle, OracleRequest
from .raster import BinaryMask, LabelMap, ScalarField, connected_components
from .sampling import SamplerSpec, Strategy, sample_prompts
from .selection import SelectionConfig, SelectionStrategy, select_mask


@dataclass(frozen=True)
class TrainerHandoff:
    """Loss weights and EMA decay passed through to the external trainer;
    unused by the pipeline itself."""

    lambda1: float = 1.0
    lambda2: float = 0.01
    ema_alpha: float = 0.999


@dataclass
class RefinementConfig:
    k: int = 5
    tau1: float = 0.3
    tau2: float = 0.7
    theta1: float = 0.96
    theta2: float = 0.98
    resample_period_m: int = 4
    connectivity: int = 8
    sampler_strategy: Strategy = Strategy.SKELETON_GRID
    selection_strategy: SelectionStrategy = SelectionStrategy.WEAK_AWARE
    seed: int = 0
    trainer_handoff: TrainerHandoff = field(default_factory=TrainerHandoff)

    def __post_init__(self):
        if isinstance(self.sampler_strategy, str):
            self.sampler_strategy = Strategy(self.sampler_strategy)
        if isinstance(self.selection_strategy, str):
            self.selection_strategy = SelectionStrategy(self.selection_strategy)
        if isinstance(self.trainer_handoff, dict):
            self.trainer_handoff = TrainerHandoff(**self.trainer_handoff)
        if not (0.0 < self.theta1 <= 1.0 and 0.0 < self.theta2 <= 1.0):
            raise ConfigError("theta1 and theta2 must lie in (0, 1]")
        if self.theta2 <= self.theta1:
            raise ConfigError(
                f"theta2 ({self.theta2}) must exceed theta1 ({self.theta1})"
            )
        if self.resample_period_m < 1:
            raise ConfigError("resample_period_m must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.connectivity not in (4, 8):
            raise ConfigError("connectivity must be 4 or 8")
        SelectionConfig(self.tau1, self.tau2)  # range check

    def sampler_spec(self, seed: int) -> SamplerSpec:
        return SamplerSpec(self.sampler_strategy, self.k, seed)

    def selection_config(self) -> SelectionConfig:
        return SelectionConfig(self.tau1, self.tau2, self.selection_strategy)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sampler_strategy"] = self.sampler_strategy.value
        d["selection_strategy"] = self.selection_strategy.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RefinementConfig":
        return cls(**d)


class WeakKind(str, Enum):
    POINT = "point"
    SCRIBBLE = "scribble"
    COARSE = "coarse"


@dataclass
class WeakAnnotation:
    kind: WeakKind
    labels: LabelMap

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = WeakKind(self.kind)
        if not (self.labels.labels != self.labels.ignore_value).any():
            raise ValueError("weak annotation carries no labeled pixel")


@dataclass(frozen=True)
class InstanceAudit:
    class_id: int
    instance_index: int
    prompts: tuple[tuple[int, int], ...]
    chosen_index: int
    r: float
    p: float

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "class": self.class_id,
                "instance": self.instance_index,
                "prompts": [list(pt) for pt in self.prompts],
                "chosen": self.chosen_index,
                "r": round(self.r, 6),
                "p": round(self.p, 6),
            },
            separators=(",", ":"),
        )


def _instance_seed(base: int, class_id: int, instance_index: int, salt: int) -> int:
    seq = np.random.SeedSequence([base, class_id, instance_index, salt])
    return int(seq.generate_state(1)[0])


def should_resample(iteration: int, m: int) -> bool:
    """Oracle passes run on iterations 0, m, 2m, ..."""
    if iteration < 0 or m < 1:
        raise ValueError("iteration must be >= 0 and m >= 1")
    return iteration % m == 0


def extend_with_pseudo(
    coarse_class_mask: BinaryMask,
    pseudo_labels: LabelMap,
    confidence: ScalarField,
    class_id: int,
    theta2: float,
) -> BinaryMask:
    """Union the coarse mask with confidently pseudo-labeled pixels of the
    same class. Never removes a pixel."""
    shape = coarse_class_mask.bits.shape
    if pseudo_labels.labels.shape != shape or confidence.values.shape != shape:
        raise DimensionMismatch("pseudo layers misaligned with the coarse mask")
    confident = (pseudo_labels.labels == class_id) & (confidence.values >= theta2)
    return BinaryMask(coarse_class_mask.bits | confident)


def bootstrap_coarse(
    weak: WeakAnnotation,
    oracle: Oracle,
    cfg: RefinementConfig,
    image_ref: str = "scene",
) -> LabelMap:
    """Turn sparse point/scribble labels into an initial coarse map.

    Each connected group of same-class annotated pixels becomes one
    prompt set (scribbles are subsampled to at most k points with the
    configured sampler); the smallest-area non-empty candidate is written
    as that class's region. The sparse labels themselves always survive,
    and earlier classes win conflicting pixels.
    """
    if weak.kind is WeakKind.COARSE:
        return weak.labels.copy()
    labels = weak.labels
    out = np.full_like(labels.labels, labels.ignore_value)
    annotated = labels.labels != labels.ignore_value
    out[annotated] = labels.labels[annotated]
    for class_id in labels.present_classes():
        groups = connected_components(labels.class_mask(class_id), cfg.connectivity)
        for idx, group in enumerate(groups):
            spec = cfg.sampler_spec(_instance_seed(cfg.seed, class_id, idx, salt=1))
            prompts = sample_prompts(group, spec, class_id=class_id)
            request = OracleRequest(
                f"bootstrap/{image_ref}/c{class_id}/g{idx}",
                image_ref,
                tuple(prompts),
            )
            try:
                response = oracle.query(request)
            except SesamError as exc:
                raise OracleFailure(
                    f"bootstrap query failed for class {class_id} group {idx}"
                    f" of {image_ref}: {exc}",
                    image_ref,
                ) from exc
            non_empty = [
                (cand.area, i, cand)
                for i, cand in enumerate(response.candidates.candidates)
                if cand.area > 0
            ]
            if not non_empty:
                continue
            _, _, smallest = min(non_empty, key=lambda t: (t[0], t[1]))
            if smallest.bits.shape != out.shape:
                raise DimensionMismatch(
                    f"oracle candidate for class {class_id} group {idx} is "
                    f"{smallest.width}x{smallest.height}, image is "
                    f"{labels.width}x{labels.height}"
                )
            writable = smallest.bits & (out == labels.ignore_value)
            out[writable] = class_id
    return LabelMap(out, labels.class_count, labels.ignore_value)


def refine_labels(
    labels: LabelMap,
    oracle: Oracle,
    cfg: RefinementConfig,
    pseudo: tuple[LabelMap, ScalarField] | None = None,
    image_ref: str = "scene",
) -> tuple[LabelMap, list[InstanceAudit]]:
    """One oracle pass over every labeled class of a coarse map.

    Returns the refined map (weak pixels intact, selected oracle pixels
    added) and one audit record per prompted instance.
    """
    if pseudo is not None:
        pseudo_labels, pseudo_conf = pseudo
        if (
            pseudo_labels.labels.shape != labels.labels.shape
            or pseudo_conf.values.shape != labels.labels.shape
        ):
            raise DimensionMismatch("pseudo layers misaligned with labels")
    else:
        pseudo_labels = pseudo_conf = None

    audit: list[InstanceAudit] = []
    oracle_labels = np.full_like(labels.labels, labels.ignore_value)
    oracle_p = np.full(labels.labels.shape, -1.0)
    sel_cfg = cfg.selection_config()

    for class_id in labels.present_classes():
        class_mask = labels.class_mask(class_id)
        if pseudo is not None:
            class_mask = extend_with_pseudo(
                class_mask, pseudo_labels, pseudo_conf, class_id, cfg.theta2
            )
        instances = connected_components(class_mask, cfg.connectivity)
        for idx, instance in enumerate(instances):
            seed = _instance_seed(cfg.seed, class_id, idx, salt=2)
            try:
                prompts = sample_prompts(
                    instance,
                    cfg.sampler_spec(seed),
                    confidence=pseudo_conf,
                    class_id=class_id,
                )
                request = OracleRequest(
                    f"refine/{image_ref}/c{class_id}/i{idx}",
                    image_ref,
                    tuple(prompts),
                )
                response = oracle.query(request)
                if response.candidates.candidates[0].bits.shape != labels.labels.shape:
                    raise DimensionMismatch(
                        "oracle candidates do not match label dimensions"
                    )
                sel = select_mask(response.candidates, instance, sel_cfg, seed=seed)
            except OracleFailure:
                raise
            except SesamError as exc:
                raise OracleFailure(
                    f"refinement failed for class {class_id} instance {idx}"
                    f" of {image_ref}: {exc}",
                    image_ref,
                ) from exc
            audit.append(
                InstanceAudit(
                    class_id,
                    idx,
                    tuple((p.x, p.y) for p in prompts),
                    sel.index,
                    sel.r,
                    sel.p,
                )
            )
            # Higher compatibility wins contested pixels; strict > keeps
            # the earlier (lower-id) class on ties.
            winner = sel.mask.bits & (sel.p > oracle_p)
            oracle_labels[winner] = class_id
            oracle_p[winner] = sel.p

    weak_labeled = labels.labels != labels.ignore_value
    fused = np.where(weak_labeled, labels.labels, oracle_labels).astype(np.uint16)
    return LabelMap(fused, labels.class_count, labels.ignore_value), audit


def oracle_layer(refined: LabelMap, weak: LabelMap) -> LabelMap:
    """Pixels the refinement added on top of the weak labels."""
    added = (weak.labels == weak.ignore_value) & (
        refined.labels != refined.ignore_value
    )
    labels = np.where(added, refined.labels, refined.ignore_value).astype(np.uint16)
    return LabelMap(labels, refined.class_count, refined.ignore_value)
