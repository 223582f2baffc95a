"""Annotation-cost model and cost-vs-performance tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import UnknownKind


class AnnotationKind(str, Enum):
    FINE = "fine"
    COARSE = "coarse"
    SCRIBBLE = "scribble"
    POINT = "point"


# Point cost is 45 seconds, stored as minutes.
DEFAULT_MINUTES = {
    AnnotationKind.FINE: 90.0,
    AnnotationKind.COARSE: 7.0,
    AnnotationKind.SCRIBBLE: 2.2,
    AnnotationKind.POINT: 0.75,
}


@dataclass(frozen=True)
class CostModel:
    per_image_minutes: dict = field(default_factory=lambda: dict(DEFAULT_MINUTES))

    def __post_init__(self):
        if any(v <= 0 for v in self.per_image_minutes.values()):
            raise ValueError("per-image minutes must be positive")


def annotation_hours(
    kind: AnnotationKind | str,
    n_images: int,
    model: CostModel | None = None,
) -> float:
    """Unrounded labeling hours for a batch of images."""
    if n_images < 0:
        raise ValueError("n_images must be >= 0")
    model = model or CostModel()
    try:
        kind = AnnotationKind(kind)
        minutes = model.per_image_minutes[kind]
    except (ValueError, KeyError) as exc:
        raise UnknownKind(f"no cost entry for kind {kind!r}") from exc
    return n_images * minutes / 60.0


@dataclass(frozen=True)
class CostRow:
    kind: AnnotationKind
    n_images: int
    hours: float
    miou: float
    hours_pct: float  # share of the reference budget
    miou_pct: float  # performance ratio vs the reference row


def cost_performance_table(
    entries: list[tuple[AnnotationKind | str, int, float]],
    model: CostModel | None = None,
) -> list[CostRow]:
    """Budget-sorted rows with ratio columns against the max-budget fine
    row (or the max-budget row overall when no fine entry is present)."""
    if not entries:
        raise ValueError("entries must be non-empty")
    raw = [
        (AnnotationKind(kind), n, annotation_hours(kind, n, model), miou)
        for kind, n, miou in entries
    ]
    fine = [r for r in raw if r[0] is AnnotationKind.FINE]
    ref = max(fine or raw, key=lambda r: r[2])
    rows = [
        CostRow(
            kind,
            n,
            hours,
            miou,
            100.0 * hours / ref[2],
            100.0 * miou / ref[3] if ref[3] else 0.0,
        )
        for kind, n, hours, miou in raw
    ]
    rows.sort(key=lambda r: r.hours)
    return rows


def table_csv(rows: list[CostRow]) -> str:
    out = ["kind,n_images,hours,miou,hours_pct,miou_pct"]
    for r in rows:
        out.append(
            f"{r.kind.value},{r.n_images},{r.hours:.4f},{r.miou:.4f},"
            f"{r.hours_pct:.4f},{r.miou_pct:.4f}"
        )
    return "\n".join(out)
