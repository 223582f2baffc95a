"""Raster label/mask types and the morphological primitives built on them.

Everything here is a pure function of its inputs: rasters are never mutated
in place, so shared read-only arrays are safe under concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize as _thin

from .errors import DimensionMismatch, EmptyMask

IGNORE_VALUE = 0xFFFF

_STRUCT_4 = ndimage.generate_binary_structure(2, 1)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def _connectivity_structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return _STRUCT_4
    if connectivity == 8:
        return _STRUCT_8
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


@dataclass(frozen=True)
class Box:
    """Axis-aligned pixel box, half-open: [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate box {self}")

    @property
    def s1(self) -> int:
        """Horizontal side length."""
        return self.x1 - self.x0

    @property
    def s2(self) -> int:
        """Vertical side length."""
        return self.y1 - self.y0

    @property
    def area(self) -> int:
        return self.s1 * self.s2


@dataclass
class BinaryMask:
    """Single-class/instance region as a row-major boolean raster."""

    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2 or self.bits.size == 0:
            raise ValueError("mask must be a non-empty 2-d raster")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def area(self) -> int:
        return int(np.count_nonzero(self.bits))

    def same_shape(self, other: "BinaryMask | LabelMap | ScalarField") -> bool:
        return self.width == other.width and self.height == other.height

    def __and__(self, other: "BinaryMask") -> "BinaryMask":
        _require_same_shape(self, other)
        return BinaryMask(self.bits & other.bits)

    def __or__(self, other: "BinaryMask") -> "BinaryMask":
        _require_same_shape(self, other)
        return BinaryMask(self.bits | other.bits)

    def __sub__(self, other: "BinaryMask") -> "BinaryMask":
        _require_same_shape(self, other)
        return BinaryMask(self.bits & ~other.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))


@dataclass
class LabelMap:
    """Dense per-pixel class raster; IGNORE_VALUE marks unlabeled pixels."""

    labels: np.ndarray
    class_count: int
    ignore_value: int = IGNORE_VALUE

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.uint16)
        if self.labels.ndim != 2 or self.labels.size == 0:
            raise ValueError("label raster must be non-empty 2-d")
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")
        bad = (self.labels >= self.class_count) & (self.labels != self.ignore_value)
        if bad.any():
            raise ValueError("label raster contains out-of-range class ids")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def class_mask(self, class_id: int) -> BinaryMask:
        """Boolean slice of one class."""
        return BinaryMask(self.labels == class_id)

    def labeled_mask(self) -> BinaryMask:
        """All pixels carrying any non-ignore label."""
        return BinaryMask(self.labels != self.ignore_value)

    def present_classes(self) -> list[int]:
        vals = np.unique(self.labels)
        return [int(v) for v in vals if v != self.ignore_value]

    def copy(self) -> "LabelMap":
        return LabelMap(self.labels.copy(), self.class_count, self.ignore_value)

    @classmethod
    def full_ignore(cls, width: int, height: int, class_count: int) -> "LabelMap":
        return cls(
            np.full((height, width), IGNORE_VALUE, dtype=np.uint16), class_count
        )


@dataclass
class ScalarField:
    """Row-major real raster with all values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValueError("scalar field must be non-empty 2-d")
        if not np.isfinite(self.values).all():
            raise ValueError("scalar field contains non-finite values")
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise ValueError("scalar field values must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _require_same_shape(*rasters) -> None:
    shapes = {(r.height, r.width) for r in rasters}
    if len(shapes) > 1:
        raise DimensionMismatch(f"raster dimensions differ: {sorted(shapes)}")


def connected_components(mask: BinaryMask, connectivity: int = 8) -> list[BinaryMask]:
    """Split a mask into its connected instances.

    Returns pairwise-disjoint masks whose union is the input, ordered by
    each component's first pixel in row-major scan. An all-false mask
    yields an empty list.
    """
    structure = _connectivity_structure(connectivity)
    labeled, count = ndimage.label(mask.bits, structure=structure)
    if count == 0:
        return []
    # Reorder by first pixel in row-major scan; scipy happens to do this
    # already but the ordering is contractual, so enforce it.
    flat = labeled.ravel()
    nz = np.flatnonzero(flat)
    first_seen = np.full(count + 1, flat.size, dtype=np.int64)
    np.minimum.at(first_seen, flat[nz], nz)
    order = sorted(range(1, count + 1), key=lambda k: int(first_seen[k]))
    return [BinaryMask(labeled == k) for k in order]


def euclidean_depth(mask: BinaryMask) -> np.ndarray:
    """Raw Euclidean distance of each foreground pixel to the nearest
    background pixel; the image border counts as background."""
    if mask.area == 0:
        raise EmptyMask("distance field of an empty mask")
    padded = np.pad(mask.bits, 1)
    dist = ndimage.distance_transform_edt(padded)[1:-1, 1:-1]
    dist[~mask.bits] = 0.0
    return dist


def distance_field(mask: BinaryMask) -> ScalarField:
    """Normalized distance field: euclidean_depth divided by its maximum,
    so the deepest pixel carries 1.0 and background pixels carry 0."""
    dist = euclidean_depth(mask)
    return ScalarField(dist / dist.max())


def skeletonize(mask: BinaryMask) -> BinaryMask:
    """Topology-preserving thinning of a mask.

    The result is a subset of the input with the same number of connected
    components; 1-pixel-wide shapes are their own skeleton. Exact skeleton
    pixels beyond those guarantees are algorithm-dependent.
    """
    if mask.area == 0:
        raise EmptyMask("skeleton of an empty mask")
    return BinaryMask(_thin(mask.bits))


def bounding_box(mask: BinaryMask) -> Box:
    """Tightest axis-aligned box containing all foreground pixels."""
    if mask.area == 0:
        raise EmptyMask("bounding box of an empty mask")
    ys, xs = np.nonzero(mask.bits)
    return Box(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def mask_overlap(a: BinaryMask, b: BinaryMask) -> tuple[int, int, int]:
    """(intersection_area, a_area, b_area) as exact pixel counts."""
    _require_same_shape(a, b)
    inter = int(np.count_nonzero(a.bits & b.bits))
    return inter, a.area, b.area


def erode(mask: BinaryMask, radius: int) -> BinaryMask:
    """Binary erosion by a Euclidean disk of the given radius."""
    if radius <= 0:
        return BinaryMask(mask.bits.copy())
    return BinaryMask(ndimage.binary_erosion(mask.bits, structure=_disk(radius)))


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Binary dilation by a Euclidean disk of the given radius."""
    if radius <= 0:
        return BinaryMask(mask.bits.copy())
    return BinaryMask(ndimage.binary_dilation(mask.bits, structure=_disk(radius)))


def _disk(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(span, span, indexing="ij")
    return (yy * yy + xx * xx) <= radius * radius

