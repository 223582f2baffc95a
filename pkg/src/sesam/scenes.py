"""Synthetic scene generation for mock-oracle runs and ablations.

A scene is a set of ground-truth instances on a background. From a scene
we derive every weak-annotation flavor: eroded coarse masks, sloppy
"merged" coarse masks that bridge nearby same-class instances, per-
instance points, and skeleton scribbles, plus a corner-concentrated
confidence field for confidence-driven sampling baselines.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .oracle import MockScene
from .raster import (
    IGNORE_VALUE,
    BinaryMask,
    LabelMap,
    ScalarField,
    bounding_box,
    connected_components,
    dilate,
    erode,
    skeletonize,
)
from .rle import rle_decode, rle_encode

BACKGROUND = 0


def generate_scene(
    seed: int,
    width: int = 96,
    height: int = 96,
    noise: int = 0,
    image_ref: str | None = None,
) -> MockScene:
    """One random scene: a twin pair of rectangles sharing class 1 (sized
    apart, close enough for a sloppy annotator to merge), an ellipse, and
    a bar or L, all spaced so boundary perturbations cannot collide."""
    rng = np.random.default_rng(seed)
    occupied = np.zeros((height, width), dtype=bool)
    shapes: list[tuple[int, BinaryMask]] = []

    big = _place(rng, occupied, lambda r: _rect(r, width, height, 16, 26))
    small = _place(
        rng, occupied, lambda r: _rect(r, width, height, 10, 14), near=big, gap=(8, 14)
    )
    shapes.append((1, big))
    if small is not None:
        shapes.append((1, small))

    ellipse = _place(rng, occupied, lambda r: _ellipse(r, width, height, 7, 12))
    if ellipse is not None:
        shapes.append((2, ellipse))

    maker = _bar if rng.random() < 0.5 else _ell_shape
    extra = _place(rng, occupied, lambda r: maker(r, width, height))
    if extra is not None:
        shapes.append((3, extra))

    return MockScene(
        width=width,
        height=height,
        shapes=shapes,
        noise=noise,
        seed=seed,
        image_ref=image_ref or f"scene-{seed}",
    )


def build_suite(count: int = 20, seed: int = 7, noise: int = 0) -> list[MockScene]:
    """The fixed scene suite used by the acceptance and ablation runs."""
    return [
        generate_scene(seed * 1000 + i, noise=noise, image_ref=f"suite-{seed}-{i:03d}")
        for i in range(count)
    ]


def coarse_from_gt(gt: LabelMap, radius: int = 2) -> LabelMap:
    """Eroded per-class masks; everything else unlabeled. Background is an
    annotation gap, not a labeled class."""
    out = np.full_like(gt.labels, IGNORE_VALUE)
    for class_id in gt.present_classes():
        if class_id == BACKGROUND:
            continue
        eroded = erode(gt.class_mask(class_id), radius)
        out[eroded.bits] = class_id
    return LabelMap(out, gt.class_count)


def merged_coarse_from_gt(
    gt: LabelMap, radius: int = 2, max_gap: int = 18
) -> LabelMap:
    """Sloppy coarse annotation: erosion plus a 3-px bridge between any
    two same-class instances whose boxes sit within ``max_gap`` pixels,
    merging them into one annotated blob."""
    out = coarse_from_gt(gt, radius)
    labels = out.labels.copy()
    for class_id in gt.present_classes():
        if class_id == BACKGROUND:
            continue
        parts = connected_components(gt.class_mask(class_id), 8)
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                gap = _box_gap(bounding_box(parts[i]), bounding_box(parts[j]))
                if gap <= max_gap:
                    _draw_bridge(
                        labels, _centroid(parts[i]), _centroid(parts[j]), class_id
                    )
    return LabelMap(labels, gt.class_count)


def points_from_gt(gt: LabelMap, seed: int = 0) -> LabelMap:
    """One labeled pixel per instance, drawn near its interior."""
    rng = np.random.default_rng(seed)
    out = np.full_like(gt.labels, IGNORE_VALUE)
    for class_id in gt.present_classes():
        if class_id == BACKGROUND:
            continue
        for inst in connected_components(gt.class_mask(class_id), 8):
            interior = erode(inst, 2)
            pool = interior if interior.area else inst
            ys, xs = np.nonzero(pool.bits)
            pick = rng.integers(0, ys.size)
            out[ys[pick], xs[pick]] = class_id
    return LabelMap(out, gt.class_count)


def scribbles_from_gt(gt: LabelMap) -> LabelMap:
    """Skeleton of each instance as its scribble."""
    out = np.full_like(gt.labels, IGNORE_VALUE)
    for class_id in gt.present_classes():
        if class_id == BACKGROUND:
            continue
        for inst in connected_components(gt.class_mask(class_id), 8):
            out[skeletonize(inst).bits] = class_id
    return LabelMap(out, gt.class_count)


def corner_confidence(width: int, height: int, seed: int = 0) -> ScalarField:
    """Confidence concentrated in one (seeded) image corner."""
    rng = np.random.default_rng(seed)
    cx = 0 if rng.random() < 0.5 else width - 1
    cy = 0 if rng.random() < 0.5 else height - 1
    yy, xx = np.mgrid[0:height, 0:width]
    dist = np.hypot(yy - cy, xx - cx)
    return ScalarField(1.0 - dist / dist.max())


# -- scene serialization ----------------------------------------------------


def scene_to_json(scene: MockScene) -> str:
    return json.dumps(
        {
            "width": scene.width,
            "height": scene.height,
            "seed": scene.seed,
            "noise": scene.noise,
            "granularity": scene.granularity,
            "image_ref": scene.image_ref,
            "shapes": [
                {
                    "class_id": class_id,
                    "rle": base64.b64encode(rle_encode(mask)).decode("ascii"),
                }
                for class_id, mask in scene.shapes
            ],
        },
        indent=2,
    )


def scene_from_json(text: str) -> MockScene:
    obj = json.loads(text)
    shapes = [
        (
            int(s["class_id"]),
            rle_decode(
                base64.b64decode(s["rle"]), int(obj["width"]), int(obj["height"])
            ),
        )
        for s in obj["shapes"]
    ]
    return MockScene(
        width=int(obj["width"]),
        height=int(obj["height"]),
        shapes=shapes,
        noise=int(obj.get("noise", 0)),
        seed=int(obj.get("seed", 0)),
        granularity=str(obj.get("granularity", "nested")),
        image_ref=str(obj.get("image_ref", "scene")),
    )


def save_scene(path: str | Path, scene: MockScene) -> None:
    Path(path).write_text(scene_to_json(scene))


def load_scene(path: str | Path) -> MockScene:
    return scene_from_json(Path(path).read_text())


# -- shape placement helpers ------------------------------------------------


def _place(rng, occupied, maker, near=None, gap=None, tries: int = 60):
    """Rejection-sample a shape that keeps >= 5 px clearance from existing
    shapes (and the border), optionally at a controlled gap from ``near``."""
    height, width = occupied.shape
    for _ in range(tries):
        mask = maker(rng)
        if mask is None:
            continue
        bits = mask.bits
        grown = dilate(mask, 5).bits
        if (grown & occupied).any():
            continue
        box = bounding_box(mask)
        if box.x0 < 4 or box.y0 < 4 or box.x1 > width - 4 or box.y1 > height - 4:
            continue
        if near is not None and gap is not None:
            d = _box_gap(bounding_box(near), box)
            if not (gap[0] <= d <= gap[1]):
                continue
        occupied |= grown
        return mask
    return None


def _rect(rng, width, height, lo, hi):
    w = int(rng.integers(lo, hi + 1))
    h = int(rng.integers(lo, hi + 1))
    x = int(rng.integers(4, max(5, width - w - 4)))
    y = int(rng.integers(4, max(5, height - h - 4)))
    bits = np.zeros((height, width), dtype=bool)
    bits[y : y + h, x : x + w] = True
    return BinaryMask(bits)


def _ellipse(rng, width, height, lo, hi):
    rx = int(rng.integers(lo, hi + 1))
    ry = int(rng.integers(lo, hi + 1))
    cx = int(rng.integers(4 + rx, max(5 + rx, width - rx - 4)))
    cy = int(rng.integers(4 + ry, max(5 + ry, height - ry - 4)))
    yy, xx = np.mgrid[0:height, 0:width]
    bits = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    return BinaryMask(bits)


def _bar(rng, width, height):
    length = int(rng.integers(24, 40))
    thick = int(rng.integers(7, 10))
    horizontal = rng.random() < 0.5
    w, h = (length, thick) if horizontal else (thick, length)
    if width - w - 8 <= 4 or height - h - 8 <= 4:
        return None
    x = int(rng.integers(4, width - w - 4))
    y = int(rng.integers(4, height - h - 4))
    bits = np.zeros((height, width), dtype=bool)
    bits[y : y + h, x : x + w] = True
    return BinaryMask(bits)


def _ell_shape(rng, width, height):
    arm = int(rng.integers(18, 28))
    thick = int(rng.integers(8, 11))
    x = int(rng.integers(4, max(5, width - arm - 4)))
    y = int(rng.integers(4, max(5, height - arm - 4)))
    bits = np.zeros((height, width), dtype=bool)
    bits[y : y + arm, x : x + thick] = True
    bits[y + arm - thick : y + arm, x : x + arm] = True
    return BinaryMask(bits)


def _centroid(mask: BinaryMask) -> tuple[float, float]:
    ys, xs = np.nonzero(mask.bits)
    return float(xs.mean()), float(ys.mean())


def _box_gap(a, b) -> float:
    dx = max(b.x0 - a.x1, a.x0 - b.x1, 0)
    dy = max(b.y0 - a.y1, a.y0 - b.y1, 0)
    return float(np.hypot(dx, dy))


def _draw_bridge(labels: np.ndarray, c0, c1, class_id: int, thickness: int = 3):
    steps = int(max(abs(c1[0] - c0[0]), abs(c1[1] - c0[1]), 1)) * 2
    half = thickness // 2
    height, width = labels.shape
    for t in np.linspace(0.0, 1.0, steps):
        x = int(round(c0[0] + (c1[0] - c0[0]) * t))
        y = int(round(c0[1] + (c1[1] - c0[1]) * t))
        y0, y1 = max(0, y - half), min(height, y + half + 1)
        x0, x1 = max(0, x - half), min(width, x + half + 1)
        region = labels[y0:y1, x0:x1]
        region[region == IGNORE_VALUE] = class_id
