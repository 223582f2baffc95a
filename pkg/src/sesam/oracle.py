"""Promptable candidate-mask oracle: contract plus a deterministic mock.

Any backend that answers a point-prompt request with exactly three
candidate masks (whole / part / subpart granularity) and confidence
scores fulfills the contract. The mock derives its answers geometrically
from a scene of ground-truth instances and is byte-deterministic for
identical queries.

Two real-segmenter failure modes are modeled. Clustered prompts see only
part of an object: the whole-granularity candidate is the instance
clipped to the prompt hull grown by a reach that shrinks as prompts are
added, so a single prompt reveals the full instance while many prompts
piled in one spot reveal a fragment. And the top oracle score sits on
the part-granularity candidate, so score-greedy selection prefers
partial objects.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import UnknownImage
from .raster import BinaryMask, LabelMap, bounding_box
from .sampling import PointPrompt
from .selection import CandidateMaskSet

# Fixed mock confidence scores (whole, part, subpart): the part candidate
# carries the top score to reproduce the partial-object failure mode.
NESTED_SCORES = (0.6, 0.9, 0.7)


@dataclass(frozen=True)
class OracleRequest:
    request_id: str
    image_ref: str
    prompts: tuple[PointPrompt, ...]

    def __post_init__(self):
        if len(self.prompts) == 0:
            raise ValueError("a request carries at least one prompt")


@dataclass(frozen=True)
class OracleResponse:
    request_id: str
    candidates: CandidateMaskSet


class Oracle(Protocol):
    def query(self, request: OracleRequest) -> OracleResponse: ...


def oracle_query(oracle: Oracle, request: OracleRequest) -> OracleResponse:
    return oracle.query(request)


@dataclass
class MockScene:
    """Ground-truth instances a mock oracle answers from.

    ``noise`` is the boundary-perturbation radius: pixels within that
    Euclidean distance of a candidate's true boundary flip membership at
    random, with probability decaying away from the boundary. Class id 0
    is reserved for background in the derived label map.
    """

    width: int
    height: int
    shapes: list[tuple[int, BinaryMask]]
    noise: int = 0
    seed: int = 0
    granularity: str = "nested"  # "nested" or "exact"
    allow_overlap: bool = False
    image_ref: str = "scene"

    def __post_init__(self):
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.granularity not in ("nested", "exact"):
            raise ValueError(f"unknown granularity rule {self.granularity!r}")
        for class_id, mask in self.shapes:
            if mask.width != self.width or mask.height != self.height:
                raise ValueError("shape dimensions differ from scene dimensions")
            if class_id < 1:
                raise ValueError("shape class ids start at 1 (0 is background)")
        if not self.allow_overlap:
            stack = np.zeros((self.height, self.width), dtype=np.int32)
            for _, mask in self.shapes:
                stack += mask.bits
            if (stack > 1).any():
                raise ValueError("overlapping shapes require allow_overlap")

    @property
    def class_count(self) -> int:
        highest = max((cid for cid, _ in self.shapes), default=0)
        return highest + 1

    def ground_truth(self) -> LabelMap:
        """Dense label map: background 0, shapes painted in list order."""
        labels = np.zeros((self.height, self.width), dtype=np.uint16)
        for class_id, mask in self.shapes:
            labels[mask.bits] = class_id
        return LabelMap(labels, self.class_count)


def with_noise(scene: MockScene, noise: int) -> MockScene:
    return MockScene(
        width=scene.width,
        height=scene.height,
        shapes=scene.shapes,
        noise=noise,
        seed=scene.seed,
        granularity=scene.granularity,
        allow_overlap=True,
        image_ref=scene.image_ref,
    )


class MockOracle:
    """Deterministic geometric stand-in for a promptable segmenter.

    whole = the instance holding the most prompts, clipped to what the
    prompts reveal; part = its half on the prompt-centroid side (cut
    across the longer box side); subpart = its quarter nearest the
    centroid. A prompt set landing entirely on background yields three
    empty zero-score candidates.
    """

    def __init__(self, scenes: MockScene | dict[str, MockScene]):
        if isinstance(scenes, MockScene):
            scenes = {scenes.image_ref: scenes}
        self._scenes = dict(scenes)

    def query(self, request: OracleRequest) -> OracleResponse:
        scene = self._scenes.get(request.image_ref)
        if scene is None:
            raise UnknownImage(f"no scene registered for {request.image_ref!r}")
        hit = _majority_shape(scene, request.prompts)
        if hit is None:
            empty = BinaryMask.empty(scene.width, scene.height)
            return OracleResponse(
                request.request_id,
                CandidateMaskSet([empty, empty, empty], (0.0, 0.0, 0.0)),
            )
        _, instance = scene.shapes[hit]
        if scene.granularity == "exact":
            return OracleResponse(
                request.request_id,
                CandidateMaskSet([instance, instance, instance], (1.0, 1.0, 1.0)),
            )
        inside = [p for p in request.prompts if instance.bits[p.y, p.x]]
        whole = _visible_region(instance, inside)
        cx = float(np.mean([p.x for p in inside]))
        cy = float(np.mean([p.y for p in inside]))
        part, subpart = _nested_parts(whole, cx, cy)
        prompt_key = zlib.crc32(
            b"".join(f"{p.x},{p.y};".encode() for p in request.prompts)
        )
        cands = [
            _perturb(m, scene.noise, (scene.seed, prompt_key, i))
            for i, m in enumerate((whole, part, subpart))
        ]
        return OracleResponse(
            request.request_id, CandidateMaskSet(cands, NESTED_SCORES)
        )


def _majority_shape(
    scene: MockScene, prompts: tuple[PointPrompt, ...]
) -> int | None:
    counts = [
        sum(1 for p in prompts if mask.bits[p.y, p.x])
        for _, mask in scene.shapes
    ]
    if not counts or max(counts) == 0:
        return None
    return int(np.argmax(counts))


def _visible_region(
    instance: BinaryMask, inside: list[PointPrompt]
) -> BinaryMask:
    """Instance pixels within reach of the prompt hull.

    A single prompt is granularity-ambiguous and reveals the whole
    instance. With n >= 2 prompts the reach around their hull shrinks as
    ceil(diag/n) + 4, so spread prompts keep full coverage at any n while
    prompts piled in one spot reveal only their neighborhood.
    """
    if len(inside) <= 1:
        return instance
    box = bounding_box(instance)
    reach = math.ceil(math.hypot(box.s1, box.s2) / len(inside)) + 4
    xs = [p.x for p in inside]
    ys = [p.y for p in inside]
    x0 = max(0, min(xs) - reach)
    x1 = min(instance.width, max(xs) + reach + 1)
    y0 = max(0, min(ys) - reach)
    y1 = min(instance.height, max(ys) + reach + 1)
    clip = np.zeros_like(instance.bits)
    clip[y0:y1, x0:x1] = True
    return BinaryMask(instance.bits & clip)


def _nested_parts(
    whole: BinaryMask, cx: float, cy: float
) -> tuple[BinaryMask, BinaryMask]:
    box = bounding_box(whole)
    xm = box.x0 + box.s1 // 2
    ym = box.y0 + box.s2 // 2
    half = np.zeros_like(whole.bits)
    if box.s1 >= box.s2:  # cut across the longer (horizontal) extent
        if cx < xm:
            half[:, box.x0 : xm] = True
        else:
            half[:, xm : box.x1] = True
    else:
        if cy < ym:
            half[box.y0 : ym, :] = True
        else:
            half[ym : box.y1, :] = True
    quarter = np.zeros_like(whole.bits)
    xs = slice(box.x0, xm) if cx < xm else slice(xm, box.x1)
    ys = slice(box.y0, ym) if cy < ym else slice(ym, box.y1)
    quarter[ys, xs] = True
    return BinaryMask(whole.bits & half), BinaryMask(whole.bits & quarter)


def _perturb(mask: BinaryMask, noise: int, seed_parts: tuple) -> BinaryMask:
    if noise == 0 or mask.area == 0:
        return mask
    from scipy import ndimage  # local import keeps module import light

    rng = np.random.default_rng(list(seed_parts))
    inside = ndimage.distance_transform_edt(mask.bits)
    outside = ndimage.distance_transform_edt(~mask.bits)
    # Flip probability 0.5 at the boundary, fading linearly to 0 beyond
    # the noise radius.
    depth = np.where(mask.bits, inside, outside)
    flip_p = np.clip(0.5 * (1.0 - (depth - 1.0) / noise), 0.0, 0.5)
    flip_p[depth > noise] = 0.0
    flips = rng.random(mask.bits.shape) < flip_p
    return BinaryMask(np.where(flips, ~mask.bits, mask.bits))


def exact_oracle(scene: MockScene) -> MockOracle:
    """Oracle answering every prompt set with the true instance in all
    three candidate slots (noise-free)."""
    exact = MockScene(
        width=scene.width,
        height=scene.height,
        shapes=scene.shapes,
        noise=0,
        seed=scene.seed,
        granularity="exact",
        allow_overlap=True,
        image_ref=scene.image_ref,
    )
    return MockOracle(exact)
