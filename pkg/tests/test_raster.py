import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import flood_fill_components, random_blob, random_mask
from sesam.errors import DimensionMismatch, EmptyMask
from sesam.raster import (
    BinaryMask,
    Box,
    LabelMap,
    bounding_box,
    connected_components,
    distance_field,
    erode,
    euclidean_depth,
    mask_overlap,
    skeletonize,
)


def mask_from_rows(rows: list[str]) -> BinaryMask:
    return BinaryMask(np.array([[c == "#" for c in row] for row in rows]))


class TestConnectedComponents:
    def test_two_disjoint_squares(self):
        bits = np.zeros((10, 10), dtype=bool)
        bits[0:3, 0:3] = True
        bits[6:9, 6:9] = True
        parts = connected_components(BinaryMask(bits), 8)
        assert len(parts) == 2
        assert sorted(p.area for p in parts) == [9, 9]
        union = parts[0].bits | parts[1].bits
        assert np.array_equal(union, bits)

    def test_empty_mask(self):
        assert connected_components(BinaryMask.empty(5, 5), 8) == []

    def test_diagonal_touch_connectivity(self):
        # plus sign with a blob touching only diagonally
        m = mask_from_rows(
            [
                ".#...",
                "###..",
                ".#...",
                "..#..",
                ".....",
            ]
        )
        assert len(connected_components(m, 4)) == 2
        assert len(connected_components(m, 8)) == 1
        # agreement with the flood-fill oracle on the same shape
        for conn in (4, 8):
            ours = {frozenset(zip(*np.nonzero(p.bits))) for p in connected_components(m, conn)}
            assert ours == set(flood_fill_components(m.bits, conn))

    def test_ordering_by_first_pixel(self):
        bits = np.zeros((6, 6), dtype=bool)
        bits[4, 0] = True  # later in row-major order
        bits[0, 4] = True
        parts = connected_components(BinaryMask(bits), 8)
        assert parts[0].bits[0, 4] and parts[1].bits[4, 0]

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_partition_matches_flood_fill(self, seed):
        mask = random_mask(seed, max_side=64)
        for conn in (4, 8):
            parts = connected_components(mask, conn)
            ours = {frozenset(zip(*np.nonzero(p.bits))) for p in parts}
            assert ours == set(flood_fill_components(mask.bits, conn))

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_disjoint_and_exhaustive(self, seed):
        mask = random_mask(seed, max_side=48)
        parts = connected_components(mask, 8)
        assert sum(p.area for p in parts) == mask.area
        acc = np.zeros_like(mask.bits, dtype=int)
        for p in parts:
            acc += p.bits
        assert acc.max(initial=0) <= 1
        assert np.array_equal(acc > 0, mask.bits)


class TestDistanceField:
    def test_single_pixel(self):
        bits = np.zeros((7, 7), dtype=bool)
        bits[3, 3] = True
        field = distance_field(BinaryMask(bits))
        assert field.values[3, 3] == 1.0
        assert np.count_nonzero(field.values) == 1

    def test_5x5_square_against_brute_force(self):
        # full 5x5 raster: border counts as background
        mask = BinaryMask(np.ones((5, 5), dtype=bool))
        field = distance_field(mask)
        brute = _brute_force_distance(mask.bits)
        assert np.allclose(field.values, brute / brute.max())
        assert field.values[2, 2] == 1.0
        corners = [field.values[0, 0], field.values[0, 4], field.values[4, 0], field.values[4, 4]]
        positive = field.values[mask.bits]
        assert np.allclose(corners, positive.min())

    def test_disk_max_at_center(self):
        yy, xx = np.mgrid[0:21, 0:21]
        disk = BinaryMask((yy - 10) ** 2 + (xx - 10) ** 2 <= 64)
        field = distance_field(disk)
        assert field.values[10, 10] == 1.0

    def test_empty_raises(self):
        with pytest.raises(EmptyMask):
            distance_field(BinaryMask.empty(4, 4))

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, seed):
        mask = random_mask(seed, max_side=20)
        if mask.area == 0:
            return
        assert np.allclose(euclidean_depth(mask), _brute_force_distance(mask.bits))

    @given(st.integers(0, 10_000), st.integers(1, 2))
    @settings(max_examples=30, deadline=None)
    def test_monotone_under_erosion(self, seed, radius):
        mask = random_blob(seed, side=32)
        eroded = erode(mask, radius)
        if eroded.area == 0:
            return
        full = euclidean_depth(mask)
        shrunk = euclidean_depth(eroded)
        assert (shrunk <= full + 1e-9).all()


def _brute_force_distance(bits: np.ndarray) -> np.ndarray:
    h, w = bits.shape
    bg = [(y, x) for y in range(-1, h + 1) for x in range(-1, w + 1)
          if y < 0 or y >= h or x < 0 or x >= w or not bits[y, x]]
    bg = np.array(bg, dtype=float)
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            if bits[y, x]:
                out[y, x] = np.sqrt(((bg - (y, x)) ** 2).sum(axis=1)).min()
    return out


class TestSkeletonize:
    def test_thin_bar_is_fixed_point(self):
        bits = np.zeros((5, 20), dtype=bool)
        bits[2, :] = True
        bar = BinaryMask(bits)
        assert skeletonize(bar) == bar

    def test_single_pixel(self):
        bits = np.zeros((3, 3), dtype=bool)
        bits[1, 1] = True
        assert skeletonize(BinaryMask(bits)) == BinaryMask(bits)

    def test_filled_square_thins_through_center(self):
        bits = np.zeros((24, 24), dtype=bool)
        bits[2:22, 2:22] = True
        skel = skeletonize(BinaryMask(bits))
        assert skel.area < 0.2 * 400
        assert skel.bits[11:13, 11:13].any()  # even-sided center block
        assert len(connected_components(skel, 8)) == 1

    def test_empty_raises(self):
        with pytest.raises(EmptyMask):
            skeletonize(BinaryMask.empty(4, 4))

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_subset_topology_idempotence(self, seed):
        mask = random_blob(seed)
        skel = skeletonize(mask)
        assert not (skel.bits & ~mask.bits).any()
        assert len(connected_components(skel, 8)) == len(connected_components(mask, 8))
        assert skeletonize(skel) == skel


class TestBoundingBox:
    def test_single_pixel(self):
        bits = np.zeros((10, 10), dtype=bool)
        bits[7, 3] = True
        assert bounding_box(BinaryMask(bits)) == Box(3, 7, 4, 8)

    def test_two_extremes(self):
        bits = np.zeros((5, 10), dtype=bool)
        bits[0, 0] = True
        bits[4, 9] = True
        box = bounding_box(BinaryMask(bits))
        assert box == Box(0, 0, 10, 5)
        assert (box.s1, box.s2) == (10, 5)

    def test_full_raster(self):
        assert bounding_box(BinaryMask(np.ones((4, 6), dtype=bool))) == Box(0, 0, 6, 4)

    def test_empty_raises(self):
        with pytest.raises(EmptyMask):
            bounding_box(BinaryMask.empty(3, 3))


class TestMaskOverlap:
    def test_identical(self):
        m = random_mask(3, max_side=10)
        inter, a, b = mask_overlap(m, m)
        assert inter == a == b == m.area

    def test_disjoint(self):
        bits = np.zeros((6, 6), dtype=bool)
        a = bits.copy()
        a[0:2, 0:2] = True
        b = bits.copy()
        b[4:6, 4:6] = True
        assert mask_overlap(BinaryMask(a), BinaryMask(b)) == (0, 4, 4)

    def test_shifted_square(self):
        a = np.zeros((20, 20), dtype=bool)
        a[5:15, 0:10] = True
        b = np.zeros((20, 20), dtype=bool)
        b[5:15, 5:15] = True
        assert mask_overlap(BinaryMask(a), BinaryMask(b)) == (50, 100, 100)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mask_overlap(BinaryMask.empty(4, 4), BinaryMask.empty(5, 4))

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_intersection_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        a = BinaryMask(rng.random((12, 12)) < 0.5)
        b = BinaryMask(rng.random((12, 12)) < 0.5)
        assert mask_overlap(a, b)[0] == mask_overlap(b, a)[0]


class TestLabelMap:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            LabelMap(np.array([[0, 7]], dtype=np.uint16), class_count=3)

    def test_class_mask_roundtrip(self):
        labels = np.array([[0, 1], [1, 0xFFFF]], dtype=np.uint16)
        lm = LabelMap(labels, class_count=2)
        assert lm.class_mask(1).area == 2
        assert lm.labeled_mask().area == 3
        assert lm.present_classes() == [0, 1]
