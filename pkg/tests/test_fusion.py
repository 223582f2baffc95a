import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sesam.errors import DimensionMismatch
from sesam.fusion import (
    SourceTag,
    SupervisionMap,
    compose_supervision,
    filter_pseudo,
    layer_from_tag,
)
from sesam.raster import IGNORE_VALUE, LabelMap, ScalarField


def layer(values, class_count=6):
    return LabelMap(np.array(values, dtype=np.uint16), class_count)


def random_layer(rng, shape, class_count=6, labeled_frac=0.5):
    labels = rng.integers(0, class_count, shape).astype(np.uint16)
    labels[rng.random(shape) > labeled_frac] = IGNORE_VALUE
    return LabelMap(labels, class_count)


class TestFilterPseudo:
    def test_zero_confidence_all_ignore(self):
        pred = layer([[1, 2], [3, 4]])
        conf = ScalarField(np.zeros((2, 2)))
        out = filter_pseudo(pred, conf, 0.96)
        assert (out.labels == IGNORE_VALUE).all()

    def test_full_confidence_identity(self):
        pred = layer([[1, 2], [3, 4]])
        conf = ScalarField(np.ones((2, 2)))
        assert np.array_equal(filter_pseudo(pred, conf, 0.96).labels, pred.labels)

    def test_checkerboard_threshold(self):
        pred = layer([[1, 1], [1, 1]])
        conf = ScalarField(np.array([[0.95, 0.97], [0.97, 0.95]]))
        out = filter_pseudo(pred, conf, 0.96)
        expect = np.array(
            [[IGNORE_VALUE, 1], [1, IGNORE_VALUE]], dtype=np.uint16
        )
        assert np.array_equal(out.labels, expect)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            filter_pseudo(layer([[1]]), ScalarField(np.ones((2, 2))), 0.96)


class TestComposeSupervision:
    def test_weak_beats_sam(self):
        weak = layer([[3]])
        sam = layer([[5]])
        pseudo = layer([[IGNORE_VALUE]])
        sup = compose_supervision(weak, sam, pseudo)
        assert sup.labels.labels[0, 0] == 3
        assert sup.source[0, 0] == SourceTag.WEAK

    def test_sam_beats_pseudo(self):
        sup = compose_supervision(
            layer([[IGNORE_VALUE]]), layer([[5]]), layer([[1]])
        )
        assert sup.labels.labels[0, 0] == 5
        assert sup.source[0, 0] == SourceTag.SAM

    def test_all_ignore(self):
        ing = layer([[IGNORE_VALUE]])
        sup = compose_supervision(ing, ing, ing)
        assert sup.labels.labels[0, 0] == IGNORE_VALUE
        assert sup.source[0, 0] == SourceTag.IGNORE

    def test_tag_counts_sum_to_raster(self):
        rng = np.random.default_rng(1)
        sup = compose_supervision(
            random_layer(rng, (17, 13)),
            random_layer(rng, (17, 13)),
            random_layer(rng, (17, 13)),
        )
        counts = sup.tag_counts()
        assert sum(counts.values()) == 17 * 13

    def test_tag_label_consistency_enforced(self):
        labels = layer([[1, IGNORE_VALUE]])
        good = np.array([[SourceTag.SAM, SourceTag.IGNORE]], dtype=np.uint16)
        SupervisionMap(labels, good)
        bad = np.array([[SourceTag.IGNORE, SourceTag.IGNORE]], dtype=np.uint16)
        with pytest.raises(ValueError):
            SupervisionMap(layer([[1, IGNORE_VALUE]]), bad)

    @given(st.integers(0, 100_000))
    @settings(max_examples=120, deadline=None)
    def test_idempotent_recomposition(self, seed):
        rng = np.random.default_rng(seed)
        shape = (int(rng.integers(1, 20)), int(rng.integers(1, 20)))
        weak = random_layer(rng, shape, labeled_frac=rng.uniform(0, 1))
        sam = random_layer(rng, shape, labeled_frac=rng.uniform(0, 1))
        pseudo = random_layer(rng, shape, labeled_frac=rng.uniform(0, 1))
        sup = compose_supervision(weak, sam, pseudo)
        again = compose_supervision(
            layer_from_tag(sup, SourceTag.WEAK),
            layer_from_tag(sup, SourceTag.SAM),
            layer_from_tag(sup, SourceTag.PSEUDO),
        )
        assert np.array_equal(again.labels.labels, sup.labels.labels)
        assert np.array_equal(again.source, sup.source)

    @given(st.integers(0, 100_000))
    @settings(max_examples=120, deadline=None)
    def test_precedence_and_consistency_fuzz(self, seed):
        rng = np.random.default_rng(seed)
        shape = (int(rng.integers(1, 24)), int(rng.integers(1, 24)))
        weak = random_layer(rng, shape, labeled_frac=rng.uniform(0, 1))
        sam = random_layer(rng, shape, labeled_frac=rng.uniform(0, 1))
        pseudo = random_layer(rng, shape, labeled_frac=rng.uniform(0, 1))
        sup = compose_supervision(weak, sam, pseudo)
        weak_labeled = weak.labels != IGNORE_VALUE
        assert np.array_equal(sup.labels.labels[weak_labeled], weak.labels[weak_labeled])
        assert (sup.source[weak_labeled] == SourceTag.WEAK).all()
        # consistency: IGNORE tag iff ignore label (checked by construction too)
        tag_ignore = sup.source == SourceTag.IGNORE
        lbl_ignore = sup.labels.labels == IGNORE_VALUE
        assert np.array_equal(tag_ignore, lbl_ignore)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            compose_supervision(layer([[1]]), layer([[1, 2]]), layer([[1]]))
