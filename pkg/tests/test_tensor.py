from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prototrack.errors import (BadShapeError, DomainError, EmptyMaskError, ZeroVectorError)
from prototrack.tensor import (EMPTY_BOX, BBox, as_binary_mask, as_feature_map, binarize,
                               box_to_mask, cosine, cosine_map, mask_iou, mask_to_bbox,
                               masked_gap, norm_scalar, norm_spatial)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vectors(n):
    return arrays(np.float64, n, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3)


def test_cosine_examples():
    assert cosine([1, 0], [1, 0]) == 1.0
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 2, 2], [2, 1, 2]) == pytest.approx(8 / 9, abs=1e-12)


def test_cosine_zero_vector():
    with pytest.raises(ZeroVectorError):
        cosine([0, 0], [1, 0])
    with pytest.raises(BadShapeError):
        cosine([1, 0], [1, 0, 0])


@given(vectors(5), vectors(5), st.floats(0.01, 100), st.floats(0.01, 100))
def test_cosine_scale_invariant(a, b, lam, mu):
    assert cosine(lam * a, mu * b) == pytest.approx(cosine(a, b), abs=1e-9)


@given(vectors(4), vectors(4))
def test_norm_of_cosine_in_unit_interval(a, b):
    assert 0.0 <= norm_scalar(cosine(a, b)) <= 1.0


def test_norm_scalar():
    assert norm_scalar(1.0) == 1.0
    assert norm_scalar(-1.0) == 0.0
    assert norm_scalar(0.0) == 0.5
    assert norm_scalar(1.0 + 1e-10) == 1.0
    with pytest.raises(DomainError):
        norm_scalar(1.01)


def test_norm_spatial_examples():
    assert np.array_equal(norm_spatial(np.full((3, 3), 0.7)), np.zeros((3, 3)))
    assert np.allclose(norm_spatial([[0.2, 0.8]]), [[0.0, 1.0]])
    assert np.allclose(norm_spatial([[-0.5, 0.0, 0.5]]), [[0.0, 0.5, 1.0]])
    with pytest.raises(DomainError):
        norm_spatial([[0.0, np.nan]])


@given(arrays(np.float64, (4, 5), elements=finite))
def test_norm_spatial_range(m):
    out = norm_spatial(m)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_masked_gap_examples():
    f = np.full((3, 3, 2), 4.0)
    assert np.array_equal(masked_gap(f, np.ones((3, 3), bool)), [4.0, 4.0])
    m = np.zeros((3, 3), bool)
    m[1, 1:] = True
    f[m] = [1.0, -2.0]
    assert np.array_equal(masked_gap(f, m), [1.0, -2.0])
    with pytest.raises(EmptyMaskError):
        masked_gap(f, np.zeros((3, 3)))


def _gap_oracle(f, m):
    acc = np.zeros(f.shape[-1])
    n = 0
    for y in range(f.shape[0]):
        for x in range(f.shape[1]):
            if m[y, x]:
                acc += f[y, x]
                n += 1
    return acc / n


@given(st.integers(1, 16), st.integers(1, 16), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_masked_gap_matches_loop(h, w, c, seed):
    r = np.random.default_rng(seed)
    f = r.standard_normal((h, w, c))
    m = r.random((h, w)) < 0.4
    m[r.integers(h), r.integers(w)] = True
    assert np.allclose(masked_gap(f, m), _gap_oracle(f, m), atol=1e-12)


def test_mask_iou_examples():
    a = np.zeros((2, 3), bool)
    a[:, :2] = True
    b = np.zeros((2, 3), bool)
    b[:, 1:] = True
    assert mask_iou(a, a) == 1.0
    assert mask_iou(a, ~a) == 0.0
    assert mask_iou(a, b) == pytest.approx(1 / 3)
    assert mask_iou(np.zeros((2, 2)), np.zeros((2, 2))) == 1.0


@given(arrays(bool, (5, 5)), arrays(bool, (5, 5)))
def test_mask_iou_properties(a, b):
    v = mask_iou(a, b)
    assert v == mask_iou(b, a)
    assert 0.0 <= v <= 1.0
    if a.any() or b.any():
        assert (v == 1.0) == bool(np.array_equal(a, b))


def test_binarize():
    assert not binarize(np.zeros((2, 2)), 0.5).any()
    assert binarize(np.ones((2, 2)), 0.5).all()
    assert binarize(np.array([0.3, 0.6]), 0.5).tolist() == [False, True]
    # strict comparison at the threshold
    assert binarize(np.array([0.5]), 0.5).tolist() == [False]
    with pytest.raises(DomainError):
        binarize(np.zeros(2), 1.0)


def test_mask_to_bbox_examples():
    m = np.zeros((8, 8), bool)
    m[3, 5] = True
    assert mask_to_bbox(m) == BBox(5, 3, 1, 1)
    assert mask_to_bbox(np.zeros((4, 4))) == EMPTY_BOX
    m = np.zeros((8, 8), bool)
    m[1, 1] = m[4, 6] = True
    assert mask_to_bbox(m) == BBox(1, 1, 6, 4)


@given(arrays(bool, (6, 7)).filter(lambda m: m.any()))
def test_mask_to_bbox_tight(m):
    b = mask_to_bbox(m)
    inside = box_to_mask(b, *m.shape)
    assert not (m & ~inside).any()
    # every side touches a set pixel, so shrinking any side loses one
    for shrunk in (BBox(b.x + 1, b.y, b.w - 1, b.h), BBox(b.x, b.y + 1, b.w, b.h - 1),
                   BBox(b.x, b.y, b.w - 1, b.h), BBox(b.x, b.y, b.w, b.h - 1)):
        assert (m & ~box_to_mask(shrunk, *m.shape)).any()


def test_box_helpers():
    b = BBox(2, 3, 4, 6)
    assert b.center == (4.0, 6.0) and b.area == 24 and not b.empty
    assert EMPTY_BOX.empty
    assert box_to_mask(BBox(-2, -2, 4, 4), 5, 5).sum() == 4


def test_cosine_map_zero_pixels_and_shapes():
    f = np.zeros((2, 2, 3))
    f[0, 0] = [1, 0, 0]
    out = cosine_map(f, np.array([1.0, 0, 0]))
    assert out.tolist() == [[1.0, 0.0], [0.0, 0.0]]
    with pytest.raises(ZeroVectorError):
        cosine_map(f, np.zeros(3))
    with pytest.raises(BadShapeError):
        cosine_map(f, np.ones(2))


def test_input_validation():
    with pytest.raises(DomainError):
        as_feature_map(np.full((2, 2, 2), np.inf))
    with pytest.raises(BadShapeError):
        as_feature_map(np.zeros((2, 2)))
    with pytest.raises(DomainError):
        as_binary_mask(np.array([[0.5]]))
