"""Feature-map, mask and box primitives.

Feature maps are ``(H, W, C)`` float arrays, masks are ``(H, W)`` arrays
(bool for binary masks, float in ``[0, 1]`` for probability masks) and
prototypes are ``(C,)`` vectors.  Every function here is pure.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import BadShapeError, DomainError, EmptyMaskError, ZeroVectorError

# max - min at or below this is treated as a constant map
FLAT_EPS = 1e-12


class BBox(NamedTuple):
    """Axis-aligned box, top-left corner plus size. ``w == h == 0`` is empty."""

    x: float
    y: float
    w: float
    h: float

    @property
    def empty(self) -> bool:
        return self.w <= 0 or self.h <= 0

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return max(self.w, 0.0) * max(self.h, 0.0)


EMPTY_BOX = BBox(0, 0, 0, 0)


def as_feature_map(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 3 or min(f.shape) < 1:
        raise BadShapeError(f"feature map must be (H, W, C) with positive sizes, got {f.shape}")
    if not np.all(np.isfinite(f)):
        raise DomainError("feature map contains non-finite values")
    return f


def as_binary_mask(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise BadShapeError(f"mask must be (H, W), got {m.shape}")
    if m.dtype != bool:
        if not np.all((m == 0) | (m == 1)):
            raise DomainError("binary mask values must be exactly 0 or 1")
        m = m.astype(bool)
    return m


def _check_same_hw(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise BadShapeError(f"spatial size mismatch: {a.shape[:2]} vs {b.shape[:2]}")


def cosine(a, b) -> float:
    """Cosine similarity of two prototypes. Raises ZeroVectorError on a zero vector."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise BadShapeError(f"prototype length mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def norm_scalar(s: float, tol: float = 1e-9) -> float:
    """Affine map of a cosine score from [-1, 1] onto [0, 1]."""
    if not (-1.0 - tol <= s <= 1.0 + tol):
        raise DomainError(f"score {s} outside [-1, 1]")
    return float(np.clip((s + 1.0) / 2.0, 0.0, 1.0))


def norm_spatial(m) -> np.ndarray:
    """Min-max normalise a map onto [0, 1]; a constant map becomes all zeros."""
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise DomainError("map contains non-finite values")
    lo = m.min()
    hi = m.max()
    if hi - lo <= FLAT_EPS:
        return np.zeros_like(m)
    return np.clip((m - lo) / (hi - lo), 0.0, 1.0)


def cosine_map(features, prototype) -> np.ndarray:
    """Per-pixel cosine between a feature map and one prototype.

    Pixels whose feature vector is exactly zero score 0.
    """
    f = np.asarray(features, dtype=np.float64)
    p = np.asarray(prototype, dtype=np.float64)
    if p.shape != (f.shape[-1],):
        raise BadShapeError(f"prototype has {p.shape} channels, features have {f.shape[-1]}")
    pn = np.linalg.norm(p)
    if pn == 0.0:
        raise ZeroVectorError("prototype is a zero vector")
    fn = np.linalg.norm(f, axis=-1)
    dots = f @ p
    out = np.zeros(f.shape[:2])
    ok = fn > 0
    out[ok] = dots[ok] / (fn[ok] * pn)
    return np.clip(out, -1.0, 1.0)


def masked_gap(features, mask) -> np.ndarray:
    """Per-channel mean of ``features`` over the pixels where ``mask`` is set."""
    f = np.asarray(features, dtype=np.float64)
    m = as_binary_mask(mask)
    _check_same_hw(f, m)
    n = int(m.sum())
    if n == 0:
        raise EmptyMaskError("masked average over an empty mask")
    return f[m].sum(axis=0) / n


def mask_iou(a, b) -> float:
    a = as_binary_mask(a)
    b = as_binary_mask(b)
    _check_same_hw(a, b)
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def binarize(m, threshold: float = 0.5) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold {threshold} outside (0, 1)")
    return np.asarray(m, dtype=np.float64) > threshold


def mask_to_bbox(mask) -> BBox:
    """Tight box around the set pixels; rows are y, columns are x."""
    m = as_binary_mask(mask)
    ys, xs = np.nonzero(m)
    if ys.size == 0:
        return EMPTY_BOX
    y0, y1 = int(ys.min()), int(ys.max())
    x0, x1 = int(xs.min()), int(xs.max())
    return BBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def box_to_mask(box: BBox, height: int, width: int) -> np.ndarray:
    """Rasterise a box onto a grid, clipped to the grid bounds."""
    m = np.zeros((height, width), dtype=bool)
    if box.empty:
        return m
    x0 = max(int(np.floor(box.x)), 0)
    y0 = max(int(np.floor(box.y)), 0)
    x1 = min(int(np.ceil(box.x + box.w)), width)
    y1 = min(int(np.ceil(box.y + box.h)), height)
    if x1 > x0 and y1 > y0:
        m[y0:y1, x0:x1] = True
    return m
