"""One-pass tracking metrics: success AUC, precision, normalised precision, AO/SR.

Conventions shared by every metric:

* overlap thresholds use strict inequality, ``IoU > theta``;
* two empty boxes agree perfectly (IoU 1, centre distance 0), an empty box
  against a non-empty one is a complete miss (IoU 0, infinite distance).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import LengthMismatchError
from .tensor import BBox

SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 21)
NORM_PRECISION_THRESHOLDS = np.linspace(0.0, 0.5, 51)
PRECISION_PIXELS = 20.0
PRECISION_CURVE_PIXELS = np.arange(0, 51)


@dataclass
class MetricReport:
    auc: float
    precision: float
    norm_precision: float
    ao: float
    sr50: float
    sr75: float
    frames: int
    per_attribute_auc: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def box_iou(a: BBox, b: BBox) -> float:
    a, b = BBox(*a), BBox(*b)
    if a.empty and b.empty:
        return 1.0
    if a.empty or b.empty:
        return 0.0
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area + b.area - inter
    return float(inter / union)


def _pair(pred: Sequence, gt: Sequence) -> None:
    if len(pred) != len(gt):
        raise LengthMismatchError(f"{len(pred)} predicted boxes vs {len(gt)} ground-truth boxes")
    if len(gt) == 0:
        raise LengthMismatchError("empty sequence")


def ious(pred, gt) -> np.ndarray:
    _pair(pred, gt)
    return np.array([box_iou(p, g) for p, g in zip(pred, gt)])


def center_errors(pred, gt, normalized: bool = False) -> np.ndarray:
    """Centre distances in pixels, or as multiples of the GT box size per axis."""
    _pair(pred, gt)
    out = np.empty(len(gt))
    for i, (p, g) in enumerate(zip(pred, gt)):
        p, g = BBox(*p), BBox(*g)
        if p.empty and g.empty:
            out[i] = 0.0
        elif p.empty or g.empty:
            out[i] = np.inf
        else:
            (px, py), (gx, gy) = p.center, g.center
            dx, dy = px - gx, py - gy
            if normalized:
                dx, dy = dx / g.w, dy / g.h
            out[i] = np.hypot(dx, dy)
    return out


def success_curve(pred, gt, thresholds=SUCCESS_THRESHOLDS) -> np.ndarray:
    o = ious(pred, gt)
    return np.array([(o > th).mean() for th in thresholds])


def success_auc(pred, gt, thresholds=SUCCESS_THRESHOLDS) -> float:
    return float(success_curve(pred, gt, thresholds).mean())


def precision(pred, gt, pixels: float = PRECISION_PIXELS) -> float:
    return float((center_errors(pred, gt) <= pixels).mean())


def precision_curve(pred, gt, pixels=PRECISION_CURVE_PIXELS) -> np.ndarray:
    d = center_errors(pred, gt)
    return np.array([(d <= th).mean() for th in pixels])


def norm_precision_curve(pred, gt, thresholds=NORM_PRECISION_THRESHOLDS) -> np.ndarray:
    d = center_errors(pred, gt, normalized=True)
    return np.array([(d <= th).mean() for th in thresholds])


def norm_precision(pred, gt, thresholds=NORM_PRECISION_THRESHOLDS) -> float:
    return float(norm_precision_curve(pred, gt, thresholds).mean())


def ao_sr(pred, gt) -> tuple[float, float, float]:
    o = ious(pred, gt)
    return float(o.mean()), float((o > 0.5).mean()), float((o > 0.75).mean())


def evaluate(pred, gt) -> MetricReport:
    ao, sr50, sr75 = ao_sr(pred, gt)
    return MetricReport(
        auc=success_auc(pred, gt), precision=precision(pred, gt),
        norm_precision=norm_precision(pred, gt), ao=ao, sr50=sr50, sr75=sr75,
        frames=len(gt))


def attribute_breakdown(reports: Iterable[tuple[MetricReport, Iterable[str]]]) -> dict[str, float]:
    """Mean AUC over the sequences carrying each attribute tag."""
    groups: dict[str, list[float]] = {}
    items = list(reports)
    if not items:
        raise ValueError("attribute breakdown needs at least one sequence")
    for rep, tags in items:
        for tag in set(tags):
            groups.setdefault(tag, []).append(rep.auc)
    return {tag: float(np.mean(v)) for tag, v in sorted(groups.items())}
