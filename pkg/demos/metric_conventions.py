"""The metric conventions on toy box sequences.

Run: python3 demos/metric_conventions.py
"""
from __future__ import annotations

import numpy as np

from prototrack.metrics import (SUCCESS_THRESHOLDS, attribute_breakdown, box_iou, evaluate,
                                success_curve)
from prototrack.tensor import EMPTY_BOX, BBox

gt = [BBox(10 + 2 * i, 12, 8, 8) for i in range(10)]

# perfect tracking still misses the last threshold, IoU > 1.0 never holds
perfect = evaluate(gt, gt)
print("perfect  AUC", round(perfect.auc, 4), "= 20/21 ->", round(20 / 21, 4))

drift = [BBox(b.x + i, b.y, b.w, b.h) for i, b in enumerate(gt)]
print("drifting boxes, per-frame IoU:", np.round([box_iou(p, g) for p, g in zip(drift, gt)], 3))
curve = success_curve(drift, gt)
print("success curve:", {f"{th:.2f}": float(v) for th, v in zip(SUCCESS_THRESHOLDS[::5], curve[::5])})
print(evaluate(drift, gt))

# losing the target: an empty prediction is a miss, unless the target is gone too
lost = drift[:6] + [EMPTY_BOX] * 4
print("lost after frame 6: AO", round(evaluate(lost, gt).ao, 4))
print("empty vs empty IoU:", box_iou(EMPTY_BOX, EMPTY_BOX))

# attribute tables average sequence AUCs per tag
table = attribute_breakdown([(perfect, {"FOC"}), (evaluate(drift, gt), {"FOC", "BC"})])
print("per-attribute AUC:", {k: round(v, 4) for k, v in table.items()})
