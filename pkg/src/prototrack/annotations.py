"""Ground-truth text files in the LaSOT / GOT-10k layout.

A sequence directory holds ``groundtruth.txt`` (one ``x,y,w,h`` per line),
optionally ``full_occlusion.txt`` and ``out_of_view.txt`` (a single line of
comma-separated 0/1 flags), optionally ``attributes.txt`` (comma-separated
tags) and, for tracking, ``features.npy`` with shape ``(T, H, W, C)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LengthMismatchError, ParseError
from .tensor import BBox


@dataclass
class AnnotationSequence:
    boxes: list[BBox]
    full_occlusion: list[bool] | None = None
    out_of_view: list[bool] | None = None
    attributes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("full_occlusion", "out_of_view"):
            flags = getattr(self, name)
            if flags is not None and len(flags) != len(self.boxes):
                raise LengthMismatchError(
                    f"{name} has {len(flags)} flags for {len(self.boxes)} boxes")

    def __len__(self) -> int:
        return len(self.boxes)


def _number(tok: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok.strip()!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {tok.strip()!r}", line)
    return v


def parse_boxes(text: str) -> list[BBox]:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    boxes = []
    for i, raw in enumerate(lines, start=1):
        parts = raw.strip().split(",")
        if len(parts) != 4:
            raise ParseError(f"expected 4 comma-separated values, got {len(parts)}", i)
        x, y, w, h = (_number(p, i) for p in parts)
        if w < 0 or h < 0:
            raise ParseError("negative box size", i)
        boxes.append(BBox(x, y, w, h))
    return boxes


def parse_flags(text: str) -> list[bool]:
    line = text.strip()
    if not line:
        return []
    out = []
    for tok in line.split(","):
        tok = tok.strip()
        if tok not in ("0", "1"):
            raise ParseError(f"flag must be 0 or 1, got {tok!r}", 1)
        out.append(tok == "1")
    return out


def parse_groundtruth(text: str, full_occlusion: str | None = None,
                      out_of_view: str | None = None,
                      attributes: str | None = None) -> AnnotationSequence:
    """Parse box lines plus the optional companion flag files' contents."""
    boxes = parse_boxes(text)
    occ = parse_flags(full_occlusion) if full_occlusion is not None else None
    oov = parse_flags(out_of_view) if out_of_view is not None else None
    tags = frozenset()
    if attributes is not None:
        tags = frozenset(t.strip() for t in attributes.split(",") if t.strip())
    return AnnotationSequence(boxes, occ, oov, tags)


def _fmt(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def serialize_boxes(boxes) -> str:
    """Inverse of :func:`parse_boxes`; integral values are written without a decimal point."""
    return "".join(",".join(_fmt(v) for v in BBox(*b)) + "\n" for b in boxes)


def load_annotations(directory) -> AnnotationSequence:
    d = Path(directory)
    gt = d / "groundtruth.txt"
    if not gt.is_file():
        raise FileNotFoundError(f"no groundtruth.txt in {d}")

    def optional(name):
        p = d / name
        return p.read_text() if p.is_file() else None

    return parse_groundtruth(gt.read_text(), optional("full_occlusion.txt"),
                             optional("out_of_view.txt"), optional("attributes.txt"))


def load_sequence_dir(directory) -> tuple[np.ndarray, AnnotationSequence]:
    """Features and annotations of one on-disk sequence."""
    d = Path(directory)
    ann = load_annotations(d)
    fpath = d / "features.npy"
    if not fpath.is_file():
        raise FileNotFoundError(f"no features.npy in {d}")
    feats = np.load(fpath, allow_pickle=False)
    if feats.ndim != 4:
        raise ValueError(f"features.npy must be (T, H, W, C), got shape {feats.shape}")
    if feats.shape[0] != len(ann):
        raise LengthMismatchError(f"{feats.shape[0]} feature frames for {len(ann)} boxes")
    return feats, ann
