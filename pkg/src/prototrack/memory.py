"""Prototypical memory bank: per-frame records, anchor scoring and calibration."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EmptyMaskError, MissingEntryError, SequenceError, ZeroVectorError
from .tensor import as_binary_mask, as_feature_map, cosine, masked_gap, norm_scalar

TOP_K = 5


def encode_memory(features: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Default memory encoder: the features with the predicted mask appended as
    a last channel, so a reader can attend over both target and background."""
    return np.concatenate([features, mask[..., None].astype(np.float64)], axis=-1)


@dataclass(frozen=True)
class MemoryEntry:
    frame_index: int
    memory: np.ndarray
    features: np.ndarray
    fg_prototype: np.ndarray
    bg_prototype: np.ndarray
    predicted_mask: np.ndarray
    # prediction was empty, prototypes were carried forward
    degenerate: bool = False


@dataclass
class CalibrationResult:
    selected_indices: list[int]
    # frame -> (s_feat, s_pos, s_fused)
    scores: dict[int, tuple[float, float, float]] = field(default_factory=dict)
    similarity_evaluations: int = 0


def fuse_score(s_feat: float, s_pos: float, alpha: float) -> float:
    return (1.0 - alpha) * s_feat + alpha * s_pos


def _score(a: np.ndarray, b: np.ndarray) -> float:
    # a zero FG prototype can only come from all-zero features under the mask;
    # rank such a frame last rather than abort calibration
    try:
        return norm_scalar(cosine(a, b))
    except ZeroVectorError:
        return 0.0


class PrototypicalMemoryBank:
    """Ordered store of :class:`MemoryEntry` records for one track.

    Frame 1 is the prompted frame: it is always the feature-wise anchor and is
    never scored as a candidate.
    """

    def __init__(self, alpha: float = 0.3, window: int = 30,
                 encoder: Callable[[np.ndarray, np.ndarray], np.ndarray] = encode_memory):
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.alpha = alpha
        self.window = window
        self.encoder = encoder
        self.entries: list[MemoryEntry] = []
        self._by_index: dict[int, MemoryEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, frame_index: int) -> bool:
        return frame_index in self._by_index

    def __getitem__(self, frame_index: int) -> MemoryEntry:
        try:
            return self._by_index[frame_index]
        except KeyError:
            raise MissingEntryError(f"no memory for frame {frame_index}") from None

    @property
    def last_index(self) -> int:
        return self.entries[-1].frame_index if self.entries else 0

    def add_memory(self, frame_index: int, features, mask, memory=None) -> MemoryEntry:
        if frame_index != self.last_index + 1:
            raise SequenceError(f"expected frame {self.last_index + 1}, got {frame_index}")
        features = as_feature_map(features)
        mask = as_binary_mask(mask)
        if memory is None:
            memory = self.encoder(features, mask)
        degenerate = False
        try:
            fg = masked_gap(features, mask)
        except EmptyMaskError:
            degenerate = True
            fg = self._carry("fg_prototype", features)
        try:
            bg = masked_gap(features, ~mask)
        except EmptyMaskError:
            bg = self._carry("bg_prototype", features)
        entry = MemoryEntry(frame_index, memory, features, fg, bg, mask, degenerate)
        self.entries.append(entry)
        self._by_index[frame_index] = entry
        return entry

    def _carry(self, attr: str, features: np.ndarray) -> np.ndarray:
        for e in reversed(self.entries):
            if not e.degenerate:
                return getattr(e, attr)
        # nothing to carry: whole-frame average
        return features.reshape(-1, features.shape[-1]).mean(axis=0)

    def candidate_set(self, t: int) -> list[int]:
        return list(range(max(2, t - self.window), t - 1))

    def position_anchor(self, t: int) -> int:
        """Frame standing in for t-1: the latest non-degenerate frame before t,
        or 1 when there is none besides the prompted frame."""
        for k in range(t - 1, 1, -1):
            if k in self._by_index and not self._by_index[k].degenerate:
                return k
        return 1

    def anchor_scores(self, tau: int, t: int) -> tuple[float, float]:
        p = self[tau].fg_prototype
        s_feat = norm_scalar(cosine(p, self[1].fg_prototype))
        s_pos = norm_scalar(cosine(p, self[self.position_anchor(t)].fg_prototype))
        return s_feat, s_pos

    def calibrate(self, t: int, alpha: float | None = None) -> CalibrationResult:
        """Select anchors plus the top-5 candidates by fused anchor score."""
        if t < 2:
            raise SequenceError("calibration needs t >= 2")
        if t - 1 not in self._by_index:
            raise MissingEntryError(f"no memory for frame {t - 1}")
        alpha = self.alpha if alpha is None else alpha
        anchor = self.position_anchor(t)
        if anchor == 1:
            alpha = 0.0
        p1 = self[1].fg_prototype
        pa = self[anchor].fg_prototype
        scores: dict[int, tuple[float, float, float]] = {}
        evals = 0
        for tau in self.candidate_set(t):
            e = self._by_index[tau]
            if e.degenerate or tau == anchor:
                continue
            s_feat = _score(e.fg_prototype, p1)
            s_pos = _score(e.fg_prototype, pa)
            evals += 2
            scores[tau] = (s_feat, s_pos, fuse_score(s_feat, s_pos, alpha))
        ranked = sorted(scores, key=lambda k: (scores[k][2], k), reverse=True)
        selected = [1] if anchor == 1 else [1, anchor]
        selected += ranked[:TOP_K]
        return CalibrationResult(selected, scores, evals)

    def recent(self, t: int, count: int, include_first: bool = True) -> CalibrationResult:
        """Selection by recency alone, degenerate frames included."""
        prior = [k for k in range(t - 1, 0, -1) if k in self._by_index]
        if include_first:
            rest = [k for k in prior if k != 1][:count]
            return CalibrationResult([1] + rest)
        return CalibrationResult(prior[:count])

    def select_memories(self, result: CalibrationResult):
        """Aligned ``(memories, fg_prototypes, bg_prototypes, masks)`` lists."""
        entries = [self[k] for k in result.selected_indices]
        return ([e.memory for e in entries], [e.fg_prototype for e in entries],
                [e.bg_prototype for e in entries], [e.predicted_mask for e in entries])
