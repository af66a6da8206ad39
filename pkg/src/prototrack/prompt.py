"""Positional prompt generation and the cycle-consistent prompt gate."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadShapeError, EmptyMaskError, ZeroVectorError
from .tensor import (as_binary_mask, binarize, cosine_map, mask_iou, masked_gap,
                     norm_spatial)


@dataclass
class OpCounter:
    """Per-frame instrumentation: prototype cosines and prior-map evaluations.

    One prior map is one discriminative prior (the FG/BG similarity pair for a
    single memory) or one positional prior.
    """

    cosine_evals: int = 0
    prior_maps: int = 0

    def reset(self) -> None:
        self.cosine_evals = 0
        self.prior_maps = 0


@dataclass
class PromptDecision:
    prompt: np.ndarray
    accepted: bool
    mean_iou: float
    per_memory_iou: list[float] = field(default_factory=list)


def _tick(counter: OpCounter | None) -> None:
    if counter is not None:
        counter.prior_maps += 1


def positional_field(h: int, w: int, c: int) -> np.ndarray:
    """Sinusoidal 2-D encoding rescaled onto [0, 1].

    The first ``c/2`` channels encode the row, the rest the column.  Each half
    holds sin/cos pairs over the normalised coordinate at angular frequencies
    pi, pi/2, pi/4, ..., so no pair wraps past half a period on the grid and
    similarity falls off monotonically with distance.
    """
    if c < 4 or c % 2:
        raise BadShapeError(f"positional field needs an even channel count >= 4, got {c}")
    half = c // 2
    npairs = half // 2
    freqs = np.pi / 2.0 ** np.arange(npairs)

    def encode(n: int) -> np.ndarray:
        u = np.arange(n) / max(n - 1, 1)
        ang = u[:, None] * freqs[None, :]
        e = np.concatenate([np.sin(ang), np.cos(ang)], axis=1)
        if half % 2:
            # odd half: pad with the lowest-frequency sine
            e = np.concatenate([e, np.sin(ang[:, -1:] / 2.0)], axis=1)
        return (e + 1.0) / 2.0

    ey = encode(h)
    ex = encode(w)
    out = np.empty((h, w, c))
    out[..., :half] = ey[:, None, :]
    out[..., half:] = ex[None, :, :]
    return out


def discriminative_prior(features, fg, bg, counter: OpCounter | None = None) -> np.ndarray:
    """Where a pixel looks more like the FG prototype than the BG one."""
    _tick(counter)
    try:
        m_fg = norm_spatial(cosine_map(features, fg))
        m_bg = norm_spatial(cosine_map(features, bg))
    except ZeroVectorError:
        return np.zeros(np.shape(features)[:2])
    return norm_spatial(np.maximum(m_fg - m_bg, 0.0))


def positional_prior(pos_field, prev_mask, counter: OpCounter | None = None) -> np.ndarray:
    """Similarity of every position to where the target was last seen."""
    _tick(counter)
    try:
        p = masked_gap(pos_field, prev_mask)
    except EmptyMaskError:
        return np.ones(np.shape(pos_field)[:2])
    return norm_spatial(cosine_map(pos_field, p))


def fuse_prompt(disc, pos) -> np.ndarray:
    disc = np.asarray(disc, dtype=np.float64)
    pos = np.asarray(pos, dtype=np.float64)
    if disc.shape != pos.shape:
        raise BadShapeError(f"prior shape mismatch: {disc.shape} vs {pos.shape}")
    return norm_spatial(disc * pos)


def generate_prompt(features, fg_prototypes: Sequence, bg_prototypes: Sequence,
                    pos_field, prev_mask, counter: OpCounter | None = None) -> np.ndarray:
    """Average of the per-memory positional mask prompts."""
    if not fg_prototypes or len(fg_prototypes) != len(bg_prototypes):
        raise ValueError("need at least one memory, with FG and BG prototypes aligned")
    pos = positional_prior(pos_field, prev_mask, counter)
    prompts = [fuse_prompt(discriminative_prior(features, fg, bg, counter), pos)
               for fg, bg in zip(fg_prototypes, bg_prototypes)]
    return np.mean(prompts, axis=0)


def cycle_consistent_gate(features, mask_with, mask_without, memory_features: Sequence,
                          memory_masks: Sequence, pos_field, beta: float = 0.7,
                          prompt=None, binarize_threshold: float = 0.5,
                          counter: OpCounter | None = None) -> PromptDecision:
    """Decide whether the prompted prediction may be kept.

    Prototypes of the prompted prediction are projected back onto every
    selected memory; the binarised reverse prompts must overlap the masks those
    memories predicted with mean IoU of at least ``beta``.  ``mask_without`` is
    not used by the test itself, the caller falls back to it on rejection.
    """
    mask_with = as_binary_mask(mask_with)
    as_binary_mask(mask_without)
    n = len(memory_features)
    if prompt is None:
        prompt = np.zeros(mask_with.shape)
    rejected = PromptDecision(prompt, False, 0.0, [0.0] * n)
    if n == 0:
        return rejected
    try:
        fg = masked_gap(features, mask_with)
        bg = masked_gap(features, ~mask_with)
    except EmptyMaskError:
        return rejected
    pos = positional_prior(pos_field, mask_with, counter)
    ious = []
    for feats, stored in zip(memory_features, memory_masks):
        reverse = fuse_prompt(discriminative_prior(feats, fg, bg, counter), pos)
        ious.append(mask_iou(binarize(reverse, binarize_threshold), stored))
    mean = float(np.mean(ious))
    return PromptDecision(prompt, mean >= beta, mean, ious)
