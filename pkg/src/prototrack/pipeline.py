"""The tracking loop: calibrate memories, condition, prompt, decode, gate, store.

The learned parts of a memory-based video segmenter are replaced by small
deterministic stand-ins behind two interfaces, a feature provider and a
segmentation head, so the memory and prompt logic runs end to end on
synthetic or precomputed features.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Protocol

import numpy as np

from .config import RunConfig
from .errors import BadPromptError, SequenceError
from .memory import CalibrationResult, PrototypicalMemoryBank
from .prompt import OpCounter, PromptDecision, cycle_consistent_gate, generate_prompt, positional_field
from .tensor import (BBox, as_feature_map, box_to_mask, cosine_map, mask_to_bbox,
                     masked_gap)


class FeatureProvider(Protocol):
    height: int
    width: int
    channels: int

    def frames(self) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(frame_index, features)`` with 1-based, strictly increasing indices."""
        ...


class SegmentationHead(Protocol):
    def decode_box(self, features: np.ndarray, box: BBox) -> np.ndarray: ...

    def decode(self, conditioned: np.ndarray, prompt: np.ndarray | None = None) -> np.ndarray: ...


class ArrayProvider:
    """Provider over a precomputed ``(T, H, W, C)`` feature array."""

    def __init__(self, frames: np.ndarray):
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 4 or frames.shape[0] < 1:
            raise ValueError(f"expected a (T, H, W, C) array, got {frames.shape}")
        self._frames = frames
        _, self.height, self.width, self.channels = frames.shape

    def __len__(self) -> int:
        return self._frames.shape[0]

    def frames(self):
        for i, f in enumerate(self._frames):
            yield i + 1, f


class ThresholdHead:
    """Deterministic stand-in for a mask decoder.

    Without a prompt a pixel is foreground when its memory activation (the
    last channel of the conditioned features) exceeds ``threshold``; with a
    prompt the activation is first multiplied by the prompt.
    """

    def __init__(self, threshold: float = 0.6):
        self.threshold = threshold

    def decode_box(self, features, box: BBox) -> np.ndarray:
        h, w = features.shape[:2]
        inside = box_to_mask(box, h, w)
        mask = inside
        # two passes: threshold against the box mean, then against the mean of
        # what survived, which drops background corners of the box
        for _ in range(2):
            try:
                proto = masked_gap(features, mask)
                sim = cosine_map(features, proto)
            except (ValueError, ArithmeticError):
                break
            nxt = inside & (sim > self.threshold)
            if not nxt.any():
                break
            mask = nxt
        return mask

    def decode(self, conditioned, prompt=None) -> np.ndarray:
        act = conditioned[..., -1]
        if prompt is not None:
            act = act * prompt
        return act > self.threshold


def condition_features(features, memories, rule: str = "attention",
                       temperature: float = 0.02) -> np.ndarray:
    """Append a memory-activation channel to ``features``.

    ``attention``: each pixel reads the mask channel of the memory keys it
    resembles, softmax-weighted by cosine similarity at ``temperature`` (see
    :func:`compress_memory` for the keys).  Background look-alikes stored in
    memory pull the read-out towards 0.

    ``prototype``: affine-normalised cosine between each pixel and the mean
    foreground prototype of the memories.
    """
    if len(memories) == 0:
        raise ValueError("conditioning needs at least one memory")
    f = as_feature_map(features)
    h, w, c = f.shape
    if rule == "attention":
        act = _attention_readout(f, memories, temperature)
    elif rule == "prototype":
        protos = []
        for mem in memories:
            m = mem[..., -1] > 0.5
            if m.any():
                protos.append(masked_gap(mem[..., :-1], m))
        if not protos:
            act = np.zeros((h, w))
        else:
            p = np.mean(protos, axis=0)
            act = (cosine_map(f, p) + 1.0) / 2.0 if np.any(p) else np.zeros((h, w))
    else:
        raise ValueError(f"unknown conditioning rule {rule!r}")
    return np.concatenate([f, act[..., None]], axis=-1)


def _unit_rows(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.divide(x, n, out=np.zeros_like(x), where=n > 0)


# background memory pixels at least this similar to the memory's foreground
# prototype are kept as individual keys; the rest are pooled into one key
HARD_NEGATIVE_COS = 0.25


def compress_memory(memory: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit keys, mask values and log-multiplicities for one memory.

    Keys are every foreground pixel, every background pixel resembling the
    foreground, and the mean of the remaining background weighted by its
    pixel count.
    """
    c = memory.shape[-1] - 1
    feats = memory[..., :c].reshape(-1, c)
    labels = memory[..., c].reshape(-1) > 0.5
    unit = _unit_rows(feats)
    keep = labels.copy()
    if labels.any():
        fg = _unit_rows(feats[labels].mean(axis=0)[None])[0]
        keep |= unit @ fg >= HARD_NEGATIVE_COS
    keys = [unit[keep]]
    values = [labels[keep].astype(np.float64)]
    logw = [np.zeros(int(keep.sum()))]
    rest = ~keep
    if rest.any():
        keys.append(_unit_rows(feats[rest].mean(axis=0)[None]))
        values.append(np.zeros(1))
        logw.append(np.array([np.log(rest.sum())]))
    return np.concatenate(keys), np.concatenate(values), np.concatenate(logw)


def _attention_readout(f: np.ndarray, memories, temperature: float) -> np.ndarray:
    h, w, c = f.shape
    parts = [compress_memory(m) for m in memories]
    keys = np.concatenate([p[0] for p in parts])
    values = np.concatenate([p[1] for p in parts])
    logw = np.concatenate([p[2] for p in parts])
    q = _unit_rows(f.reshape(-1, c))
    # single precision is ample for a softmax over at most a few thousand keys
    logits = (q.astype(np.float32) @ (keys.T / temperature).astype(np.float32)
              + logw.astype(np.float32))
    logits -= logits.max(axis=1, keepdims=True)
    np.exp(logits, out=logits)
    out = (logits @ values.astype(np.float32)) / logits.sum(axis=1)
    out = out.astype(np.float64)
    return np.clip(out, 0.0, 1.0).reshape(h, w)


@dataclass
class TrackState:
    bank: PrototypicalMemoryBank
    last_mask: np.ndarray
    config: RunConfig
    field: np.ndarray
    head: SegmentationHead
    frame_count: int = 1
    counter: OpCounter = field(default_factory=OpCounter)


@dataclass
class TrackReport:
    name: str
    config: RunConfig
    boxes: list[BBox]
    traces: list[dict]
    masks: list[np.ndarray] = field(default_factory=list, repr=False)


def _check_box(box: BBox, h: int, w: int) -> None:
    if box.empty:
        raise BadPromptError(f"empty prompt box {tuple(box)}")
    if box.x < 0 or box.y < 0 or box.x + box.w > w or box.y + box.h > h:
        raise BadPromptError(f"prompt box {tuple(box)} outside the {w}x{h} frame")


def init_track(features, gt_box: BBox, config: RunConfig | None = None,
               head: SegmentationHead | None = None) -> TrackState:
    config = config or RunConfig()
    head = head or ThresholdHead(config.seg_threshold)
    f = as_feature_map(features)
    h, w, c = f.shape
    gt_box = BBox(*gt_box)
    _check_box(gt_box, h, w)
    mask = head.decode_box(f, gt_box)
    if not mask.any():
        mask = box_to_mask(gt_box, h, w)
    bank = PrototypicalMemoryBank(alpha=config.effective_alpha, window=config.window_m)
    bank.add_memory(1, f, mask)
    even_c = c if c % 2 == 0 else c + 1
    return TrackState(bank, mask, config, positional_field(h, w, max(even_c, 4)), head)


def _select(state: TrackState, t: int) -> CalibrationResult:
    s = state.config.strategy
    if s == "sam2_default":
        return state.bank.recent(t, 6, include_first=True)
    if s == "recent_only":
        return state.bank.recent(t, 7, include_first=False)
    return state.bank.calibrate(t)


def step(state: TrackState, features) -> tuple[np.ndarray, dict]:
    """Track one frame and store its memory. Never raises on a lost target."""
    cfg = state.config
    f = as_feature_map(features)
    t = state.frame_count + 1
    if f.shape[:2] != state.last_mask.shape:
        raise SequenceError("frame size changed mid-sequence")
    counter = state.counter
    counter.reset()

    sel = _select(state, t)
    counter.cosine_evals += sel.similarity_evaluations
    memories, fgs, bgs, masks = state.bank.select_memories(sel)
    conditioned = condition_features(f, memories, cfg.conditioner, cfg.temperature)
    mask_without = state.head.decode(conditioned)

    decision = None
    final = mask_without
    if cfg.use_prompt:
        prompt = generate_prompt(f, fgs, bgs, state.field, state.last_mask, counter)
        mask_with = state.head.decode(conditioned, prompt)
        if cfg.use_gate:
            feats = [state.bank[k].features for k in sel.selected_indices]
            decision = cycle_consistent_gate(
                f, mask_with, mask_without, feats, masks, state.field, cfg.beta,
                prompt=prompt, binarize_threshold=cfg.binarize_threshold, counter=counter)
        else:
            decision = PromptDecision(prompt, True, 1.0, [])
        if decision.accepted:
            final = mask_with

    entry = state.bank.add_memory(t, f, final)
    if final.any():
        # the positional prior keeps the last place the target was seen
        state.last_mask = final
    state.frame_count = t
    box = mask_to_bbox(final)
    trace = {
        "frame": t,
        "selected": list(sel.selected_indices),
        "scores": {str(k): [round(v, 6) for v in s] for k, s in sorted(sel.scores.items())},
        "gate": None if decision is None else {
            "accepted": bool(decision.accepted),
            "mean_iou": round(decision.mean_iou, 6),
            "per_memory_iou": [round(v, 6) for v in decision.per_memory_iou],
        },
        "degenerate": bool(entry.degenerate),
        "box": [float(v) for v in box],
        "cosine_evals": counter.cosine_evals,
        "prior_maps": counter.prior_maps,
    }
    return final, trace


def first_trace(state: TrackState) -> dict:
    box = mask_to_bbox(state.bank[1].predicted_mask)
    return {"frame": 1, "selected": [], "scores": {}, "gate": None, "degenerate": False,
            "box": [float(v) for v in box], "cosine_evals": 0, "prior_maps": 0}


def run_sequence(provider: FeatureProvider, gt_box: BBox, config: RunConfig | None = None,
                 name: str = "sequence", head: SegmentationHead | None = None,
                 keep_masks: bool = False) -> TrackReport:
    config = config or RunConfig()
    frames = provider.frames()
    try:
        idx, first = next(frames)
    except StopIteration:
        raise ValueError("provider yielded no frames") from None
    if idx != 1:
        raise SequenceError(f"first frame must be 1, got {idx}")
    state = init_track(first, gt_box, config, head)
    boxes = [mask_to_bbox(state.last_mask)]
    traces = [first_trace(state)]
    masks = [state.last_mask] if keep_masks else []
    for idx, f in frames:
        if idx != state.frame_count + 1:
            raise SequenceError(f"expected frame {state.frame_count + 1}, got {idx}")
        mask, trace = step(state, f)
        boxes.append(mask_to_bbox(mask))
        traces.append(trace)
        if keep_masks:
            masks.append(mask)
    return TrackReport(name, config, boxes, traces, masks)
