"""Seeded synthetic scenes for occlusion and distractor episodes.

A scene is a grid of feature vectors.  Background, target and each
distractor get their own embedding; the embeddings are orthonormalised and
then mixed so that every distractor sits at an exact, scripted cosine
similarity to the target.  Rendering is a pure function of ``(spec, t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .tensor import BBox, mask_to_bbox

ATTRIBUTES = ("CM", "VC", "ROT", "SV", "DEF", "BC", "POC", "FOC", "MB", "IV", "ARC", "OV", "LR", "FM")


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-linear centre path through ``(frame, y, x)`` keyframes."""

    keyframes: tuple[tuple[int, float, float], ...]
    radius: float = 4.0

    def __post_init__(self):
        if not self.keyframes:
            raise ValueError("trajectory needs at least one keyframe")
        frames = [k[0] for k in self.keyframes]
        if frames != sorted(frames) or len(set(frames)) != len(frames):
            raise ValueError("keyframes must have strictly increasing frame numbers")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def center(self, t: int) -> tuple[float, float]:
        ks = self.keyframes
        if t <= ks[0][0]:
            return ks[0][1], ks[0][2]
        if t >= ks[-1][0]:
            return ks[-1][1], ks[-1][2]
        for (f0, y0, x0), (f1, y1, x1) in zip(ks, ks[1:]):
            if f0 <= t <= f1:
                a = (t - f0) / (f1 - f0)
                return y0 + a * (y1 - y0), x0 + a * (x1 - x0)
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class Distractor:
    path: Trajectory
    similarity: float = 0.9
    # first and last frame on screen; None means the whole sequence
    visible: tuple[int, int] | None = None

    def on_screen(self, t: int) -> bool:
        return self.visible is None or self.visible[0] <= t <= self.visible[1]


@dataclass(frozen=True)
class Occlusion:
    start: int
    end: int
    mode: str = "full"
    fraction: float = 1.0

    def covers(self, t: int) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    target: Trajectory
    height: int = 32
    width: int = 32
    channels: int = 16
    frames: int = 60
    seed: int = 0
    # cosine between the target's appearance in the first and last frame
    target_drift: float = 1.0
    distractors: tuple[Distractor, ...] = ()
    occlusions: tuple[Occlusion, ...] = ()
    noise: float = 0.05
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.channels < 3 + len(self.distractors):
            raise ValueError("not enough channels for orthogonal embeddings")
        for d in self.distractors:
            if not 0.0 <= d.similarity <= 1.0:
                raise ValueError("distractor similarity must lie in [0, 1]")
        if not 0.0 <= self.target_drift <= 1.0:
            raise ValueError("target drift must lie in [0, 1]")
        for o in self.occlusions:
            if not 1 <= o.start <= o.end <= self.frames:
                raise ValueError(f"occlusion {o.start}-{o.end} outside [1, {self.frames}]")
            if o.mode not in ("full", "partial"):
                raise ValueError(f"unknown occlusion mode {o.mode!r}")
            if o.mode == "partial" and not 0.0 < o.fraction < 1.0:
                raise ValueError("partial occlusion fraction must lie in (0, 1)")
        for tag in self.tags:
            if tag not in ATTRIBUTES:
                raise ValueError(f"unknown attribute tag {tag!r}")
        paths = [self.target] + [d.path for d in self.distractors]
        for p in paths:
            for _, y, x in p.keyframes:
                if not (0 <= y <= self.height - 1 and 0 <= x <= self.width - 1):
                    raise ValueError(f"keyframe ({y}, {x}) outside the grid")

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=seed)


@dataclass
class FrameTruth:
    gt_mask: np.ndarray
    gt_box: BBox
    visible: bool
    attributes: frozenset = field(default_factory=frozenset)


def embeddings(spec: ScenarioSpec) -> dict:
    """Background, base target, drift direction and distractor embeddings."""
    rng = np.random.default_rng([spec.seed, 0xE3B])
    k = 3 + len(spec.distractors)
    q, _ = np.linalg.qr(rng.standard_normal((spec.channels, k)))
    bg, target, drift_dir = q[:, 0], q[:, 1], q[:, 2]
    distract = [d.similarity * target + np.sqrt(1.0 - d.similarity ** 2) * q[:, 3 + i]
                for i, d in enumerate(spec.distractors)]
    return {"background": bg, "target": target, "drift": drift_dir, "distractors": distract}


def target_embedding(spec: ScenarioSpec, emb: dict, t: int) -> np.ndarray:
    if spec.target_drift >= 1.0 or spec.frames == 1:
        return emb["target"]
    phi = np.arccos(spec.target_drift) * (t - 1) / (spec.frames - 1)
    return np.cos(phi) * emb["target"] + np.sin(phi) * emb["drift"]


def disk(h: int, w: int, center: tuple[float, float], radius: float) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    cy, cx = center
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2


def _occluded_part(target_px: np.ndarray, occ: Occlusion) -> np.ndarray:
    if occ.mode == "full":
        return target_px.copy()
    ys, xs = np.nonzero(target_px)
    n = int(round(occ.fraction * ys.size))
    # occluder slides in from the left: hide the leftmost pixels first
    order = np.lexsort((ys, xs))[:n]
    hidden = np.zeros_like(target_px)
    hidden[ys[order], xs[order]] = True
    return hidden


def frame_attributes(spec: ScenarioSpec, t: int, gt_mask: np.ndarray) -> frozenset:
    tags = set(spec.tags)
    tgt = spec.target
    for o in spec.occlusions:
        if o.covers(t):
            tags.add("FOC" if o.mode == "full" else "POC")
    cy, cx = tgt.center(t)
    if not (0 <= cy < spec.height and 0 <= cx < spec.width):
        tags.add("OV")
    for d in spec.distractors:
        if d.on_screen(t):
            dy, dx = d.path.center(t)
            if np.hypot(dy - cy, dx - cx) <= 4 * tgt.radius:
                tags.add("BC")
    if t > 1:
        py, px = tgt.center(t - 1)
        if np.hypot(cy - py, cx - px) > 2 * tgt.radius + 1:
            tags.add("FM")
    if spec.target_drift < 1.0:
        tags.add("DEF")
    if gt_mask.any() and mask_to_bbox(gt_mask).area < 1000:
        tags.add("LR")
    return frozenset(tags)


def render_frame(spec: ScenarioSpec, t: int, emb: dict | None = None):
    """Features and ground truth for frame ``t`` (1-based)."""
    if not 1 <= t <= spec.frames:
        raise ValueError(f"frame {t} outside [1, {spec.frames}]")
    emb = emb or embeddings(spec)
    h, w = spec.height, spec.width
    f = np.empty((h, w, spec.channels))
    f[...] = emb["background"]
    for d, e in zip(spec.distractors, emb["distractors"]):
        if d.on_screen(t):
            f[disk(h, w, d.path.center(t), d.path.radius)] = e
    target_px = disk(h, w, spec.target.center(t), spec.target.radius)
    f[target_px] = target_embedding(spec, emb, t)
    gt = target_px.copy()
    for o in spec.occlusions:
        if o.covers(t):
            hidden = _occluded_part(target_px, o)
            f[hidden] = emb["background"]
            gt &= ~hidden
    rng = np.random.default_rng([spec.seed, t])
    if spec.noise > 0:
        f += rng.uniform(-spec.noise, spec.noise, size=f.shape)
    visible = bool(gt.any())
    truth = FrameTruth(gt, mask_to_bbox(gt), visible, frame_attributes(spec, t, gt))
    return f, truth


def render_sequence(spec: ScenarioSpec):
    emb = embeddings(spec)
    return [render_frame(spec, t, emb) for t in range(1, spec.frames + 1)]


def sequence_attributes(spec: ScenarioSpec) -> frozenset:
    out = set()
    for t in range(1, spec.frames + 1):
        _, truth = render_frame(spec, t)
        out |= truth.attributes
    return frozenset(out)


class ScenarioProvider:
    """Feature provider that renders a scenario frame by frame."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.height, self.width, self.channels = spec.height, spec.width, spec.channels
        self._emb = embeddings(spec)

    def __len__(self) -> int:
        return self.spec.frames

    def frames(self):
        for t in range(1, self.spec.frames + 1):
            yield t, render_frame(self.spec, t, self._emb)[0]

    def truths(self) -> list[FrameTruth]:
        return [render_frame(self.spec, t, self._emb)[1] for t in range(1, self.spec.frames + 1)]


def _path(*kf, radius=4.0) -> Trajectory:
    return Trajectory(tuple(kf), radius)


def standard_suite(seed: int = 0) -> list[ScenarioSpec]:
    """The seven named scenarios used for strategy comparisons."""
    s = [
        ScenarioSpec("static", _path((1, 16, 16)), seed=seed),
        ScenarioSpec("linear-motion", _path((1, 16, 5), (60, 16, 26)), seed=seed),
        ScenarioSpec("partial-occlusion", _path((1, 16, 8), (60, 16, 24)), seed=seed,
                     occlusions=(Occlusion(20, 40, "partial", 0.5),)),
        ScenarioSpec("full-occlusion-window", _path((1, 16, 8), (60, 16, 24)), seed=seed,
                     occlusions=(Occlusion(22, 39, "full"),)),
        ScenarioSpec("distractor-cross", _path((1, 12, 4), (60, 12, 27)), seed=seed,
                     distractors=(Distractor(_path((1, 19, 27), (60, 19, 4)), 0.9),)),
        ScenarioSpec("distractor-occlusion", _path((1, 16, 9), (60, 16, 13)), seed=seed,
                     occlusions=(Occlusion(15, 30, "full"),),
                     distractors=(Distractor(_path((33, 6, 26), (60, 26, 25)), 0.9, (33, 60)),)),
        ScenarioSpec("fast-motion", _path((1, 6, 6), (8, 25, 8), (9, 25, 20), (18, 7, 25),
                                          (19, 8, 12), (30, 24, 13), (31, 14, 25),
                                          (45, 6, 6), (46, 20, 8), (60, 25, 25)),
                     seed=seed, tags=("CM",)),
    ]
    return s


def get_scenario(name: str, seed: int = 0) -> ScenarioSpec:
    for spec in standard_suite(seed):
        if spec.name == name:
            return spec
    raise KeyError(f"unknown scenario {name!r}")


# plain-text scenario files: one ``key = value`` per line, ``#`` comments

def _fmt_path(p: Trajectory) -> str:
    return "; ".join(f"{f}:{y:g},{x:g}" for f, y, x in p.keyframes)


def _parse_path(text: str, radius: float) -> Trajectory:
    kf = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        frame, yx = part.split(":")
        y, x = yx.split(",")
        kf.append((int(frame), float(y), float(x)))
    return Trajectory(tuple(kf), radius)


def spec_to_text(spec: ScenarioSpec) -> str:
    lines = [
        f"name = {spec.name}",
        f"height = {spec.height}",
        f"width = {spec.width}",
        f"channels = {spec.channels}",
        f"frames = {spec.frames}",
        f"seed = {spec.seed}",
        f"noise = {spec.noise!r}",
        f"tags = {','.join(spec.tags)}",
        f"target.path = {_fmt_path(spec.target)}",
        f"target.radius = {spec.target.radius!r}",
        f"target.drift = {spec.target_drift!r}",
    ]
    for i, d in enumerate(spec.distractors):
        lines += [f"distractor.{i}.path = {_fmt_path(d.path)}",
                  f"distractor.{i}.radius = {d.path.radius!r}",
                  f"distractor.{i}.similarity = {d.similarity!r}"]
        if d.visible is not None:
            lines.append(f"distractor.{i}.visible = {d.visible[0]}-{d.visible[1]}")
    for i, o in enumerate(spec.occlusions):
        mode = "full" if o.mode == "full" else f"partial:{o.fraction!r}"
        lines.append(f"occlusion.{i} = {o.start}-{o.end} {mode}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> ScenarioSpec:
    kv: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected 'key = value'")
        k, v = line.split("=", 1)
        kv[k.strip()] = v.strip()

    def take(key, conv, default=None):
        if key in kv:
            return conv(kv.pop(key))
        if default is None:
            raise ValueError(f"missing key {key!r}")
        return default

    name = take("name", str)
    radius = take("target.radius", float, 4.0)
    target = _parse_path(take("target.path", str), radius)
    common = dict(
        height=take("height", int, 32), width=take("width", int, 32),
        channels=take("channels", int, 16), frames=take("frames", int, 60),
        seed=take("seed", int, 0), noise=take("noise", float, 0.05),
        target_drift=take("target.drift", float, 1.0),
        tags=tuple(t for t in take("tags", str, "").split(",") if t.strip()),
    )
    distractors = []
    i = 0
    while f"distractor.{i}.path" in kv:
        r = take(f"distractor.{i}.radius", float, 4.0)
        path = _parse_path(take(f"distractor.{i}.path", str), r)
        sim = take(f"distractor.{i}.similarity", float, 0.9)
        vis = kv.pop(f"distractor.{i}.visible", None)
        if vis is not None:
            a, b = vis.split("-")
            vis = (int(a), int(b))
        distractors.append(Distractor(path, sim, vis))
        i += 1
    occlusions = []
    i = 0
    while f"occlusion.{i}" in kv:
        rng_, mode = kv.pop(f"occlusion.{i}").split()
        a, b = rng_.split("-")
        if mode == "full":
            occlusions.append(Occlusion(int(a), int(b), "full"))
        elif mode.startswith("partial:"):
            occlusions.append(Occlusion(int(a), int(b), "partial", float(mode.split(":", 1)[1])))
        else:
            raise ValueError(f"bad occlusion mode {mode!r}")
        i += 1
    if kv:
        raise ValueError(f"unknown keys: {', '.join(sorted(kv))}")
    return ScenarioSpec(name, target, distractors=tuple(distractors),
                        occlusions=tuple(occlusions), **common)

