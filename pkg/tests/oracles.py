"""Independent slow re-implementations used as test oracles."""
from __future__ import annotations

import math

import numpy as np

from prototrack.memory import PrototypicalMemoryBank


def cos(a, b) -> float:
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0 or nb == 0:
        return None
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


def score(a, b) -> float:
    c = cos(a, b)
    return 0.0 if c is None else (min(max(c, -1.0), 1.0) + 1.0) / 2.0


def calibrate_oracle(bank: PrototypicalMemoryBank, t: int, alpha: float) -> list[int]:
    """Exhaustive sort of every eligible frame in [max(2, t-m), t-2]."""
    entries = {e.frame_index: e for e in bank.entries}
    anchor = 1
    for k in sorted(entries, reverse=True):
        if 1 < k < t and not entries[k].degenerate:
            anchor = k
            break
    if anchor == 1:
        alpha = 0.0
    lo, hi = max(2, t - bank.window), t - 2
    scored = []
    for tau in range(lo, hi + 1):
        e = entries[tau]
        if e.degenerate or tau == anchor:
            continue
        sf = score(e.fg_prototype, entries[1].fg_prototype)
        sp = score(e.fg_prototype, entries[anchor].fg_prototype)
        scored.append(((1 - alpha) * sf + alpha * sp, tau))
    # full sort: highest fused score first, later frame first among equals
    scored.sort(key=lambda p: (-p[0], -p[1]))
    head = [1] if anchor == 1 else [1, anchor]
    return head + [tau for _, tau in scored[:5]]


def random_bank(rng: np.random.Generator, max_entries: int = 64, max_c: int = 16):
    n = int(rng.integers(1, max_entries + 1))
    c = int(rng.integers(1, max_c + 1))
    bank = PrototypicalMemoryBank(alpha=float(rng.choice([0.0, 1.0, rng.random()])),
                                  window=int(rng.integers(1, 40)))
    h = w = 3
    feats_seen = []
    for k in range(1, n + 1):
        if feats_seen and rng.random() < 0.15:
            # exact duplicate of an earlier frame: forces tied scores
            f, m = feats_seen[int(rng.integers(len(feats_seen)))]
        else:
            f = rng.standard_normal((h, w, c))
            m = rng.random((h, w)) < 0.5
            if k == 1:
                m[1, 1] = True
            elif rng.random() < 0.2:
                m[:] = False
        bank.add_memory(k, f, m)
        feats_seen.append((f, m))
    t = n + 1
    return bank, t


def disc_prior_loop(features, fg, bg) -> np.ndarray:
    h, w, _ = features.shape
    mfg = np.zeros((h, w))
    mbg = np.zeros((h, w))
    if cos(fg, fg) is None or cos(bg, bg) is None:
        return np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            v = features[y, x]
            a = cos(v, fg)
            b = cos(v, bg)
            mfg[y, x] = 0.0 if a is None else a
            mbg[y, x] = 0.0 if b is None else b
    d = np.zeros((h, w))
    nf, nb = minmax_loop(mfg), minmax_loop(mbg)
    for y in range(h):
        for x in range(w):
            d[y, x] = max(nf[y, x] - nb[y, x], 0.0)
    return minmax_loop(d)


def minmax_loop(m) -> np.ndarray:
    lo = min(m.flat)
    hi = max(m.flat)
    out = np.zeros(m.shape)
    if hi - lo <= 1e-12:
        return out
    for idx in np.ndindex(m.shape):
        out[idx] = (m[idx] - lo) / (hi - lo)
    return out


def pos_prior_loop(pos_field, prev_mask) -> np.ndarray:
    h, w, c = pos_field.shape
    if not prev_mask.any():
        return np.ones((h, w))
    p = np.zeros(c)
    n = 0
    for y in range(h):
        for x in range(w):
            if prev_mask[y, x]:
                p += pos_field[y, x]
                n += 1
    p /= n
    s = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            v = cos(pos_field[y, x], p)
            s[y, x] = 0.0 if v is None else v
    return minmax_loop(s)


def fuse_loop(disc, pos) -> np.ndarray:
    prod = np.zeros(disc.shape)
    for idx in np.ndindex(disc.shape):
        prod[idx] = disc[idx] * pos[idx]
    return minmax_loop(prod)


def prompt_loop(features, fgs, bgs, pos_field, prev_mask) -> np.ndarray:
    pos = pos_prior_loop(pos_field, prev_mask)
    acc = np.zeros(features.shape[:2])
    for fg, bg in zip(fgs, bgs):
        acc += fuse_loop(disc_prior_loop(features, fg, bg), pos)
    return acc / len(fgs)


def field_loop(h: int, w: int, c: int) -> np.ndarray:
    """Sinusoid field written out per pixel from the documented recipe."""
    half = c // 2
    npairs = half // 2
    out = np.zeros((h, w, c))
    for y in range(h):
        for x in range(w):
            for axis, (coord, n) in enumerate(((y, h), (x, w))):
                u = coord / max(n - 1, 1)
                vals = [math.sin(u * math.pi / 2 ** k) for k in range(npairs)]
                vals += [math.cos(u * math.pi / 2 ** k) for k in range(npairs)]
                if half % 2:
                    vals.append(math.sin(u * math.pi / 2 ** (npairs - 1) / 2))
                for j, v in enumerate(vals):
                    out[y, x, axis * half + j] = (v + 1) / 2
    return out
