"""Reference layouts for view-integrated attention.

Latents are rank-6 arrays with axes ``(B, V, F, C, H, W)``. Each layout is a
pure reindexing into ``(batch, tokens, C)`` so that one attention core serves
every variant and pretrained single-view weights apply unchanged.

=============== ===================== ===============
layout          batch axes            token axes
=============== ===================== ===============
spatial_vanilla B V F                 H W
temporal_1d     B V H W               F
cross_frame     B V                   F H W
cross_view      B F                   V H W
=============== ===================== ===============
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import ShapeMismatch

AXES = ("B", "V", "F", "C", "H", "W")


class Layout(str, Enum):
    SPATIAL_VANILLA = "spatial_vanilla"
    TEMPORAL_1D = "temporal_1d"
    CROSS_FRAME = "cross_frame"
    CROSS_VIEW = "cross_view"


# (batch axes, token axes); channels always trail.
_GROUPS: dict[Layout, tuple[str, str]] = {
    Layout.SPATIAL_VANILLA: ("BVF", "HW"),
    Layout.TEMPORAL_1D: ("BVHW", "F"),
    Layout.CROSS_FRAME: ("BV", "FHW"),
    Layout.CROSS_VIEW: ("BF", "VHW"),
}


def _perm(layout: Layout) -> tuple[int, ...]:
    batch, tokens = _GROUPS[Layout(layout)]
    return tuple(AXES.index(a) for a in batch + tokens + "C")


def check_latent(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim != 6:
        raise ShapeMismatch(f"latent must have rank 6 (B V F C H W), got shape {t.shape}")
    if min(t.shape) < 1:
        raise ShapeMismatch(f"all latent dims must be >= 1, got {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("latent contains non-finite values")
    return t


def token_shape(dims: Sequence[int], layout: Layout) -> tuple[int, int, int]:
    sizes = dict(zip(AXES, dims))
    batch, tokens = _GROUPS[Layout(layout)]
    return (
        int(np.prod([sizes[a] for a in batch])),
        int(np.prod([sizes[a] for a in tokens])),
        sizes["C"],
    )


def rearrange(t: np.ndarray, layout: Layout) -> np.ndarray:
    t = check_latent(t)
    return t.transpose(_perm(layout)).reshape(token_shape(t.shape, layout))


def rearrange_inverse(tokens: np.ndarray, layout: Layout, dims: Sequence[int]) -> np.ndarray:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 6:
        raise ShapeMismatch(f"dims must have 6 entries, got {dims}")
    expected = token_shape(dims, layout)
    if tuple(tokens.shape) != expected:
        raise ShapeMismatch(f"token shape {tokens.shape} does not match {expected} for dims {dims}")
    perm = _perm(layout)
    permuted = tokens.reshape([dims[i] for i in perm])
    return permuted.transpose(np.argsort(perm))


@dataclass(frozen=True, eq=False)
class AttentionWeights:
    """Projection matrices applied as ``x @ W``; heads split C into contiguous blocks."""

    Wq: np.ndarray
    Wk: np.ndarray
    Wv: np.ndarray
    Wo: np.ndarray
    head_count: int = 1

    def __post_init__(self):
        mats = [np.asarray(m, dtype=float) for m in (self.Wq, self.Wk, self.Wv, self.Wo)]
        c = mats[0].shape[0]
        for name, m in zip(("Wq", "Wk", "Wv", "Wo"), mats):
            if m.shape != (c, c):
                raise ShapeMismatch(f"{name} must be {c}x{c}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
        if self.head_count < 1 or c % self.head_count:
            raise ShapeMismatch(f"head_count {self.head_count} must divide channel count {c}")
        for name, m in zip(("Wq", "Wk", "Wv", "Wo"), mats):
            object.__setattr__(self, name, m)

    @property
    def channels(self) -> int:
        return self.Wq.shape[0]

    @classmethod
    def identity(cls, channels: int, head_count: int = 1) -> "AttentionWeights":
        eye = np.eye(channels)
        return cls(eye, eye, eye, eye, head_count)

    @classmethod
    def random(cls, channels: int, rng: np.random.Generator, head_count: int = 1) -> "AttentionWeights":
        scale = 1.0 / np.sqrt(channels)
        return cls(*(rng.standard_normal((channels, channels)) * scale for _ in range(4)), head_count)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - np.max(logits, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def attention(
    tokens: np.ndarray,
    w: AttentionWeights,
    probs_hook: Callable[[np.ndarray], None] | None = None,
) -> np.ndarray:
    """Multi-head scaled dot-product self-attention over ``(batch, n, C)``.

    ``probs_hook`` receives the ``(batch, heads, n, n)`` attention
    probabilities, for inspection in tests.
    """
    x = np.asarray(tokens, dtype=float)
    if x.ndim != 3 or x.shape[-1] != w.channels:
        raise ShapeMismatch(f"expected (batch, n, {w.channels}) tokens, got {x.shape}")
    b, n, c = x.shape
    h = w.head_count
    dh = c // h

    def split(m):
        return m.reshape(b, n, h, dh).transpose(0, 2, 1, 3)

    q, k, v = split(x @ w.Wq), split(x @ w.Wk), split(x @ w.Wv)
    probs = softmax(q @ k.transpose(0, 1, 3, 2) / np.sqrt(dh))
    if probs_hook is not None:
        probs_hook(probs)
    out = (probs @ v).transpose(0, 2, 1, 3).reshape(b, n, c)
    return out @ w.Wo


def view_integrated_block(t: np.ndarray, layout: Layout, w: AttentionWeights, probs_hook=None) -> np.ndarray:
    t = check_latent(t)
    out = attention(rearrange(t, layout), w, probs_hook)
    return rearrange_inverse(out, layout, t.shape)


def concat_plucker(t: np.ndarray, grids: np.ndarray) -> np.ndarray:
    """Append 6 Plücker channels to every ``(view, frame)`` latent slice.

    ``grids`` has shape ``(V, F, H, W, 6)`` (one grid per view and frame,
    shared across the batch).
    """
    t = check_latent(t)
    B, V, F, C, H, W = t.shape
    g = np.asarray(grids)
    if g.shape != (V, F, H, W, 6):
        raise ShapeMismatch(f"expected grids of shape {(V, F, H, W, 6)}, got {g.shape}")
    extra = np.broadcast_to(g.transpose(0, 1, 4, 2, 3)[None], (B, V, F, 6, H, W))
    dtype = np.result_type(t, g)
    return np.concatenate([t.astype(dtype, copy=False), extra.astype(dtype, copy=False)], axis=3)
