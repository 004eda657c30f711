"""Camera trajectory synthesis and multi-view reformatting of frame sequences."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Sequence

import numpy as np

from .camera import CameraIntrinsics, CameraPose, PoseSequence
from .errors import InsufficientFrames

MAX_ELEVATION = 89.0


@dataclass(frozen=True)
class TrajectoryConfig:
    frame_count: int = 84
    sinusoid_count: int = 3
    freq_range: tuple[float, float] = (0.5, 3.0)  # cycles per orbit
    weight_range: tuple[float, float] = (0.0, 15.0)  # degrees
    smoothing_kernel_width: int = 5
    max_elevation: float = MAX_ELEVATION
    azimuth_noise_scale: float = 2.0  # degrees, uniform in [-scale, scale]
    azimuth_sweep: float = 360.0
    start_azimuth: float = 0.0
    start_elevation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.frame_count < 2:
            raise ValueError("frame_count must be >= 2")
        if self.max_elevation > MAX_ELEVATION:
            raise ValueError(f"max_elevation must be <= {MAX_ELEVATION}")
        k = self.smoothing_kernel_width
        if k < 1 or k % 2 == 0:
            raise ValueError("smoothing_kernel_width must be an odd integer >= 1")
        if self.sinusoid_count < 0:
            raise ValueError("sinusoid_count must be >= 0")
        if self.azimuth_noise_scale < 0:
            raise ValueError("azimuth_noise_scale must be >= 0")


def box_smooth(values: np.ndarray, width: int) -> np.ndarray:
    """Moving average with a normalized box kernel and mirrored (edge-inclusive) borders."""
    if width == 1:
        return np.asarray(values, dtype=float).copy()
    half = width // 2
    padded = np.pad(np.asarray(values, dtype=float), half, mode="symmetric")
    return np.convolve(padded, np.full(width, 1.0 / width), mode="valid")


def raw_elevation(cfg: TrajectoryConfig, rng: np.random.Generator) -> np.ndarray:
    n = cfg.frame_count
    freqs = rng.uniform(*cfg.freq_range, size=cfg.sinusoid_count)
    weights = rng.uniform(*cfg.weight_range, size=cfg.sinusoid_count)
    phases = rng.uniform(0.0, 2 * math.pi, size=cfg.sinusoid_count)
    t = np.arange(n, dtype=float)
    waves = weights[:, None] * np.sin(2 * math.pi * freqs[:, None] * t / n + phases[:, None])
    return waves.sum(axis=0)


def synth_orbit_trajectory(cfg: TrajectoryConfig) -> np.ndarray:
    """``(frame_count, 2)`` array of (azimuth, elevation) in degrees.

    Elevation is a smoothed random sum of sinusoids shifted so frame 0 sits at
    ``start_elevation``, then clamped to ``±max_elevation``. Azimuths are a
    regular sweep with uniform jitter; frame 0 is never jittered.
    """
    rng = np.random.default_rng(cfg.seed)
    smooth = box_smooth(raw_elevation(cfg, rng), cfg.smoothing_kernel_width)
    elevation = cfg.start_elevation + smooth - smooth[0]
    elevation = np.clip(elevation, -cfg.max_elevation, cfg.max_elevation)

    n = cfg.frame_count
    azimuth = cfg.start_azimuth + cfg.azimuth_sweep * np.arange(n) / n
    noise = rng.uniform(-cfg.azimuth_noise_scale, cfg.azimuth_noise_scale, size=n)
    noise[0] = 0.0
    return np.stack([azimuth + noise, elevation], axis=1)


def look_at_pose(azimuth: float, elevation: float, radius: float = 1.0) -> CameraPose:
    """OpenCV-style camera (x right, y down, z forward) on a z-up sphere looking at the origin."""
    az, el = math.radians(azimuth), math.radians(elevation)
    eye = radius * np.array([math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])
    forward = -eye / np.linalg.norm(eye)
    right = np.cross(forward, [0.0, 0.0, 1.0])
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    R = np.stack([right, down, forward])
    return CameraPose.from_center(R, eye)


def trajectory_poses(
    traj: np.ndarray,
    intrinsics: CameraIntrinsics | None = None,
    radius: float = 1.0,
) -> PoseSequence:
    if intrinsics is None:
        intrinsics = CameraIntrinsics(1.0, 1.0, 0.5, 0.5, 1.0, 1.0)
    poses = tuple(look_at_pose(a, e, radius) for a, e in np.asarray(traj))
    return PoseSequence(poses, intrinsics, tuple(range(len(poses))))


class Scheme(str, Enum):
    BLOCKS = "blocks"
    INTERLEAVE = "interleave"
    PIVOT = "pivot"


@dataclass(frozen=True)
class ViewAssignment:
    scheme: Scheme
    views: tuple[tuple[int, ...], ...]

    @property
    def V(self) -> int:
        return len(self.views)

    @property
    def F(self) -> int:
        return len(self.views[0]) if self.views else 0

    def to_json(self) -> str:
        return json.dumps({"scheme": Scheme(self.scheme).value, "views": [list(v) for v in self.views]})

    @classmethod
    def from_json(cls, text: str) -> "ViewAssignment":
        data = json.loads(text)
        return cls(Scheme(data["scheme"]), tuple(tuple(int(i) for i in v) for v in data["views"]))


def reformat_static(
    source_len: int,
    F: int,
    V: int,
    scheme: Scheme | str = Scheme.BLOCKS,
    stride: int = 1,
    start: int = 0,
) -> ViewAssignment:
    """Split a temporally synchronized clip into ``V`` views of ``F`` frames.

    Positions are chosen on the stride-subsampled clip beginning at ``start``
    and returned as source-frame indices.

    blocks      view v = [0] + contiguous block v of length F-1
    interleave  view v = [0, v+1, v+1+V, ...]
    pivot       V = 2; both views start at frame F-1 and walk outwards
    """
    scheme = Scheme(scheme)
    if F < 1 or V < 1 or stride < 1 or start < 0:
        raise ValueError("F, V and stride must be >= 1 and start >= 0")
    available = max(0, -(-(source_len - start) // stride))
    if scheme is Scheme.PIVOT:
        if V != 2:
            raise ValueError("pivot scheme is defined for exactly 2 views")
        need = 2 * F - 1
    else:
        need = (F - 1) * V + 1
    if available < need:
        raise InsufficientFrames(
            f"{scheme.value} with F={F}, V={V} needs {need} frames after stride {stride}, have {available}"
        )

    if scheme is Scheme.BLOCKS:
        pos = [[0] + list(range(v * (F - 1) + 1, (v + 1) * (F - 1) + 1)) for v in range(V)]
    elif scheme is Scheme.INTERLEAVE:
        pos = [[0] + [v + 1 + k * V for k in range(F - 1)] for v in range(V)]
    else:
        p = F - 1
        pos = [[p - k for k in range(F)], [p + k for k in range(F)]]
    views = tuple(tuple(start + stride * i for i in view) for view in pos)
    return ViewAssignment(scheme, views)


def reverse_augment(item):
    """Time-reverse frame indices.

    A plain index list is simply reversed. For a ``ViewAssignment`` the clip
    window is played backwards (index ``i`` maps to ``lo + hi - i``), so every
    view still starts on one shared frame, now the last frame of the window.
    Applying it twice is the identity in both cases.
    """
    if isinstance(item, ViewAssignment):
        flat = [i for v in item.views for i in v]
        if not flat:
            return item
        lo, hi = min(flat), max(flat)
        return ViewAssignment(item.scheme, tuple(tuple(lo + hi - i for i in v) for v in item.views))
    if isinstance(item, tuple):
        return tuple(reversed(item))
    return list(reversed(list(item)))


@dataclass(frozen=True)
class StrideRule:
    source_kind: Literal["static_scene", "monocular", "dynamic_render"]
    stride_range: tuple[int, int] = field(default=None)

    def __post_init__(self):
        expected = STRIDE_RANGES.get(self.source_kind)
        if expected is None:
            raise ValueError(f"unknown source kind {self.source_kind!r}")
        if self.stride_range is None:
            object.__setattr__(self, "stride_range", expected)
        elif tuple(self.stride_range) != expected:
            raise ValueError(f"{self.source_kind} strides are fixed to {expected}, got {self.stride_range}")


STRIDE_RANGES: dict[str, tuple[int, int]] = {
    "static_scene": (1, 8),
    "monocular": (1, 2),
    "dynamic_render": (1, 1),
}


def sample_stride(rule: StrideRule | str, seed: int) -> int:
    if isinstance(rule, str):
        rule = StrideRule(rule)
    if rule.source_kind == "dynamic_render":
        return 1
    lo, hi = rule.stride_range
    return int(np.random.default_rng(seed).integers(lo, hi + 1))
