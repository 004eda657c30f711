"""Monocular clip curation: attribute filters and an optical-flow camera-motion classifier.

Optical flow, SfM, OCR and aesthetic scoring are computed elsewhere; this
module only consumes their outputs.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, EmptyInput


class MotionLabel(str, Enum):
    STATIC = "static"
    ZOOM_OUT = "zoom_out"
    ZOOM_IN = "zoom_in"
    PAN_LEFT = "pan_left"
    TILT_UP = "tilt_up"
    PAN_RIGHT = "pan_right"
    TILT_DOWN = "tilt_down"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class MotionConfig:
    static_threshold: float = 1.0  # mean flow magnitude in pixels
    zoom_threshold: float = 0.6  # mean radial alignment
    dominance: float = 0.5  # minimum share of the dominant direction quadrant
    invert_pan_tilt: bool = False


# Apparent flow direction (image coords, +v down) -> camera motion.
# The camera panning left makes the scene drift right, and so on.
_QUADRANT_LABELS = (
    MotionLabel.PAN_LEFT,  # flow toward 0 deg (right)
    MotionLabel.TILT_UP,  # 90 deg (down on screen)
    MotionLabel.PAN_RIGHT,  # 180 deg (left)
    MotionLabel.TILT_DOWN,  # 270 deg (up on screen)
)
_INVERTED = {
    MotionLabel.PAN_LEFT: MotionLabel.PAN_RIGHT,
    MotionLabel.PAN_RIGHT: MotionLabel.PAN_LEFT,
    MotionLabel.TILT_UP: MotionLabel.TILT_DOWN,
    MotionLabel.TILT_DOWN: MotionLabel.TILT_UP,
}


def _check_flow(flow) -> np.ndarray:
    f = np.asarray(flow, dtype=float)
    if f.ndim != 3 or f.shape[2] != 2 or f.shape[0] < 1 or f.shape[1] < 1:
        raise ContractError(f"flow field must have shape (H, W, 2), got {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ContractError("flow field contains non-finite values")
    return f


def radial_alignment(flow: np.ndarray, eps: float = 1e-12) -> float:
    """Mean cosine between each flow vector and the outward direction from the image center."""
    f = _check_flow(flow)
    h, w, _ = f.shape
    ys, xs = np.meshgrid(np.arange(h) - (h - 1) / 2, np.arange(w) - (w - 1) / 2, indexing="ij")
    r = np.stack([xs, ys], axis=-1)
    rn = np.linalg.norm(r, axis=-1, keepdims=True)
    r_hat = np.divide(r, rn, out=np.zeros_like(r), where=rn > 0)
    mag = np.linalg.norm(f, axis=-1)
    cos = np.sum(f * r_hat, axis=-1) / np.maximum(mag, eps)
    return float(np.mean(cos))


def classify_pair_motion(
    flow,
    static_threshold: float | None = None,
    zoom_threshold: float | None = None,
    config: MotionConfig | None = None,
) -> MotionLabel:
    """Label the camera motion between two frames from their dense flow ``(H, W, 2)``."""
    cfg = config or MotionConfig()
    if static_threshold is not None or zoom_threshold is not None:
        cfg = replace(
            cfg,
            static_threshold=cfg.static_threshold if static_threshold is None else static_threshold,
            zoom_threshold=cfg.zoom_threshold if zoom_threshold is None else zoom_threshold,
        )
    f = _check_flow(flow)
    mag = np.linalg.norm(f, axis=-1)
    if mag.mean() < cfg.static_threshold:
        return MotionLabel.STATIC

    rho = radial_alignment(f)
    if rho > cfg.zoom_threshold:
        return MotionLabel.ZOOM_IN
    if rho < -cfg.zoom_threshold:
        return MotionLabel.ZOOM_OUT

    moving = mag > 0
    angle = np.arctan2(f[..., 1], f[..., 0])[moving]
    quadrant = np.floor(((np.degrees(angle) + 45.0) % 360.0) / 90.0).astype(int) % 4
    shares = np.bincount(quadrant, minlength=4) / quadrant.size
    if shares.max() < cfg.dominance:
        return MotionLabel.UNKNOWN

    mean_dir = math.degrees(math.atan2(np.sin(angle).mean(), np.cos(angle).mean()))
    label = _QUADRANT_LABELS[int(((mean_dir + 45.0) % 360.0) // 90.0) % 4]
    if cfg.invert_pan_tilt:
        label = _INVERTED[label]
    return label


def classify_clip_motion(labels: Iterable[MotionLabel | str]) -> MotionLabel:
    """Aggregate per-pair labels: any static/unknown pair makes the clip static,
    otherwise a label holding more than half of the pairs wins, else unknown."""
    labels = [MotionLabel(l) for l in labels]
    if not labels:
        raise EmptyInput("no frame-pair labels to aggregate")
    if any(l in (MotionLabel.STATIC, MotionLabel.UNKNOWN) for l in labels):
        return MotionLabel.STATIC
    label, count = Counter(labels).most_common(1)[0]
    if count * 2 > len(labels):
        return label
    return MotionLabel.UNKNOWN


@dataclass
class ClipRecord:
    clip_id: str
    frame_count: int
    registered_frames: int
    sfm_point_count: int | None
    text_area_fraction: float
    aesthetic_score: float
    resolution: tuple[int, int] = (0, 0)
    flow_pair_labels: list[MotionLabel] | None = None

    def __post_init__(self):
        if self.registered_frames > self.frame_count:
            raise ContractError(f"{self.clip_id}: registered_frames exceeds frame_count")
        if not 0.0 <= self.text_area_fraction <= 1.0:
            raise ContractError(f"{self.clip_id}: text_area_fraction outside [0, 1]")
        if self.sfm_point_count is not None and self.sfm_point_count < 0:
            raise ContractError(f"{self.clip_id}: negative point count")
        if self.flow_pair_labels is not None:
            self.flow_pair_labels = [MotionLabel(l) for l in self.flow_pair_labels]

    def to_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "frame_count": self.frame_count,
            "registered_frames": self.registered_frames,
            "sfm_point_count": self.sfm_point_count,
            "text_area_fraction": self.text_area_fraction,
            "aesthetic_score": self.aesthetic_score,
            "resolution": list(self.resolution),
            "flow_labels": None if self.flow_pair_labels is None else [l.value for l in self.flow_pair_labels],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClipRecord":
        try:
            return cls(
                clip_id=str(d["clip_id"]),
                frame_count=int(d["frame_count"]),
                registered_frames=int(d["registered_frames"]),
                sfm_point_count=None if d.get("sfm_point_count") is None else int(d["sfm_point_count"]),
                text_area_fraction=float(d["text_area_fraction"]),
                aesthetic_score=float(d["aesthetic_score"]),
                resolution=tuple(d.get("resolution") or (0, 0)),
                flow_pair_labels=d.get("flow_labels"),
            )
        except KeyError as exc:
            raise ContractError(f"clip record missing field {exc}") from None


@dataclass(frozen=True)
class CurationThresholds:
    min_points: int = 1_000
    max_points: int = 40_000
    max_text_area: float = 1e-4
    min_aesthetic: float = 4.0


STAGES = ("sfm_registration", "point_count", "ocr", "aesthetic", "motion")


def stage_reasons(c: ClipRecord, stage: str, th: CurationThresholds) -> list[str]:
    """Rejection reasons contributed by one stage (empty list = pass)."""
    if stage == "sfm_registration":
        if c.sfm_point_count is None or c.registered_frames < c.frame_count:
            return ["sfm_unregistered"]
        return []
    if stage == "point_count":
        if c.sfm_point_count is None:
            return []  # already reported by the registration stage
        if c.sfm_point_count < th.min_points:
            return ["point_count_low"]
        if c.sfm_point_count > th.max_points:
            return ["point_count_high"]
        return []
    if stage == "ocr":
        return ["text_area"] if c.text_area_fraction > th.max_text_area else []
    if stage == "aesthetic":
        return ["aesthetic_low"] if c.aesthetic_score < th.min_aesthetic else []
    if stage == "motion":
        if not c.flow_pair_labels:
            return ["motion_missing"]
        return ["motion_static"] if classify_clip_motion(c.flow_pair_labels) is MotionLabel.STATIC else []
    raise ValueError(f"unknown stage {stage!r}")


def filter_clip(c: ClipRecord, thresholds: CurationThresholds | None = None) -> tuple[bool, list[str]]:
    th = thresholds or CurationThresholds()
    reasons = [r for stage in STAGES for r in stage_reasons(c, stage, th)]
    return not reasons, reasons


@dataclass
class Manifest:
    clips: list[ClipRecord] = field(default_factory=list)
    stage_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"clips": [c.to_dict() for c in self.clips], "stage_counts": dict(self.stage_counts)},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Manifest":
        data = json.loads(text)
        if not isinstance(data, dict) or "clips" not in data:
            raise ContractError("manifest JSON must be an object with a 'clips' list")
        return cls([ClipRecord.from_dict(c) for c in data["clips"]], dict(data.get("stage_counts") or {}))

    @classmethod
    def read(cls, path: str | Path) -> "Manifest":
        return cls.from_json(Path(path).read_text())


def run_pipeline(
    m: Manifest,
    thresholds: CurationThresholds | None = None,
    stages: Sequence[str] = STAGES,
    jobs: int = 1,
) -> Manifest:
    """Apply the filter stages in order, recording survivors after each.

    ``stage_counts`` starts with ``"input"``. Per-clip predicates are pure, so
    with ``jobs > 1`` clips are evaluated concurrently and merged back in
    input order; output is identical to the sequential run.
    """
    th = thresholds or CurationThresholds()
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages {sorted(unknown)}")

    def first_failure(c: ClipRecord) -> int:
        for i, stage in enumerate(stages):
            if stage_reasons(c, stage, th):
                return i
        return len(stages)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            fails = list(pool.map(first_failure, m.clips))
    else:
        fails = [first_failure(c) for c in m.clips]

    counts = {"input": len(m.clips)}
    for i, stage in enumerate(stages):
        counts[stage] = sum(1 for f in fails if f > i)
    survivors = [c for c, f in zip(m.clips, fails) if f == len(stages)]
    return Manifest(survivors, counts)
