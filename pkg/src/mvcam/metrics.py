"""Pose, epipolar and Fréchet metrics for judging generated multi-view videos."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .camera import CameraIntrinsics, CameraPose, PoseSequence, check_rotation, normalize_scale, to_relative
from .errors import (
    ContractError,
    DegenerateBaseline,
    DegenerateScale,
    DimensionMismatch,
    EmptyInput,
    LengthMismatch,
    NotPSD,
)

AUC_THRESHOLDS = (5.0, 10.0, 20.0)
EPIPOLAR_THRESHOLD = 5e-4
_ZERO_T = 1e-9


def rotation_angle_error(Ra, Rb) -> float:
    """Geodesic angle between two rotations, in degrees."""
    Ra, Rb = check_rotation(Ra), check_rotation(Rb)
    cos = (np.trace(Ra.T @ Rb) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def translation_angle_error(ta, tb) -> float:
    """Angle between translation directions in degrees (scale-free).

    Both vectors ~0 counts as agreement (0); exactly one ~0 is scored as the
    worst case (180).
    """
    ta, tb = np.asarray(ta, dtype=float), np.asarray(tb, dtype=float)
    na, nb = np.linalg.norm(ta), np.linalg.norm(tb)
    if na < _ZERO_T and nb < _ZERO_T:
        return 0.0
    if na < _ZERO_T or nb < _ZERO_T:
        return 180.0
    cos = float(ta @ tb) / (na * nb)
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


@dataclass(frozen=True, eq=False)
class PoseErrorStats:
    rotation_error: np.ndarray
    translation_angle_error: np.ndarray

    @property
    def frame_count(self) -> int:
        return len(self.rotation_error)


def _normalized(seq: PoseSequence) -> PoseSequence:
    try:
        return normalize_scale(seq)[0][0]
    except DegenerateScale:
        return seq  # pure rotation: nothing to normalize, angles are scale-free anyway


def align_and_compare(pred: PoseSequence, gt: PoseSequence, anchor_index: int = 0) -> PoseErrorStats:
    """Per-frame angular errors after anchoring both sequences at ``anchor_index``.

    The anchor frame itself is included (its errors are 0 by construction).
    """
    if len(pred) != len(gt):
        raise LengthMismatch(f"sequences differ in length: {len(pred)} vs {len(gt)}")
    if len(pred) < 2:
        raise LengthMismatch("need at least two frames")
    p = _normalized(to_relative(pred, anchor_index))
    g = _normalized(to_relative(gt, anchor_index))
    rot = np.array([rotation_angle_error(a.rotation, b.rotation) for a, b in zip(p, g)])
    trans = np.array([translation_angle_error(a.translation, b.translation) for a, b in zip(p, g)])
    return PoseErrorStats(rot, trans)


def auc(errors: Sequence[float], thresholds: Sequence[float] = AUC_THRESHOLDS) -> list[float]:
    """Normalized area under the cumulative error curve up to each threshold.

    With ``r(e)`` the fraction of errors ``<= e``, the integral over
    ``[0, tau]`` splits into one term per error, ``max(0, tau - e_i)``.
    """
    e = np.sort(np.asarray(errors, dtype=float))
    if e.size == 0:
        raise EmptyInput("auc needs at least one error value")
    out = []
    for tau in thresholds:
        if not tau > 0:
            raise ContractError(f"AUC thresholds must be positive, got {tau}")
        out.append(float(np.sum(np.clip(tau - e, 0.0, None)) / (e.size * tau)))
    return out


def auc_combined(rot_errors, trans_errors, thresholds=AUC_THRESHOLDS) -> list[float]:
    """AUC where a frame only counts once both its errors are under the threshold."""
    r, t = np.asarray(rot_errors, dtype=float), np.asarray(trans_errors, dtype=float)
    if r.shape != t.shape:
        raise LengthMismatch("rotation and translation error lists differ in length")
    return auc(np.maximum(r, t), thresholds)


def pose_error_report(stats: PoseErrorStats, thresholds=AUC_THRESHOLDS, combined: bool = False) -> dict:
    def keyed(values):
        return {f"{t:g}": v for t, v in zip(thresholds, values)}

    report = {
        "rot_auc": keyed(auc(stats.rotation_error, thresholds)),
        "trans_auc": keyed(auc(stats.translation_angle_error, thresholds)),
        "rotation_error": stats.rotation_error.tolist(),
        "translation_angle_error": stats.translation_angle_error.tolist(),
    }
    if combined:
        report["combined_auc"] = keyed(auc_combined(stats.rotation_error, stats.translation_angle_error, thresholds))
    return report


def skew(t) -> np.ndarray:
    x, y, z = np.asarray(t, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def relative_pose(pose_a: CameraPose, pose_b: CameraPose) -> CameraPose:
    """Transform taking camera-a coordinates to camera-b coordinates."""
    return pose_b.compose(pose_a.inverse())


def essential_matrix(rel_pose: CameraPose) -> np.ndarray:
    t = rel_pose.translation
    n = np.linalg.norm(t)
    if n <= _ZERO_T:
        raise DegenerateBaseline("essential matrix undefined for zero baseline")
    return skew(t / n) @ rel_pose.rotation


def _homogeneous(x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] == 2:
        x = np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)
    return x


def epipolar_error(xa, xb, E) -> np.ndarray | float:
    """Symmetric epipolar distance for normalized image points.

    Accepts single points (2- or 3-vectors) or ``(N, 2|3)`` arrays.
    """
    single = np.ndim(xa) == 1
    a, b = _homogeneous(xa), _homogeneous(xb)
    E = np.asarray(E, dtype=float)
    la = a @ E.T  # E xa
    lb = b @ E  # E^T xb
    r = np.sum(b * la, axis=1)
    r2 = r**2
    da = la[:, 0] ** 2 + la[:, 1] ** 2
    db = lb[:, 0] ** 2 + lb[:, 1] ** 2
    out = np.zeros_like(r2)
    with np.errstate(divide="ignore", invalid="ignore"):
        for d in (da, db):
            tiny = d < 1e-18
            term = np.where(tiny, np.where(r2 == 0, 0.0, np.inf), r2 / np.where(tiny, 1.0, d))
            out = out + term
    return float(out[0]) if single else out


@dataclass(frozen=True, eq=False)
class MatchSet:
    keypoints_a: np.ndarray  # (Na, 2) pixels
    keypoints_b: np.ndarray  # (Nb, 2) pixels
    matches: np.ndarray  # (M, 2) index pairs
    total_keypoints: int

    def __post_init__(self):
        ka = np.asarray(self.keypoints_a, dtype=float).reshape(-1, 2)
        kb = np.asarray(self.keypoints_b, dtype=float).reshape(-1, 2)
        m = np.asarray(self.matches, dtype=int).reshape(-1, 2)
        if len(m) and (m.min() < 0 or m[:, 0].max() >= len(ka) or m[:, 1].max() >= len(kb)):
            raise ContractError("match index out of range")
        if len({tuple(p) for p in m.tolist()}) != len(m):
            raise ContractError("duplicate match pairs")
        if self.total_keypoints < len(m):
            raise ContractError("total_keypoints smaller than the number of matches")
        object.__setattr__(self, "keypoints_a", ka)
        object.__setattr__(self, "keypoints_b", kb)
        object.__setattr__(self, "matches", m)

    @classmethod
    def from_json(cls, text: str) -> tuple["MatchSet", dict]:
        """Parse a match file; returns the set plus the remaining metadata (intrinsics, image size)."""
        data = json.loads(text)
        try:
            ms = cls(data["keypoints_a"], data["keypoints_b"], data["matches"], int(data["total_keypoints"]))
        except KeyError as exc:
            raise ContractError(f"match file missing field {exc}") from None
        meta = {k: v for k, v in data.items() if k not in ("keypoints_a", "keypoints_b", "matches", "total_keypoints")}
        return ms, meta


def normalize_points(pixels: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    pts = np.asarray(pixels, dtype=float).reshape(-1, 2)
    return np.stack([(pts[:, 0] - intrinsics.cx) / intrinsics.fx, (pts[:, 1] - intrinsics.cy) / intrinsics.fy], axis=1)


def precision_matching_score(
    m: MatchSet,
    E,
    epipolar_threshold: float = EPIPOLAR_THRESHOLD,
    intrinsics_a: CameraIntrinsics | None = None,
    intrinsics_b: CameraIntrinsics | None = None,
) -> tuple[float, float]:
    """Fraction of matches with epipolar error under the threshold, and correct
    matches over all detected keypoints. Without intrinsics, keypoints are
    taken to be normalized coordinates already."""
    if len(m.matches) == 0:
        return 0.0, 0.0
    xa = m.keypoints_a[m.matches[:, 0]]
    xb = m.keypoints_b[m.matches[:, 1]]
    if intrinsics_a is not None:
        xa = normalize_points(xa, intrinsics_a)
    if intrinsics_b is not None:
        xb = normalize_points(xb, intrinsics_b)
    correct = int(np.sum(epipolar_error(xa, xb, E) < epipolar_threshold))
    precision = correct / len(m.matches)
    ms = correct / m.total_keypoints if m.total_keypoints else 0.0
    return precision, ms


@dataclass(frozen=True, eq=False)
class FeatureStats:
    mean: np.ndarray
    covariance: np.ndarray
    sample_count: int = 0

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mu.size, mu.size):
            raise DimensionMismatch(f"covariance {cov.shape} does not match mean dimension {mu.size}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-9):
            raise NotPSD("covariance is not symmetric")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)

    @classmethod
    def from_samples(cls, features: np.ndarray) -> "FeatureStats":
        f = np.atleast_2d(np.asarray(features, dtype=float))
        return cls(f.mean(axis=0), np.atleast_2d(np.cov(f, rowvar=False)), len(f))


def _psd_sqrt(S: np.ndarray, tol: float) -> np.ndarray:
    w, V = np.linalg.eigh((S + S.T) / 2)
    if w.min() < -tol:
        raise NotPSD(f"matrix has eigenvalue {w.min():.3g} below -{tol:g}")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def frechet_distance(a: FeatureStats, b: FeatureStats, tol: float = 1e-6) -> float:
    """``||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^(1/2))``.

    The trace of ``(Sa Sb)^(1/2)`` is taken as the trace of the symmetric
    ``(Sa^(1/2) Sb Sa^(1/2))^(1/2)``, which has the same eigenvalues.
    """
    if a.mean.size != b.mean.size:
        raise DimensionMismatch(f"feature dimensions differ: {a.mean.size} vs {b.mean.size}")
    _psd_sqrt(b.covariance, tol)
    root_a = _psd_sqrt(a.covariance, tol)
    middle = _psd_sqrt(root_a @ b.covariance @ root_a, tol)
    diff = a.mean - b.mean
    value = float(diff @ diff + np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(middle))
    return max(value, 0.0)


def colmap_error_rate(lines: Sequence[str] | str | Path) -> float:
    """Fraction of sequences whose reconstruction summary reports failure.

    One line per sequence, ``<sequence_id> <status>`` with status ``ok`` or
    ``fail`` (case-insensitive; ``success``/``failed``/``error`` accepted).
    """
    if isinstance(lines, Path) or (isinstance(lines, str) and "\n" not in lines and Path(lines).exists()):
        lines = Path(lines).read_text().splitlines()
    elif isinstance(lines, str):
        lines = lines.splitlines()
    ok_words, fail_words = {"ok", "success", "succeeded"}, {"fail", "failed", "failure", "error"}
    total = failed = 0
    for line in lines:
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) < 2 or parts[1].lower() not in ok_words | fail_words:
            raise ContractError(f"unrecognized COLMAP result line: {line!r}")
        total += 1
        failed += parts[1].lower() in fail_words
    if total == 0:
        raise EmptyInput("no sequences in COLMAP result file")
    return failed / total
