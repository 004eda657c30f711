"""Pinhole cameras, pose algebra and per-pixel Plücker ray embeddings.

Extrinsics follow the world-to-camera convention used by RealEstate10K pose
files: a world point ``X`` maps to camera coordinates ``R @ X + T`` and the
camera center is ``C = -R.T @ T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import (
    DegenerateRay,
    DegenerateScale,
    InvalidIntrinsics,
    InvalidRotation,
    PoseFormatError,
)

RayMode = Literal["standard", "paper_literal"]

ORTHO_TOL = 1e-9
REPAIR_TOL = 1e-6
_RAY_EPS = 1e-12


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidIntrinsics(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (self.width > 0 and self.height > 0):
            raise InvalidIntrinsics("image size must be positive")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise InvalidIntrinsics(
                f"principal point ({self.cx}, {self.cy}) outside {self.width}x{self.height} image"
            )

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def K_inv(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )

    def scaled_to(self, width: float, height: float) -> "CameraIntrinsics":
        """Rescale to a new image size (e.g. normalized file intrinsics -> latent pixels)."""
        sx = width / self.width
        sy = height / self.height
        return CameraIntrinsics(self.fx * sx, self.fy * sy, self.cx * sx, self.cy * sy, width, height)


def _orthonormality_error(R: np.ndarray) -> float:
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def project_to_rotation(R: np.ndarray) -> np.ndarray:
    """Nearest rotation in the Frobenius sense (orthogonal polar factor)."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] *= -1
        Q = U @ Vt
    return Q


def check_rotation(R, repair: bool = False) -> np.ndarray:
    """Validate a 3x3 rotation; optionally snap near-rotations back onto SO(3).

    Matrices within ``ORTHO_TOL`` pass untouched. With ``repair=True`` those
    within ``REPAIR_TOL`` (typical of decimal-truncated pose files) are
    replaced by their polar factor. Anything else raises ``InvalidRotation``.
    """
    R = np.array(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise InvalidRotation(f"rotation must be a finite 3x3 matrix, got shape {R.shape}")
    err = max(_orthonormality_error(R), abs(np.linalg.det(R) - 1.0))
    if err <= ORTHO_TOL:
        return R
    if repair and err <= REPAIR_TOL:
        return project_to_rotation(R)
    raise InvalidRotation(f"matrix is not a proper rotation (deviation {err:.3g})")


@dataclass(frozen=True, eq=False)
class CameraPose:
    """World-to-camera rigid transform."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = check_rotation(self.rotation)
        t = np.array(self.translation, dtype=float).reshape(-1)
        if t.shape != (3,) or not np.all(np.isfinite(t)):
            raise InvalidRotation("translation must be a finite 3-vector")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "CameraPose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> "CameraPose":
        M = np.asarray(M, dtype=float)
        return cls(M[:3, :3], M[:3, 3])

    @classmethod
    def from_center(cls, rotation, center) -> "CameraPose":
        R = np.asarray(rotation, dtype=float)
        return cls(R, -R @ np.asarray(center, dtype=float))

    def matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    @property
    def center(self) -> np.ndarray:
        return camera_center(self)

    def inverse(self) -> "CameraPose":
        Rt = self.rotation.T
        return CameraPose(Rt, -Rt @ self.translation)

    def compose(self, other: "CameraPose") -> "CameraPose":
        """``self ∘ other``: apply ``other`` first, then ``self``."""
        return CameraPose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def allclose(self, other: "CameraPose", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0, atol=atol)
        )

    def __repr__(self) -> str:
        return f"CameraPose(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


@dataclass(frozen=True, eq=False)
class PoseSequence:
    poses: tuple[CameraPose, ...]
    intrinsics: CameraIntrinsics
    timestamps: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        poses = tuple(self.poses)
        if not poses:
            raise PoseFormatError("pose sequence must contain at least one pose")
        object.__setattr__(self, "poses", poses)
        if self.timestamps is not None:
            ts = tuple(int(t) for t in self.timestamps)
            if len(ts) != len(poses):
                raise PoseFormatError("timestamps and poses differ in length")
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return len(self.poses)

    def __getitem__(self, i: int) -> CameraPose:
        return self.poses[i]

    def __iter__(self):
        return iter(self.poses)

    def with_poses(self, poses: Iterable[CameraPose]) -> "PoseSequence":
        return PoseSequence(tuple(poses), self.intrinsics, self.timestamps)

    def centers(self) -> np.ndarray:
        return np.stack([camera_center(p) for p in self.poses])


@dataclass(frozen=True, eq=False)
class PluckerGrid:
    """Per-pixel ``(d', o x d')`` stored as an ``(H, W, 6)`` array."""

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def directions(self) -> np.ndarray:
        return self.values[..., :3]

    @property
    def moments(self) -> np.ndarray:
        return self.values[..., 3:]


def camera_center(pose: CameraPose) -> np.ndarray:
    return -pose.rotation.T @ pose.translation


def _pixel_rays(intrinsics: CameraIntrinsics, pose: CameraPose, pixels: np.ndarray, mode: RayMode) -> np.ndarray:
    pix = np.asarray(pixels, dtype=float).reshape(-1, 2)
    homo = np.concatenate([pix, np.ones((len(pix), 1))], axis=1)
    cam = homo @ intrinsics.K_inv.T
    if mode == "standard":
        d = cam @ pose.rotation  # rows of R.T @ cam
    elif mode == "paper_literal":
        d = cam @ pose.rotation.T + pose.translation
    else:
        raise ValueError(f"unknown ray mode {mode!r}")
    norms = np.linalg.norm(d, axis=1, keepdims=True)
    if np.any(norms < _RAY_EPS):
        raise DegenerateRay("ray direction has (near) zero length before normalization")
    return d / norms


def ray_direction(
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    pixel: Sequence[float],
    mode: RayMode = "standard",
) -> np.ndarray:
    """Unit world-space ray through continuous pixel coordinate ``(x, y)``.

    ``standard`` rotates the back-projected pixel into the world frame.
    ``paper_literal`` evaluates ``normalize(R K^-1 (x, y, 1) + T)`` verbatim,
    which mixes a translation into a direction and is kept only for
    comparison experiments.
    """
    x, y = pixel
    if not (0 <= x <= intrinsics.width and 0 <= y <= intrinsics.height):
        raise ValueError(f"pixel ({x}, {y}) outside image bounds")
    return _pixel_rays(intrinsics, pose, np.array([[x, y]]), mode)[0]


def pixel_grid(height: int, width: int, offset: float = 0.5) -> np.ndarray:
    """``(H, W, 2)`` array of ``(x, y)`` sample positions; ``offset=0.5`` samples pixel centers."""
    ys, xs = np.meshgrid(np.arange(height, dtype=float), np.arange(width, dtype=float), indexing="ij")
    return np.stack([xs + offset, ys + offset], axis=-1)


def plucker_grid(
    intrinsics: CameraIntrinsics,
    pose: CameraPose,
    height: int,
    width: int,
    mode: RayMode = "standard",
    pixel_offset: float = 0.5,
) -> PluckerGrid:
    """Plücker embedding for every pixel of an ``height x width`` grid.

    Intrinsics are expressed in the pixel units of that grid; use
    ``CameraIntrinsics.scaled_to`` when they come from another resolution.
    """
    if height < 1 or width < 1:
        raise ValueError("grid dimensions must be >= 1")
    pix = pixel_grid(height, width, pixel_offset).reshape(-1, 2)
    d = _pixel_rays(intrinsics, pose, pix, mode)
    o = camera_center(pose)
    m = np.cross(np.broadcast_to(o, d.shape), d)
    values = np.concatenate([d, m], axis=1).reshape(height, width, 6)
    values.setflags(write=False)
    return PluckerGrid(values)


def sequence_plucker(seq: PoseSequence, height: int, width: int, mode: RayMode = "standard") -> np.ndarray:
    """Stack per-frame grids into an ``(N, H, W, 6)`` array, rescaling intrinsics to the grid."""
    K = seq.intrinsics.scaled_to(width, height)
    return np.stack([plucker_grid(K, p, height, width, mode).values for p in seq.poses])


def to_relative(seq: PoseSequence, anchor: int = 0) -> PoseSequence:
    """Re-express every pose in the camera frame of ``seq[anchor]``.

    The anchor becomes exactly the identity; pairwise relative transforms
    ``pose_j ∘ pose_i^-1`` are unchanged.
    """
    n = len(seq)
    if not -n <= anchor < n:
        raise IndexError(f"anchor {anchor} out of range for {n} poses")
    ref_inv = seq[anchor].inverse()
    out = []
    for i, p in enumerate(seq.poses):
        if i == anchor % n:
            out.append(CameraPose.identity())
            continue
        out.append(p.compose(ref_inv))
    return seq.with_poses(out)


def normalize_scale(*seqs: PoseSequence) -> tuple[list[PoseSequence], float]:
    """Scale all camera centers jointly so the farthest one sits at distance 1."""
    if not seqs:
        raise DegenerateScale("no sequences given")
    scale = max(float(np.max(np.linalg.norm(s.centers(), axis=1))) for s in seqs)
    if scale <= 1e-12:
        raise DegenerateScale("all camera centers coincide with the origin")
    out = []
    for s in seqs:
        out.append(s.with_poses(CameraPose(p.rotation, p.translation / scale) for p in s.poses))
    return out, scale


# --- RealEstate10K-style pose text -------------------------------------------

def _format_float(x: float) -> str:
    return repr(float(x))


def parse_pose_text(text: str, width: float = 1.0, height: float = 1.0) -> PoseSequence:
    """Parse ``timestamp fx fy cx cy 0 0 r00 r01 r02 t0 r10 ... t2`` lines.

    Intrinsics in the file are normalized by image size; pass ``width`` and
    ``height`` to get pixel units. A leading non-numeric line (the video URL
    in RealEstate10K files) is skipped. All frames must share intrinsics.
    """
    poses, stamps = [], []
    intr = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 19:
            if lineno == 1 and not poses:
                continue
            raise PoseFormatError(f"line {lineno}: expected 19 fields, got {len(tokens)}")
        try:
            stamp = int(tokens[0])
            vals = [float(t) for t in tokens[1:]]
        except ValueError as exc:
            raise PoseFormatError(f"line {lineno}: {exc}") from None
        k = tuple(vals[:4])
        if intr is None:
            intr = k
        elif k != intr:
            raise PoseFormatError(f"line {lineno}: per-frame intrinsics differ; only shared intrinsics are supported")
        M = np.array(vals[6:18]).reshape(3, 4)
        try:
            R = check_rotation(M[:, :3], repair=True)
        except Exception as exc:
            raise PoseFormatError(f"line {lineno}: {exc}") from None
        poses.append(CameraPose(R, M[:, 3]))
        stamps.append(stamp)
    if intr is None:
        raise PoseFormatError("no pose lines found")
    fx, fy, cx, cy = intr
    K = CameraIntrinsics(fx * width, fy * height, cx * width, cy * height, width, height)
    return PoseSequence(tuple(poses), K, tuple(stamps))


def format_pose_text(seq: PoseSequence) -> str:
    K = seq.intrinsics
    head = [K.fx / K.width, K.fy / K.height, K.cx / K.width, K.cy / K.height]
    stamps = seq.timestamps if seq.timestamps is not None else range(len(seq))
    lines = []
    for stamp, pose in zip(stamps, seq.poses):
        M = np.concatenate([pose.rotation, pose.translation[:, None]], axis=1)
        fields = [str(int(stamp))] + [_format_float(v) for v in head] + ["0", "0"]
        fields += [_format_float(v) for v in M.reshape(-1)]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def read_pose_file(path: str | Path, width: float = 1.0, height: float = 1.0) -> PoseSequence:
    return parse_pose_text(Path(path).read_text(), width, height)


def write_pose_file(path: str | Path, seq: PoseSequence) -> None:
    Path(path).write_text(format_pose_text(seq))


def rotation_about(axis: Sequence[float], degrees: float) -> np.ndarray:
    """Rodrigues rotation matrix."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    th = math.radians(degrees)
    Kx = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + math.sin(th) * Kx + (1 - math.cos(th)) * (Kx @ Kx)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation via QR of a Gaussian matrix."""
    Q, Rr = np.linalg.qr(rng.standard_normal((3, 3)))
    Q = Q * np.sign(np.diag(Rr))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q
