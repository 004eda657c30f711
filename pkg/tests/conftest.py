import numpy as np
import pytest

from mvcam.camera import CameraIntrinsics, CameraPose, PoseSequence, random_rotation

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def random_pose(rng, scale=3.0) -> CameraPose:
    return CameraPose(random_rotation(rng), rng.normal(scale=scale, size=3))


def random_sequence(rng, n=None, intrinsics=None) -> PoseSequence:
    n = n or int(rng.integers(2, 8))
    K = intrinsics or CameraIntrinsics(1.0, 1.2, 0.5, 0.5, 1.0, 1.0)
    return PoseSequence(tuple(random_pose(rng) for _ in range(n)), K)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record():
    """Record one acceptance criterion's verdict for the end-of-run summary."""

    def _record(key: str, ok: bool, detail: str = ""):
        ACCEPTANCE_RESULTS[key] = (bool(ok), detail)
        assert ok, f"{key}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {detail}")


def clean_clip(clip_id: str, **overrides):
    """A clip that passes every curation stage unless overridden."""
    from mvcam.curation import ClipRecord

    fields = dict(
        clip_id=clip_id,
        frame_count=32,
        registered_frames=32,
        sfm_point_count=5_000,
        text_area_fraction=0.0,
        aesthetic_score=5.0,
        resolution=(640, 360),
        flow_pair_labels=["pan_left"] * 31,
    )
    fields.update(overrides)
    return ClipRecord(**fields)


# One override per stage, each violating exactly that stage.
STAGE_VIOLATIONS = {
    "sfm_registration": [dict(registered_frames=30), dict(sfm_point_count=None)],
    "point_count": [dict(sfm_point_count=999), dict(sfm_point_count=40_001)],
    "ocr": [dict(text_area_fraction=2e-4), dict(text_area_fraction=0.3)],
    "aesthetic": [dict(aesthetic_score=3.99), dict(aesthetic_score=1.0)],
    "motion": [dict(flow_pair_labels=["pan_left"] * 30 + ["static"]), dict(flow_pair_labels=["unknown"] * 31)],
}


def funnel_manifest(rng=None):
    """100 clips: 2 fail each of the 5 stages (one stage apiece), 90 pass everything."""
    from mvcam.curation import Manifest

    clips = [clean_clip(f"clip{i:03d}") for i in range(90)]
    for stage, overrides in STAGE_VIOLATIONS.items():
        for j, ov in enumerate(overrides):
            clips.append(clean_clip(f"bad_{stage}_{j}", **ov))
    if rng is not None:
        clips = [clips[i] for i in rng.permutation(len(clips))]
    return Manifest(clips)


def two_view_scene(rng, n_points=20):
    """Two random cameras and points in front of both; returns poses and normalized coords."""
    while True:
        pa, pb = random_pose(rng, 1.0), random_pose(rng, 1.0)
        # place points in front of camera a, keep those also in front of b
        depth = rng.uniform(2.0, 8.0, size=n_points)
        xy = rng.uniform(-0.5, 0.5, size=(n_points, 2))
        Xa = np.column_stack([xy * depth[:, None], depth])
        X = (Xa - pa.translation) @ pa.rotation  # world points
        Xb = X @ pb.rotation.T + pb.translation
        ok = Xb[:, 2] > 0.5
        if ok.sum() >= 5 and np.linalg.norm(pb.compose(pa.inverse()).translation) > 1e-3:
            xa = Xa[ok, :2] / Xa[ok, 2:]
            xb = Xb[ok, :2] / Xb[ok, 2:]
            return pa, pb, xa, xb
