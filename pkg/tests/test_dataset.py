import json

import numpy as np
import pytest

from mvcam.camera import camera_center
from mvcam.dataset import (
    Scheme,
    StrideRule,
    TrajectoryConfig,
    ViewAssignment,
    box_smooth,
    look_at_pose,
    raw_elevation,
    reformat_static,
    reverse_augment,
    sample_stride,
    synth_orbit_trajectory,
    trajectory_poses,
)
from mvcam.errors import InsufficientFrames


class TestTrajectory:
    def test_flat_when_weights_zero(self):
        cfg = TrajectoryConfig(frame_count=12, weight_range=(0, 0), azimuth_noise_scale=0, start_elevation=10)
        traj = synth_orbit_trajectory(cfg)
        assert np.array_equal(traj[:, 1], np.full(12, 10.0))
        assert np.allclose(traj[:, 0], np.arange(12) * 30.0)

    def test_start_point(self):
        cfg = TrajectoryConfig(start_azimuth=25, start_elevation=-5, seed=9)
        traj = synth_orbit_trajectory(cfg)
        assert traj[0, 0] == 25 and traj[0, 1] == pytest.approx(-5)

    def test_elevation_clamped(self):
        for seed in range(200):
            cfg = TrajectoryConfig(weight_range=(30, 60), start_elevation=80, seed=seed)
            assert synth_orbit_trajectory(cfg)[:, 1].max() <= 89.0

    def test_max_elevation_cap(self):
        with pytest.raises(ValueError):
            TrajectoryConfig(max_elevation=90)

    def test_determinism(self):
        a = synth_orbit_trajectory(TrajectoryConfig(seed=4))
        b = synth_orbit_trajectory(TrajectoryConfig(seed=4))
        c = synth_orbit_trajectory(TrajectoryConfig(seed=5))
        assert np.array_equal(a, b)
        assert not np.array_equal(a[:, 0], c[:, 0])

    def test_azimuth_noise_bounded(self):
        cfg = TrajectoryConfig(frame_count=40, azimuth_noise_scale=3.0, seed=1)
        traj = synth_orbit_trajectory(cfg)
        assert np.max(np.abs(traj[:, 0] - 9.0 * np.arange(40))) <= 3.0

    def test_smoothing_contracts_max_delta(self):
        for seed in range(1000):
            cfg = TrajectoryConfig(frame_count=30, smoothing_kernel_width=5, seed=seed)
            raw = raw_elevation(cfg, np.random.default_rng(seed))
            smooth = box_smooth(raw, 5)
            assert np.max(np.abs(np.diff(smooth))) <= np.max(np.abs(np.diff(raw))) + 1e-12

    def test_box_smooth_preserves_constant(self):
        assert np.allclose(box_smooth(np.full(9, 3.0), 5), 3.0)

    def test_look_at_points_camera_at_origin(self):
        pose = look_at_pose(40, 20)
        assert np.allclose(np.linalg.norm(camera_center(pose)), 1.0)
        cam = pose.rotation @ np.zeros(3) + pose.translation
        assert np.allclose(cam, [0, 0, 1])  # origin on the optical axis, one unit ahead

    def test_pose_file_sequence(self):
        seq = trajectory_poses(synth_orbit_trajectory(TrajectoryConfig(frame_count=8)))
        assert len(seq) == 8 and seq.timestamps == tuple(range(8))


class TestReformat:
    def test_pivot_two_view_split(self):
        va = reformat_static(27, 14, 2, "pivot")
        assert va.views[0] == tuple(range(13, -1, -1))
        assert va.views[1] == tuple(range(13, 27))

    def test_blocks(self):
        assert reformat_static(5, 3, 2, "blocks").views == ((0, 1, 2), (0, 3, 4))

    def test_interleave(self):
        assert reformat_static(5, 3, 2, "interleave").views == ((0, 1, 3), (0, 2, 4))

    def test_stride_and_start(self):
        va = reformat_static(20, 3, 2, "blocks", stride=3, start=2)
        assert va.views == ((2, 5, 8), (2, 11, 14))

    def test_insufficient(self):
        with pytest.raises(InsufficientFrames):
            reformat_static(4, 3, 2, "blocks")
        with pytest.raises(InsufficientFrames):
            reformat_static(30, 14, 2, "pivot", start=5)

    def test_stride_boundary(self):
        # 9 frames at stride 2 -> positions 0,2,4,6,8: five usable frames
        assert reformat_static(9, 3, 2, "blocks", stride=2).views == ((0, 2, 4), (0, 6, 8))
        with pytest.raises(InsufficientFrames):
            reformat_static(8, 3, 2, "blocks", stride=2)

    def test_pivot_needs_two_views(self):
        with pytest.raises(ValueError):
            reformat_static(50, 5, 3, "pivot")

    @pytest.mark.parametrize("scheme", ["blocks", "interleave"])
    def test_consumes_contiguous_range(self, scheme):
        for F in range(2, 15):
            for V in range(1, 5):
                va = reformat_static((F - 1) * V + 1, F, V, scheme)
                assert all(len(v) == F and v[0] == 0 for v in va.views)
                tails = sorted(i for v in va.views for i in v[1:])
                assert tails == list(range(1, (F - 1) * V + 1))

    def test_json_round_trip(self):
        va = reformat_static(27, 14, 2, "pivot")
        text = va.to_json()
        assert json.loads(text)["scheme"] == "pivot"
        assert ViewAssignment.from_json(text) == va


class TestReverse:
    def test_list(self):
        assert reverse_augment([0, 1, 2]) == [2, 1, 0]

    def test_double_is_identity(self):
        assert reverse_augment(reverse_augment([4, 7, 9])) == [4, 7, 9]
        va = reformat_static(20, 4, 3, "interleave", stride=2)
        assert reverse_augment(reverse_augment(va)) == va

    def test_single_frame(self):
        assert reverse_augment([5]) == [5]
        va = ViewAssignment(Scheme.BLOCKS, ((3,), (3,)))
        assert reverse_augment(va) == va

    def test_assignment_keeps_shared_start(self):
        va = reverse_augment(reformat_static(5, 3, 2, "blocks"))
        assert va.views == ((4, 3, 2), (4, 1, 0))

    def test_pivot_reversal_swaps_directions(self):
        va = reverse_augment(reformat_static(27, 14, 2, "pivot"))
        assert va.views[0] == tuple(range(13, 27))
        assert va.views[1] == tuple(range(13, -1, -1))


class TestStride:
    def test_ranges(self):
        static = {sample_stride("static_scene", s) for s in range(400)}
        mono = {sample_stride("monocular", s) for s in range(400)}
        assert static == set(range(1, 9))
        assert mono == {1, 2}
        assert {sample_stride("dynamic_render", s) for s in range(50)} == {1}

    def test_deterministic(self):
        assert sample_stride(StrideRule("static_scene"), 11) == sample_stride("static_scene", 11)

    def test_rule_ranges_fixed(self):
        assert StrideRule("static_scene").stride_range == (1, 8)
        with pytest.raises(ValueError):
            StrideRule("monocular", (1, 5))
        with pytest.raises(ValueError):
            StrideRule("handheld")
