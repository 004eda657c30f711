"""
Scoring generated camera trajectories
=====================================

Poses recovered from generated frames are compared to the requested ones
after anchoring both at the first frame; angular errors are summarized as
the area under the cumulative error curve.
"""

import numpy as np

from mvcam.camera import CameraIntrinsics, CameraPose, rotation_about
from mvcam.dataset import TrajectoryConfig, synth_orbit_trajectory, trajectory_poses
from mvcam.metrics import (
    FeatureStats,
    align_and_compare,
    epipolar_error,
    essential_matrix,
    frechet_distance,
    pose_error_report,
    relative_pose,
)

K = CameraIntrinsics(1.0, 1.0, 0.5, 0.5, 1.0, 1.0)
gt = trajectory_poses(synth_orbit_trajectory(TrajectoryConfig(frame_count=10, seed=2)), K)

# A "prediction": the same path with growing rotation drift and a different scale.
rng = np.random.default_rng(0)
pred_poses = []
for i, p in enumerate(gt):
    drift = rotation_about(rng.standard_normal(3), 1.5 * i)
    pred_poses.append(CameraPose(drift @ p.rotation, 2.5 * p.translation))
pred = gt.with_poses(pred_poses)

report = pose_error_report(align_and_compare(pred, gt))
print("rotation error (deg):", np.round(report["rotation_error"], 2))
print("rotation AUC:", {k: round(v, 3) for k, v in report["rot_auc"].items()})
print("translation AUC:", {k: round(v, 3) for k, v in report["trans_auc"].items()})

# Epipolar check between two ground-truth frames for one exact correspondence.
E = essential_matrix(relative_pose(gt[0], gt[3]))
X = np.array([0.1, -0.05, 0.2])  # world point near the orbit center
xa = gt[0].rotation @ X + gt[0].translation
xb = gt[3].rotation @ X + gt[3].translation
print("epipolar error:", epipolar_error(xa[:2] / xa[2], xb[:2] / xb[2], E))

# Fréchet distance between two Gaussian feature summaries.
a = FeatureStats.from_samples(rng.normal(0.0, 1.0, size=(4000, 3)))
b = FeatureStats.from_samples(rng.normal(0.5, 1.5, size=(4000, 3)))
print("Fréchet distance:", round(frechet_distance(a, b), 3))
