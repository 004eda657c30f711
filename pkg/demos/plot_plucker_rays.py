"""
Camera rays as Plücker coordinates
==================================

Every pixel of a frame gets a 6-vector: the unit ray direction and its
moment about the world origin. Stacked over frames this is the camera
conditioning signal fed next to the video latents.
"""

import numpy as np

from mvcam.camera import CameraIntrinsics, PoseSequence, normalize_scale, sequence_plucker, to_relative
from mvcam.dataset import TrajectoryConfig, synth_orbit_trajectory, trajectory_poses

# A short orbit around the origin, looking inward.
traj = synth_orbit_trajectory(TrajectoryConfig(frame_count=8, seed=3))
K = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.5, cy=0.5, width=1.0, height=1.0)
seq = trajectory_poses(traj, K)
print("azimuth/elevation (deg):\n", np.round(traj, 1))

# Express everything relative to the first frame and fix the scale so the
# farthest camera sits at distance 1.
[seq], scale = normalize_scale(to_relative(seq, anchor=0))
print("scale divided out:", round(scale, 4))

# One (H, W, 6) grid per frame; intrinsics are rescaled to the grid size.
grids = sequence_plucker(seq, height=4, width=6)
print("grid stack:", grids.shape)

# The anchor frame sits at the origin, so all its moments vanish.
print("anchor moments all zero:", not np.any(grids[0, ..., 3:]))

# Directions are unit length and orthogonal to their moments everywhere.
d, m = grids[..., :3], grids[..., 3:]
print("max | |d| - 1 |:", np.abs(np.linalg.norm(d, axis=-1) - 1).max())
print("max |m . d|   :", np.abs(np.sum(m * d, axis=-1)).max())
