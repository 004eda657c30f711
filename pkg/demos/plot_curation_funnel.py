"""
Filtering a clip manifest
=========================

Clips pass through registration, point count, on-screen text, aesthetic and
camera-motion checks. The pipeline records how many survive each stage.
"""

import numpy as np

from mvcam.curation import ClipRecord, Manifest, classify_pair_motion, run_pipeline

# Camera motion from dense flow: rightward drift means the camera pans left.
flow = np.zeros((6, 8, 2))
flow[..., 0] = 4.0
print("uniform rightward flow ->", classify_pair_motion(flow).value)

rng = np.random.default_rng(1)
clips = []
for i in range(40):
    frames = 16
    clips.append(
        ClipRecord(
            clip_id=f"clip{i:02d}",
            frame_count=frames,
            registered_frames=frames if rng.random() > 0.1 else frames - 2,
            sfm_point_count=int(rng.integers(200, 60_000)),
            text_area_fraction=float(rng.choice([0.0, 5e-5, 3e-3])),
            aesthetic_score=float(rng.uniform(2.5, 7.0)),
            flow_pair_labels=["pan_left"] * (frames - 1) if rng.random() > 0.2 else ["static"] * (frames - 1),
        )
    )

out = run_pipeline(Manifest(clips))
for stage, n in out.stage_counts.items():
    print(f"{stage:17s} {n}")
print("kept:", [c.clip_id for c in out.clips])
