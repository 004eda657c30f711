import itertools
import json

import numpy as np
import pytest
from conftest import STAGE_VIOLATIONS, clean_clip, funnel_manifest

from mvcam.curation import (
    STAGES,
    CurationThresholds,
    Manifest,
    MotionConfig,
    MotionLabel,
    classify_clip_motion,
    classify_pair_motion,
    filter_clip,
    radial_alignment,
    run_pipeline,
)
from mvcam.errors import ContractError, EmptyInput


def uniform(u, v, h=9, w=12):
    f = np.empty((h, w, 2))
    f[..., 0], f[..., 1] = u, v
    return f


def radial(h=9, w=12, scale=3.0):
    ys, xs = np.meshgrid(np.arange(h) - (h - 1) / 2, np.arange(w) - (w - 1) / 2, indexing="ij")
    return np.stack([xs, ys], axis=-1) * scale


class TestPairClassifier:
    def test_uniform_rightward_is_pan_left(self):
        assert classify_pair_motion(uniform(5, 0), 1, 0.6) is MotionLabel.PAN_LEFT

    @pytest.mark.parametrize(
        "u, v, label",
        [(-5, 0, "pan_right"), (0, 5, "tilt_up"), (0, -5, "tilt_down"), (4, 3, "pan_left"), (3, 4, "tilt_up")],
    )
    def test_direction_quadrants(self, u, v, label):
        assert classify_pair_motion(uniform(u, v)) is MotionLabel(label)

    def test_radial(self):
        assert radial_alignment(radial()) == pytest.approx(1.0)
        assert classify_pair_motion(radial()) is MotionLabel.ZOOM_IN
        assert classify_pair_motion(-radial()) is MotionLabel.ZOOM_OUT

    def test_sub_threshold(self):
        assert classify_pair_motion(uniform(0.1, 0), static_threshold=1) is MotionLabel.STATIC

    def test_split_directions_unknown(self):
        f = uniform(5, 0)  # 12 columns: thirds right, down, left
        f[:, :8] = (0, 5)
        f[:, :4] = (-5, 0)
        assert classify_pair_motion(f) is MotionLabel.UNKNOWN
        f[:, :6] = (0, 5)  # exactly half down is not below the cutoff
        assert classify_pair_motion(f) is MotionLabel.TILT_UP

    def test_invert_flag(self):
        cfg = MotionConfig(invert_pan_tilt=True)
        assert classify_pair_motion(uniform(5, 0), config=cfg) is MotionLabel.PAN_RIGHT
        assert classify_pair_motion(uniform(0, 5), config=cfg) is MotionLabel.TILT_DOWN
        assert classify_pair_motion(radial(), config=cfg) is MotionLabel.ZOOM_IN

    def test_scale_invariance(self, rng):
        for _ in range(200):
            f = rng.normal(size=(6, 8, 2)) + rng.normal(scale=3, size=2)
            mag = np.linalg.norm(f, axis=-1).mean()
            f = f * (1.5 / mag)  # mean magnitude 1.5, above the threshold
            base = classify_pair_motion(f)
            for k in (1.0, 2.0, 17.0, 1e4):
                assert classify_pair_motion(f * k) is base

    def test_invalid_field(self):
        with pytest.raises(ContractError):
            classify_pair_motion(np.zeros((4, 4, 3)))
        with pytest.raises(ContractError):
            classify_pair_motion(np.full((2, 2, 2), np.nan))


class TestClipAggregation:
    def test_examples(self):
        assert classify_clip_motion(["pan_left"] * 6 + ["zoom_in"] * 4) is MotionLabel.PAN_LEFT
        assert classify_clip_motion(["pan_left"] * 9 + ["static"]) is MotionLabel.STATIC
        assert classify_clip_motion(["pan_left"] * 5 + ["zoom_in"] * 5) is MotionLabel.UNKNOWN

    def test_unknown_pair_is_static(self):
        assert classify_clip_motion(["zoom_in"] * 5 + ["unknown"]) is MotionLabel.STATIC

    def test_empty(self):
        with pytest.raises(EmptyInput):
            classify_clip_motion([])

    def test_permutation_invariant(self, rng):
        labels = ["pan_left"] * 4 + ["tilt_up"] * 3
        for _ in range(20):
            assert classify_clip_motion(rng.permutation(labels)) is MotionLabel.PAN_LEFT


def independent_verdicts(c, th=CurationThresholds()):
    """Per-stage pass/fail computed directly from the record fields."""
    labels = [str(getattr(l, "value", l)) for l in (c.flow_pair_labels or [])]
    moving = labels and not any(l in ("static", "unknown") for l in labels)
    return {
        "sfm_registration": c.sfm_point_count is not None and c.registered_frames == c.frame_count,
        "point_count": c.sfm_point_count is None or th.min_points <= c.sfm_point_count <= th.max_points,
        "ocr": c.text_area_fraction <= th.max_text_area,
        "aesthetic": c.aesthetic_score >= th.min_aesthetic,
        "motion": bool(moving),
    }


def independent_counts(clips, stages=STAGES):
    alive = list(clips)
    counts = {"input": len(alive)}
    for s in stages:
        alive = [c for c in alive if independent_verdicts(c)[s]]
        counts[s] = len(alive)
    return counts, alive


class TestFilter:
    def test_boundaries(self):
        assert filter_clip(clean_clip("a", sfm_point_count=999)) == (False, ["point_count_low"])
        assert filter_clip(clean_clip("a", sfm_point_count=40_001)) == (False, ["point_count_high"])
        assert filter_clip(clean_clip("a", sfm_point_count=1_000))[0]
        assert filter_clip(clean_clip("a", sfm_point_count=40_000))[0]
        assert filter_clip(clean_clip("a", aesthetic_score=4.0, sfm_point_count=5_000)) == (True, [])
        assert filter_clip(clean_clip("a", text_area_fraction=1e-4))[0]

    def test_all_reasons_reported(self):
        c = clean_clip("a", sfm_point_count=10, text_area_fraction=0.5, aesthetic_score=1, flow_pair_labels=["static"])
        keep, reasons = filter_clip(c)
        assert not keep
        assert reasons == ["point_count_low", "text_area", "aesthetic_low", "motion_static"]

    def test_missing_motion_rejected(self):
        assert filter_clip(clean_clip("a", flow_pair_labels=None)) == (False, ["motion_missing"])

    @pytest.mark.parametrize("stage", STAGES)
    def test_each_violation_hits_one_stage(self, stage):
        for ov in STAGE_VIOLATIONS[stage]:
            v = independent_verdicts(clean_clip("x", **ov))
            assert [s for s, ok in v.items() if not ok] == [stage]
            assert not filter_clip(clean_clip("x", **ov))[0]


class TestPipeline:
    def test_funnel_counts(self, rng):
        m = funnel_manifest(rng)
        out = run_pipeline(m)
        expected, alive = independent_counts(m.clips)
        assert out.stage_counts == expected
        assert list(out.stage_counts.values()) == [100, 98, 96, 94, 92, 90]
        assert [c.clip_id for c in out.clips] == [c.clip_id for c in alive]

    def test_empty(self):
        out = run_pipeline(Manifest([]))
        assert out.clips == [] and set(out.stage_counts.values()) == {0}

    def test_all_pass(self):
        m = Manifest([clean_clip(f"c{i}") for i in range(7)])
        out = run_pipeline(m)
        assert out.clips == m.clips and set(out.stage_counts.values()) == {7}

    def test_stage_permutation_invariance(self, rng):
        for trial in range(5):
            clips = []
            for i in range(60):
                ov = {}
                for stage, options in STAGE_VIOLATIONS.items():
                    if rng.random() < 0.15:
                        ov.update(options[int(rng.integers(len(options)))])
                clips.append(clean_clip(f"r{trial}_{i}", **ov))
            m = Manifest(clips)
            base = {c.clip_id for c in run_pipeline(m).clips}
            for perm in itertools.permutations(STAGES):
                out = run_pipeline(m, stages=perm)
                assert {c.clip_id for c in out.clips} == base
                assert out.stage_counts == independent_counts(clips, perm)[0]

    def test_counts_non_increasing(self, rng):
        counts = list(run_pipeline(funnel_manifest(rng)).stage_counts.values())
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_jobs_determinism(self, rng):
        m = funnel_manifest(rng)
        a, b = run_pipeline(m, jobs=1), run_pipeline(m, jobs=8)
        assert a.to_json() == b.to_json()

    def test_unknown_stage(self):
        with pytest.raises(ValueError):
            run_pipeline(Manifest([]), stages=("ocr", "vibes"))


class TestManifestJson:
    def test_round_trip(self, rng):
        m = run_pipeline(funnel_manifest(rng))
        back = Manifest.from_json(m.to_json())
        assert back.to_json() == m.to_json()
        data = json.loads(m.to_json())
        assert set(data) == {"clips", "stage_counts"}
        assert data["clips"][0]["flow_labels"][0] == "pan_left"

    def test_null_points(self):
        m = Manifest([clean_clip("a", sfm_point_count=None)])
        assert Manifest.from_json(m.to_json()).clips[0].sfm_point_count is None

    def test_missing_field(self):
        with pytest.raises(ContractError):
            Manifest.from_json('{"clips": [{"clip_id": "a"}]}')
        with pytest.raises(ContractError):
            Manifest.from_json("[]")
