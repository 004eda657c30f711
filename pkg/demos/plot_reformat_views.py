"""
Turning one static-scene clip into several views
================================================

A clip of a static scene can be cut into several frame sequences that share
their first frame. Each scheme decides which source frames go to which view.
"""

from mvcam.dataset import reformat_static, reverse_augment, sample_stride

for scheme in ("blocks", "interleave"):
    va = reformat_static(source_len=9, F=5, V=2, scheme=scheme)
    print(f"{scheme:10s}", va.views)

# Pivot: both views start in the middle and walk outward in opposite directions.
va = reformat_static(source_len=27, F=14, V=2, scheme="pivot")
print("pivot     ", va.views)

# Reversal keeps the views aligned at a common frame.
print("reversed  ", reverse_augment(reformat_static(9, 5, 2, "blocks")).views)

# A random subsampling stride per clip, reproducible from the seed.
strides = [sample_stride("static_scene", seed) for seed in range(10)]
print("strides   ", strides)
print("with stride", strides[0], reformat_static(60, 5, 2, "interleave", stride=strides[0]).views)
