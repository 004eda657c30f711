"""
Inflating single-view attention to many views
=============================================

The latent video tensor has axes (B, V, F, C, H, W). Each attention layout
is only a different grouping of those axes into (batch, tokens, channels),
so one set of projection weights serves every layout.
"""

import numpy as np

from mvcam.attention import AttentionWeights, Layout, rearrange, view_integrated_block

rng = np.random.default_rng(0)
B, V, F, C, H, W = 1, 2, 3, 8, 4, 4
latent = rng.standard_normal((B, V, F, C, H, W))

for layout in Layout:
    print(f"{layout.value:16s} tokens {rearrange(latent, layout).shape}")

# The same weights run on every layout.
w = AttentionWeights.random(C, rng, head_count=2)
out = view_integrated_block(latent, Layout.CROSS_VIEW, w)
print("cross-view output keeps the latent shape:", out.shape == latent.shape)

# With a single view, cross-view attention is exactly the spatial attention
# the weights were trained with.
single = latent[:, :1]
a = view_integrated_block(single, Layout.CROSS_VIEW, w)
b = view_integrated_block(single, Layout.SPATIAL_VANILLA, w)
print("V=1 cross-view vs spatial, max diff:", np.abs(a - b).max())
