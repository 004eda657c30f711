"""
Deterministic sampling with a known denoiser
============================================

For Gaussian data the ideal denoiser has a closed form, so the sampler can
be checked against the true distribution without any training.
"""

import numpy as np

from mvcam.edm import edm_coeffs, gaussian_posterior_denoiser, pf_ode_sample, sigma_schedule

# Preconditioning at the noise level equal to the data std: half skip, half network.
c = edm_coeffs(0.5)
print(f"c_skip={c.c_skip:.3f} c_out={c.c_out:.3f} c_in={c.c_in:.3f} c_noise={c.c_noise:.3f}")

# 25 noise levels from 80 down to 0.002, then a final step to 0.
sched = sigma_schedule(25)
print("first sigmas:", np.round(sched.sigmas[:4], 3), "last:", sched.sigmas[-3:])

# Target: N(mu, s^2). Start from the exact noisy marginal at sigma_max.
mu, s = np.array([1.0, -1.0]), 2.0
rng = np.random.default_rng(7)
x_init = mu + np.sqrt(s**2 + 80.0**2) * rng.standard_normal((5000, 2))
D = gaussian_posterior_denoiser(mu, s)

for method in ("euler", "heun"):
    x = pf_ode_sample(D, x_init, sched, method)
    print(f"{method:5s} mean {np.round(x.mean(axis=0), 3)}  var/s^2 {x.var(axis=0).mean() / s**2:.3f}")
