# %% [markdown]
# # Image deblurring
#
# Blur the bundled 64x64 test image with a separable Gaussian, add noise
# and restore it with a 2-D gradient penalty.

# %%
import numpy as np

from atreg import SolverConfig, at_solve, add_noise
from atreg.diagnostics import relative_error
from atreg.operators import grad2d
from atreg.pgm import bundled_image, write_pgm
from atreg.problems import gen_blur

# %%
img = bundled_image(64)
for band, sigma, eps in [(7, 2.0, 1e-3), (9, 2.5, 1e-1)]:
    p = gen_blur(64, band, sigma, img)
    ns = add_noise(p.b_ex, eps, seed=0)
    res = at_solve(p.A, ns.b, grad2d(64), SolverConfig(), x_ex=p.x_ex)
    print('band=%d sigma=%.1f eps=%g: m=%d blurred=%.4f restored=%.4f'
          % (band, sigma, eps, res.iterations,
             relative_error(ns.b, p.x_ex), relative_error(res.x, p.x_ex)))

# %%
# Save the last restoration; vec is column-stacked.
write_pgm('restored.pgm', np.clip(res.x.reshape(64, 64, order='F'), 0, 1))
