"""Conjugate updates by hand and by the library.

A one-dimensional update that can be checked by hand, then a flat prior
that should land on least squares, then the predictive distribution
computed both in closed form and from an ensemble of posterior draws.
"""

import numpy as np

from ensemble_calib import Dataset, PriorSpec, posterior_update, predictive
from ensemble_calib.gaussian import RngStream

# prior N(0, 1), one observation y = 1 at x = 1, noise variance 1:
# precision 1 + 1 = 2, so the posterior is N(0.5, 0.5)
post = posterior_update(PriorSpec([0.0], [[1.0]]), Dataset([[1.0]], [1.0]), 1.0)
print(f"1-d posterior: mean {post.mean[0]:.3f}, variance {post.cov[0, 0]:.3f}")

rng = RngStream(1).generator()
x = np.column_stack([np.ones(100), rng.standard_normal((100, 3))])
beta = np.array([1.0, -2.0, 0.5, 3.0])
y = x @ beta + rng.standard_normal(100)

flat = posterior_update(PriorSpec.isotropic(4, 0.0, 1e8), Dataset(x, y), 1.0)
ols, *_ = np.linalg.lstsq(x, y, rcond=None)
print("flat-prior mean  ", np.round(flat.mean, 4))
print("least squares    ", np.round(ols, 4))

# a confident but wrong prior pulls the fit away from the data
wrong = posterior_update(PriorSpec.isotropic(4, 5.0, 0.01), Dataset(x, y), 1.0)
print("prior N(5, 0.01I)", np.round(wrong.mean, 4))

x_new = np.array([[1.0, 0.0, 0.0, 0.0]])
exact = predictive(flat, x_new, "analytic")
mc = predictive(flat, x_new, "sampling", 100_000, RngStream(2))
print(f"\npredictive at the origin: mean {exact.mean[0]:.3f}, sd {np.sqrt(exact.var[0]):.3f}")
for p in (0.05, 0.5, 0.95):
    print(f"  quantile {p:.2f}: closed form {exact.quantile(p)[0]:+.3f}, "
          f"100k draws {mc.quantile(p)[0]:+.3f}")
