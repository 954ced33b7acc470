"""Choosing the quantile level on held-out data.

With correctly specified standard-normal predictives the central interval at
level q covers with probability 1 - 2q, so the calibrator should land near
alpha / 2. Shrink the predictive spread and it has to reach further into the
tails; shrink it far enough and sample-based predictives run out of samples.
"""

import numpy as np

from ensemble_calib import GaussianPredictive, SamplePredictive, calibrate_q, calibrate_q2
from ensemble_calib.gaussian import RngStream

alpha = 0.1
m = 2000
rng = RngStream(3).generator()
y = rng.standard_normal(m)

for scale in (1.0, 0.8, 0.65):
    res = calibrate_q(y, GaussianPredictive(np.zeros(m), np.full(m, scale**2)), alpha)
    print(f"predictive sd {scale:.2f}: q_hat {res.q_hat:.5f}, risk {res.empirical_risk:.3f}, "
          f"PAC slack {res.pac.slack:.4f}")

# the same thing from 500 draws per point
draws = rng.standard_normal((m, 500)) * 0.8
res = calibrate_q(y, SamplePredictive(draws), alpha)
print(f"\n500 draws, sd 0.8: q_hat {res.q_hat:.4f}, saturated {res.saturated}")
draws = rng.standard_normal((m, 500)) * 0.1
res = calibrate_q(y, SamplePredictive(draws), alpha)
print(f"500 draws, sd 0.1: q_hat {res.q_hat:.4f}, saturated {res.saturated} "
      f"(risk {res.empirical_risk:.3f} at the smallest resolvable level)")

# a shifted predictive wants an asymmetric pair of levels
shifted = GaussianPredictive(np.full(m, 0.5), np.ones(m))
sym = calibrate_q(y, shifted, alpha)
asym = calibrate_q2(y, shifted, alpha)
print(f"\nshifted predictive: symmetric q {sym.q_hat:.4f}, "
      f"asymmetric levels ({asym.q_lower:.4f}, {asym.q_upper:.4f}), "
      f"mean width {asym.mean_width:.3f}")
