"""Distance estimators against closed-form Gaussian answers.

Unit-variance normals 3 apart have total variation 2 Phi(1.5) - 1 and
mean-zero normals with spreads 1 and 2 are exactly sqrt(2/pi) apart in
Wasserstein-1; the estimators should land on those numbers with their
documented bias and noise.
"""

import math

import numpy as np

from chaoslab import (fm_two_samples, rng, small_ball, tv_two_samples,
                      tv_vs_density, wasserstein1)
from chaoslab.distances import normal_cdf

n = 100_000
x = rng.gaussians(1, 0, n)
y = rng.gaussians(2, 0, n) + 3.0

est = tv_vs_density(x, 0.0, 1.0, seed=5)
print(f"KDE self-distance:        {est.value:.4f}  ci [{est.ci_low:.4f}, {est.ci_high:.4f}]")

est = tv_vs_density(y, 0.0, 1.0, seed=5)
print(f"KDE tv to shifted target: {est.value:.4f}  (closed form {2*normal_cdf(1.5)-1:.4f})")

est = tv_two_samples(x, y, seed=5)
print(f"histogram two-sample tv:  {est.value:.4f}  (upward-biased at finite N)")

est = fm_two_samples(x, np.zeros(n), seed=5)
print(f"FM to a point mass:       {est.value:.4f}  (sup = E min(|X|,2) = 0.7810)")

est = wasserstein1(x, 2.0 * rng.gaussians(3, 0, n), seed=5)
print(f"W1 between spreads 1,2:   {est.value:.4f}  (closed form {math.sqrt(2/math.pi):.4f})")

est = small_ball(x, 1.0)
print(f"P(|X| <= 1):              {est.value:.4f}  ci [{est.ci_low:.4f}, {est.ci_high:.4f}]"
      f"  (exact {2*normal_cdf(1.0)-1:.4f})")
