"""
Complexity of the dropout linear class
======================================

For a single linear layer the supremum over the weight ball is a norm,
so the empirical complexity is exact.  Its average over samples shrinks
like sqrt(rho) for types I/II and like rho for type III.
"""

import numpy as np

from dropout_rademacher import NetworkSpec, EstimatorConfig, estimate_expected_rademacher
from dropout_rademacher import theoretical_complexity_bound, sphere_sampler
from dropout_rademacher.harness import fit_loglog_slope

spec = NetworkSpec(input_dim=64, budgets=(1.0,))
cfg = EstimatorConfig(n_epsilon_draws=10, n_outer_replicates=10)
n = 64
rhos = (0.1, 0.25, 0.5, 1.0)

print(" type   rho   estimate  +- se      bound")
for t in ("I", "III"):
    points = []
    for rho in rhos:
        est = estimate_expected_rademacher(spec, t, sphere_sampler(64), rho, n, cfg)
        bound = theoretical_complexity_bound(spec, t, rho, n)
        points.append((rho, est.point))
        print(f"{t:>5} {rho:5.2f}   {est.point:.4f}   {est.std_error:.4f}   {bound:.4f}")
    slope, r2 = fit_loglog_slope(points)
    print(f"  fitted slope in log rho: {slope:.3f} (r^2 {r2:.4f})\n")

# the gradient-ascent path finds the same supremum as the closed form
from dropout_rademacher.estimator import estimate_empirical_rademacher
from dropout_rademacher.masks import SamplerConfig, sample_masks

rng = np.random.default_rng(3)
xs = sphere_sampler(64)(rng, 20)
masks = sample_masks(spec, "II", SamplerConfig(0.5, 4), size=20)
exact = estimate_empirical_rademacher(spec, "II", xs, masks, cfg)
ascent = estimate_empirical_rademacher(spec, "II", xs, masks, cfg, force_ascent=True)
print("closed form:", np.round(exact.values[:4], 6))
print("ascent:     ", np.round(ascent.values[:4], 6))
