"""
Hidden layers and the width of the top layer
============================================

With hidden layers the estimator runs projected gradient ascent, so every
number below is attained by a feasible network and is a lower bound on
the true complexity.  With a single hidden unit it stays below the
closed-form bound.  With several units each unit sees its own mask, the
supremum can pick the luckiest one, and the estimate overshoots the bound
when rho < 1.
"""

from dropout_rademacher import NetworkSpec, EstimatorConfig, estimate_expected_rademacher
from dropout_rademacher import theoretical_complexity_bound, sphere_sampler

cfg = EstimatorConfig(n_epsilon_draws=4, n_restarts=6, ascent_steps=200, n_outer_replicates=6)
n, rho = 32, 0.25

print("width   estimate  +- se     bound")
for width in (1, 2, 4, 8):
    spec = NetworkSpec(input_dim=8, widths=(width,), budgets=(1.0, 1.0), activation="tanh")
    est = estimate_expected_rademacher(spec, "II", sphere_sampler(8), rho, n, cfg)
    bound = theoretical_complexity_bound(spec, "II", rho, n)
    print(f"{width:5d}   {est.point:.4f}   {est.std_error:.4f}   {bound:.4f}")

# at rho = 1 all units see the same input and the width stops mattering
for width in (1, 4):
    spec = NetworkSpec(input_dim=8, widths=(width,), budgets=(1.0, 1.0), activation="tanh")
    est = estimate_expected_rademacher(spec, "II", sphere_sampler(8), 1.0, n, cfg)
    print(f"rho = 1, width {width}: {est.point:.4f}")
