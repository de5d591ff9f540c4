"""
Moments of masked vectors
=========================

Each independent Bernoulli factor on a coordinate multiplies the expected
squared norm by rho, since r^2 = r for 0/1 variables.
"""

from dropout_rademacher.moments import MomentQuery, moment_analytic, moment_enumerate, moment_monte_carlo

x = (1.0, 2.0, 3.0)
for p in (1, 2, 3, 4):
    q = MomentQuery(x=x, power=p, rho=0.3)
    mean, se = moment_monte_carlo(q, 100_000, seed=p)
    print(f"p={p}: analytic {moment_analytic(q):.6f}  enumerated {moment_enumerate(q):.6f}  "
          f"monte carlo {mean:.6f} +- {se:.6f}")

# two vector masks, or one vector and one scalar mask: same answer
for vm in (1, 2):
    print("vector masks", vm, moment_enumerate(MomentQuery(x=x, power=2, rho=0.5, vector_masks=vm)))
