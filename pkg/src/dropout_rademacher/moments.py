"""Second moments of Bernoulli-masked vectors.

For vector masks r_1 (and r_2) of the size of x, and scalar masks r_1..r_s,
all i.i.d. Bern(rho),

    E || x * r_1 [* r_2] * prod_i r_i ||^2 = rho^p ||x||^2,

with p the number of independent factors multiplying each coordinate.  Since
r^2 = r for 0/1 variables each factor contributes exactly one rho.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .masks import make_rng


@dataclass(frozen=True)
class MomentQuery:
    """``vector_masks`` of the p factors are length-d vectors, the rest scalars.

    Defaults to one vector mask for p = 1 and two otherwise.
    """

    x: tuple
    power: int
    rho: float
    vector_masks: int = None

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.ravel(self.x)))
        if self.power < 1:
            raise ValueError("power must be >= 1")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.vector_masks is None:
            object.__setattr__(self, "vector_masks", 1 if self.power == 1 else 2)
        if not 1 <= self.vector_masks <= min(2, self.power):
            raise ValueError("vector_masks must be 1 or 2 and at most power")

    @property
    def scalar_masks(self):
        return self.power - self.vector_masks


def moment_analytic(q):
    return q.rho ** q.power * float(np.dot(q.x, q.x))


def _masked_sq_norm(x, vec, scal):
    """||x * prod(vector masks) * prod(scalar masks)||^2 per configuration."""
    keep = np.prod(vec, axis=-2) * np.prod(scal, axis=-1, keepdims=True)
    return np.sum((x * keep) ** 2, axis=-1)


def moment_enumerate(q):
    """Exact expectation by summing over all 0/1 mask configurations."""
    x = np.asarray(q.x)
    d = x.size
    bits = q.vector_masks * d + q.scalar_masks
    if bits > 24:
        raise ValueError(f"{bits} mask bits is too many to enumerate")
    configs = np.array(list(itertools.product((0, 1), repeat=bits)), dtype=float).reshape(-1, bits)
    ones = configs.sum(axis=1)
    prob = q.rho ** ones * (1.0 - q.rho) ** (bits - ones)
    vec = configs[:, : q.vector_masks * d].reshape(-1, q.vector_masks, d)
    scal = configs[:, q.vector_masks * d:]
    values = _masked_sq_norm(x, vec, scal)
    return math.fsum(prob * values)


def moment_monte_carlo(q, trials, seed=0):
    """Sample mean and standard error of the masked squared norm."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = make_rng(seed, 0)
    x = np.asarray(q.x)
    vec = rng.random((trials, q.vector_masks, x.size)) < q.rho
    scal = rng.random((trials, q.scalar_masks)) < q.rho
    values = _masked_sq_norm(x, vec.astype(float), scal.astype(float))
    # shifted mean: exact when every trial gives the same value
    mean = float(values[0] + np.mean(values - values[0]))
    se = float(np.std(values, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, se
