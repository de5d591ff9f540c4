"""Euclidean projections onto L2 and L1 balls, vectorized over leading axes."""

import numpy as np

# Relative slack used when deciding that a vector is already feasible.  Without
# it a vector projected onto the L1 sphere can land a rounding error outside the
# ball and be moved again on a second projection.
FEASIBILITY_RTOL = 1e-12


def project_l2_ball(v, radius):
    """Project the rows (last axis) of `v` onto the L2 ball of `radius`.

    Rows already inside the ball are returned unchanged.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    outside = norms > radius * (1.0 + FEASIBILITY_RTOL)
    scale = np.where(outside, radius / np.where(outside, norms, 1.0), 1.0)
    return np.where(outside, v * scale, v)


def project_simplex(u, radius):
    """Project non-negative rows of `u` onto {z >= 0, sum(z) = radius}.

    Sort-and-threshold: after sorting in decreasing order the threshold is
    (cumsum_j - radius) / j at the last index j where it stays below u_j.
    """
    u = np.asarray(u, dtype=float)
    if radius == 0:
        return np.zeros_like(u)
    desc = -np.sort(-u, axis=-1)
    css = np.cumsum(desc, axis=-1)
    ranks = np.arange(1, u.shape[-1] + 1)
    cond = desc * ranks > css - radius
    # cond is true on a prefix; its length is the support size
    support = np.sum(cond, axis=-1, keepdims=True)
    theta = (np.take_along_axis(css, support - 1, axis=-1) - radius) / support
    return np.maximum(u - theta, 0.0)


def project_l1_ball(v, radius):
    """Project the rows (last axis) of `v` onto the L1 ball of `radius`.

    Rows already inside the ball are returned unchanged.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    v = np.asarray(v, dtype=float)
    l1 = np.sum(np.abs(v), axis=-1, keepdims=True)
    outside = l1 > radius * (1.0 + FEASIBILITY_RTOL)
    if not np.any(outside):
        return v.copy()
    projected = np.sign(v) * project_simplex(np.abs(v), radius)
    return np.where(outside, projected, v)
