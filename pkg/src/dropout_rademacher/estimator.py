"""Monte Carlo estimates of the dropout Rademacher complexity.

The empirical complexity of a sample (xs, masks) is the average over sign
vectors eps of

    sup_w (1/n) sum_i eps_i f(w, x_i, r_i).

For the linear model the supremum has a closed form.  For hidden layers it is
approximated by projected gradient ascent from several random boundary starts;
every value reported is attained by a feasible weight, so the estimate is a
lower bound on the true supremum.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .masks import DropoutType, SamplerConfig, child_seed, effective_masks, make_rng, sample_masks, check_masks
from .network import (
    NetworkSpec,
    WeightAssignment,
    backprop,
    check_weights,
    layer_radii,
    project_layers,
    propagate,
    random_weights,
)
from .projection import project_l2_ball


@dataclass(frozen=True)
class EstimatorConfig:
    n_epsilon_draws: int = 10
    n_restarts: int = 10
    ascent_steps: int = 500
    step_size: float = 0.1
    step_decay: float = 0.99
    n_outer_replicates: int = 10
    use_absconv_reduction: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("n_epsilon_draws", "n_restarts", "ascent_steps", "n_outer_replicates"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if not 0 < self.step_decay <= 1:
            raise ValueError("step_decay must lie in (0, 1]")


@dataclass(frozen=True)
class ComplexityEstimate:
    point: float
    std_error: float
    n_replicates: int
    values: tuple
    diagnostics: dict = field(default_factory=dict, compare=False)


class EstimatorDivergence(FloatingPointError):
    """The ascent produced a non-finite objective."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def summarize(values, diagnostics=None):
    """Mean and standard error (sample std / sqrt(count)) of replicate values."""
    values = np.asarray(values, dtype=float)
    se = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return ComplexityEstimate(
        point=float(np.mean(values)),
        std_error=se,
        n_replicates=int(values.size),
        values=tuple(float(v) for v in values),
        diagnostics=diagnostics or {},
    )


def closed_form_linear_sup(xs, masks, eps, B1):
    """sup over ||w|| <= B1 of (1/n) sum_i eps_i <w, x_i * r_i>, i.e. (B1/n) ||sum_i eps_i x_i * r_i||.

    ``masks`` holds the effective mask of each example (for two stacked masks
    pass their product).  ``eps`` may carry extra leading axes, one value is
    returned per sign vector.
    """
    xs = np.asarray(xs, dtype=float)
    masks = np.asarray(masks, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if xs.shape != masks.shape:
        raise ValueError(f"inputs {xs.shape} and masks {masks.shape} differ in shape")
    if eps.shape[-1] != xs.shape[0]:
        raise ValueError(f"{eps.shape[-1]} signs for {xs.shape[0]} examples")
    if np.any(np.abs(eps) != 1):
        raise ValueError("Rademacher signs must be +1 or -1")
    n = xs.shape[0]
    total = eps @ (xs * masks)
    out = B1 / n * np.linalg.norm(total, axis=-1)
    return out if out.ndim else float(out)


def classical_linear_rademacher(xs, eps, B):
    """Mask-free closed form (B/n) ||sum_i eps_i x_i|| for each sign vector."""
    xs = np.asarray(xs, dtype=float)
    return closed_form_linear_sup(xs, np.ones_like(xs), eps, B)


def linear_effective_masks(masks):
    """Per-example effective input masks of a k = 0 bundle, shape (n, d)."""
    return effective_masks(masks)[0][:, 0, :]


def sample_signs(rng, draws, n):
    return rng.choice((-1.0, 1.0), size=(draws, n))


def _batched_eff_masks(masks):
    # (n, out, in) -> (1, n, out, in) so they broadcast over problems
    return [m[None] for m in effective_masks(masks)]


def inner_objective_and_gradient(spec, w, xs, masks, eps):
    """Value and gradient of (1/n) sum_i eps_i f(w, x_i, r_i) at a single weight setting."""
    check_weights(spec, w)
    xs = np.asarray(xs, dtype=float)
    eps = np.asarray(eps, dtype=float)
    n = xs.shape[0]
    eff = _batched_eff_masks(masks)
    layers = [layer[None] for layer in w.layers]
    coeffs = eps[None] / n
    out, cache = propagate(spec, layers, xs, eff)
    grads = backprop(spec, layers, eff, cache, coeffs)
    value = float(np.sum(coeffs * out))
    return value, WeightAssignment(tuple(g[0] for g in grads))


def ascend(spec, X, masks, coeffs, layers, cfg, trainable=None, return_argmax=False):
    """Projected gradient ascent on P objectives sum_e coeffs[p, e] f_p(x_e) at once.

    Each step moves every layer block by ``step * B_j`` along its normalized
    gradient, then projects.  Returns the best objective seen per problem,
    shape (P,), and with ``return_argmax`` also the weights attaining it.
    """
    k = len(layers)
    trainable = list(range(k)) if trainable is None else list(trainable)
    radii = layer_radii(spec)
    layers = [np.array(layer, dtype=float) for layer in layers]
    best = np.full(coeffs.shape[0], -np.inf)
    argmax = [layer.copy() for layer in layers] if return_argmax else None
    step = cfg.step_size
    for t in range(cfg.ascent_steps + 1):
        out, cache = propagate(spec, layers, X, masks)
        values = np.sum(coeffs * out, axis=-1)
        if not np.all(np.isfinite(values)):
            raise EstimatorDivergence(
                f"non-finite objective at ascent step {t}",
                {"step": t, "best": best.copy(), "values": values},
            )
        if return_argmax:
            better = values > best
            for j, layer in enumerate(layers):
                argmax[j][better] = layer[better]
        best = np.maximum(best, values)
        if t == cfg.ascent_steps:
            break
        grads = backprop(spec, layers, masks, cache, coeffs)
        for j in trainable:
            g = grads[j]
            norm = np.sqrt(np.sum(g * g, axis=(-2, -1), keepdims=True))
            direction = g / np.where(norm > 0, norm, 1.0)
            layers[j] = layers[j] + step * radii[j][1] * direction
        layers = project_layers(spec, layers)
        step *= cfg.step_decay
    return (best, argmax) if return_argmax else best


def _reduced_problem(spec, eff, n_restarts, signs, rng):
    """Top-path reduction for an L1-constrained top layer.

    The supremum of a linear functional over the L1 ball is attained at a
    signed vertex, so the top layer is fixed to +B_k on one hidden unit j and
    the sign moves into the objective.  Problems are ordered (unit, sign,
    restart).
    """
    k = spec.hidden_layers
    m_k = spec.widths[-1]
    reduced = NetworkSpec(
        input_dim=spec.input_dim,
        widths=spec.widths[:-1] + (1,),
        budgets=spec.budgets,
        activation=spec.activation,
        input_bound=spec.input_bound,
    )
    per_unit = 2 * n_restarts
    P = m_k * per_unit
    masks = list(eff[:-1])
    below = eff[k - 1][0]  # (n, out or 1, in)
    if below.shape[1] == 1:
        masks[k - 1] = below[None]
    else:
        masks[k - 1] = np.repeat(np.moveaxis(below, 1, 0)[:, :, None, :], per_unit, axis=0)
    top = eff[k][0]  # (n, 1, m_k)
    masks.append(np.repeat(np.moveaxis(top, 2, 0)[..., None], per_unit, axis=0))
    layers = random_weights(reduced, rng, batch=(P,))
    layers[k] = np.full((P, 1, 1), spec.budgets[k])
    sign_of_problem = np.tile(np.repeat(signs, n_restarts), m_k)
    return reduced, masks, layers, sign_of_problem, list(range(k))


def estimate_empirical_rademacher(spec, dropout_type, xs, masks, cfg, force_ascent=False):
    """Empirical dropout Rademacher complexity of a fixed sample (xs, masks).

    ``masks`` is a MaskBundle batched over the n examples.  For k = 0 the exact
    closed form is used unless ``force_ascent``.  ``values`` holds one supremum
    per sign draw; ``diagnostics['signs']`` holds the draws themselves.
    """
    dropout_type = DropoutType.parse(dropout_type)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError("need a non-empty (n, d) sample")
    n = xs.shape[0]
    if masks.dropout_type is not dropout_type:
        raise ValueError(f"masks are type {masks.dropout_type.value}, asked for {dropout_type.value}")
    if masks.batch_shape != (n,):
        raise ValueError(f"need one mask bundle per example, got batch {masks.batch_shape}")
    check_masks(spec, masks)
    rng = make_rng(cfg.rng_seed, 0)
    eps = sample_signs(rng, cfg.n_epsilon_draws, n)
    k = spec.hidden_layers

    if k == 0 and not force_ascent:
        values = closed_form_linear_sup(xs, linear_effective_masks(masks), eps, spec.budgets[0])
        return summarize(values, {"signs": eps, "route": "closed_form"})

    eff = _batched_eff_masks(masks)
    absconv = cfg.use_absconv_reduction and k >= 1
    signs = np.array([1.0, -1.0])
    values, per_restart, per_sign = [], [], []
    for draw in range(cfg.n_epsilon_draws):
        if absconv:
            net, pmasks, layers, s, trainable = _reduced_problem(spec, eff, cfg.n_restarts, signs, rng)
        else:
            net, pmasks, trainable = spec, eff, None
            layers = random_weights(spec, rng, batch=(2 * cfg.n_restarts,))
            s = np.repeat(signs, cfg.n_restarts)
        coeffs = s[:, None] * eps[draw][None, :] / n
        try:
            best = ascend(net, xs, pmasks, coeffs, layers, cfg, trainable)
        except EstimatorDivergence as exc:
            exc.diagnostics.update(draw=draw, signs=eps)
            raise
        grid = best.reshape(-1, 2, cfg.n_restarts)  # (unit, sign, restart)
        values.append(float(best.max()))
        per_restart.append(grid.max(axis=(0, 1)))
        per_sign.append(grid.max(axis=(0, 2)))
    diagnostics = {
        "signs": eps,
        "route": "absconv_ascent" if absconv else "ascent",
        "best_per_restart": np.array(per_restart),
        "best_per_sign": np.array(per_sign),
    }
    return summarize(values, diagnostics)


def sphere_sampler(d, bound=1.0):
    """Inputs uniform on the sphere of radius `bound`."""

    def sample(rng, n):
        g = rng.standard_normal((n, d))
        return bound * g / np.linalg.norm(g, axis=1, keepdims=True)

    return sample


def gaussian_ball_sampler(d, bound=1.0):
    """N(0, bound^2/d I) inputs projected onto the ball of radius `bound`."""

    def sample(rng, n):
        return project_l2_ball(rng.standard_normal((n, d)) * bound / np.sqrt(d), bound)

    return sample


def estimate_expected_rademacher(spec, dropout_type, data_sampler, rho, n, cfg, force_ascent=False):
    """Average of the empirical estimate over fresh (sample, masks) replicates."""
    dropout_type = DropoutType.parse(dropout_type)
    if n < 1:
        raise ValueError("n must be >= 1")
    points, inner = [], []
    for r in range(cfg.n_outer_replicates):
        xs = data_sampler(make_rng(cfg.rng_seed, 3 * r + 1), n)
        masks = sample_masks(
            spec, dropout_type, SamplerConfig(rho, cfg.rng_seed, 3 * r + 2), size=n
        )
        est = estimate_empirical_rademacher(
            spec,
            dropout_type,
            xs,
            masks,
            replace(cfg, rng_seed=child_seed(cfg.rng_seed, 3 * r + 3)),
            force_ascent=force_ascent,
        )
        points.append(est.point)
        inner.append(est)
    return summarize(points, {"inner": inner})
