import itertools
import math

import numpy as np
import pytest

from dropout_rademacher.bounds import theoretical_complexity_bound
from dropout_rademacher.estimator import (
    EstimatorConfig,
    EstimatorDivergence,
    classical_linear_rademacher,
    closed_form_linear_sup,
    estimate_empirical_rademacher,
    estimate_expected_rademacher,
    inner_objective_and_gradient,
    linear_effective_masks,
    sample_signs,
    sphere_sampler,
    summarize,
)
from dropout_rademacher.masks import SamplerConfig, child_seed, effective_masks, make_rng, sample_masks
from dropout_rademacher.network import NetworkSpec, WeightAssignment, random_weights

FAST = EstimatorConfig(n_epsilon_draws=3, n_restarts=4, ascent_steps=150, n_outer_replicates=3)


def disk_grid_search(objective, radius=1.0):
    """Max over a polar grid of the disk, boundary circle included."""
    r, th = np.meshgrid(np.linspace(0, radius, 201), np.linspace(0, 2 * np.pi, 20001))
    pts = np.stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()], axis=1)
    return objective(pts).max()


def test_closed_form_examples():
    assert closed_form_linear_sup([[3.0, 4.0]], [[1, 1]], [1.0], 2.0) == 10.0
    assert closed_form_linear_sup([[1.0, 0.0], [1.0, 0.0]], [[1, 1], [1, 1]], [1.0, -1.0], 1.0) == 0.0


def test_closed_form_root_half_against_grid_search():
    xs = np.array([[1.0, 0.0], [0.0, 1.0]])
    masks = np.array([[1, 0], [1, 1]])
    oracle = disk_grid_search(lambda w: (w @ (xs[0] * masks[0]) + w @ (xs[1] * masks[1])) / 2)
    assert oracle == pytest.approx(math.sqrt(2) / 2, abs=1e-6)
    assert closed_form_linear_sup(xs, masks, [1.0, 1.0], 1.0) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)


def test_closed_form_validation():
    with pytest.raises(ValueError):
        closed_form_linear_sup([[1.0]], [[1, 1]], [1.0], 1.0)
    with pytest.raises(ValueError):
        closed_form_linear_sup([[1.0]], [[1]], [0.5], 1.0)
    with pytest.raises(ValueError):
        closed_form_linear_sup([[1.0]], [[1]], [1.0, 1.0], 1.0)


@pytest.mark.parametrize("t", ["I", "II", "III"])
def test_linear_routes_to_closed_form(t, rng):
    spec = NetworkSpec(input_dim=4, budgets=(1.5,))
    xs = rng.normal(size=(9, 4))
    masks = sample_masks(spec, t, SamplerConfig(0.5, 2), size=9)
    est = estimate_empirical_rademacher(spec, t, xs, masks, FAST)
    assert est.diagnostics["route"] == "closed_form"
    direct = closed_form_linear_sup(xs, linear_effective_masks(masks), est.diagnostics["signs"], 1.5)
    assert est.values == tuple(direct)
    assert est.point == np.mean(direct)


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("t", ["I", "II", "III"])
def test_zero_masks_give_zero(k, t, rng):
    spec = NetworkSpec(input_dim=3, widths=(2,) * k, budgets=(1.0,) * (k + 1))
    xs = rng.normal(size=(5, 3))
    masks = sample_masks(spec, t, SamplerConfig(0.0), size=5)
    est = estimate_empirical_rademacher(spec, t, xs, masks, FAST, force_ascent=True)
    assert est.point == 0.0


def test_forced_ascent_never_exceeds_closed_form_and_reaches_it(rng):
    spec = NetworkSpec(input_dim=5, budgets=(2.0,))
    cfg = EstimatorConfig(n_epsilon_draws=5, n_restarts=10, ascent_steps=300)
    for t in ("I", "II", "III"):
        xs = rng.normal(size=(12, 5))
        masks = sample_masks(spec, t, SamplerConfig(0.6, 5), size=12)
        exact = estimate_empirical_rademacher(spec, t, xs, masks, cfg)
        forced = estimate_empirical_rademacher(spec, t, xs, masks, cfg, force_ascent=True)
        for a, e in zip(forced.values, exact.values):
            assert a <= e * (1 + 1e-12)
            assert a == pytest.approx(e, abs=1e-6)


@pytest.mark.parametrize("t", ["I", "II", "III"])
def test_identity_single_unit_matches_composed_closed_form(t, rng):
    spec = NetworkSpec(input_dim=4, widths=(1,), budgets=(1.0, 1.0), activation="identity")
    cfg = EstimatorConfig(n_epsilon_draws=4, n_restarts=10, ascent_steps=400)
    xs = sphere_sampler(4)(rng, 10)
    masks = sample_masks(spec, t, SamplerConfig(0.5, 8), size=10)
    est = estimate_empirical_rademacher(spec, t, xs, masks, cfg)
    eff = effective_masks(masks)
    # masked input seen by the hidden unit, times the mask on its outgoing weight
    x_tilde = xs * eff[0][:, 0, :] * eff[1][:, 0, :]
    oracle = closed_form_linear_sup(xs, x_tilde / np.where(xs == 0, 1, xs), est.diagnostics["signs"], 1.0)
    np.testing.assert_allclose(est.values, oracle, rtol=1e-3)


def enumerated_type_one_scalar(n, rho, B=1.0):
    """E over all (eps, r) of (B/n)|sum_i eps_i r_i| for d = 1, x_i = 1."""
    total = 0.0
    for eps in itertools.product((-1, 1), repeat=n):
        for r in itertools.product((0, 1), repeat=n):
            kept = sum(r)
            p = rho**kept * (1 - rho) ** (n - kept) / 2**n
            total += p * abs(sum(e * m for e, m in zip(eps, r)))
    return B / n * total


def test_type_one_scalar_matches_enumeration():
    n, rho = 8, 0.4
    oracle = enumerated_type_one_scalar(n, rho)
    # independent check of the oracle by a binomial sum over the kept count
    binom = sum(
        math.comb(n, m) * rho**m * (1 - rho) ** (n - m)
        * sum(math.comb(m, j) * abs(2 * j - m) for j in range(m + 1)) / 2**m
        for m in range(n + 1)
    ) / n
    assert oracle == pytest.approx(binom, rel=1e-12)
    spec = NetworkSpec(input_dim=1)
    cfg = EstimatorConfig(n_epsilon_draws=20, n_outer_replicates=200, rng_seed=3)
    est = estimate_expected_rademacher(spec, "I", lambda rng, m: np.ones((m, 1)), rho, n, cfg)
    assert abs(est.point - oracle) <= 3 * est.std_error


def test_rho_one_linear_equals_classical():
    spec = NetworkSpec(input_dim=6, budgets=(1.0,))
    cfg = EstimatorConfig(n_epsilon_draws=7, n_outer_replicates=4, rng_seed=12)
    sampler = sphere_sampler(6)
    for t in ("I", "II", "III"):
        est = estimate_expected_rademacher(spec, t, sampler, 1.0, 20, cfg)
        classical = []
        for r in range(cfg.n_outer_replicates):
            xs = sampler(make_rng(cfg.rng_seed, 3 * r + 1), 20)
            eps = sample_signs(make_rng(child_seed(cfg.rng_seed, 3 * r + 3), 0), cfg.n_epsilon_draws, 20)
            classical.append(np.mean(classical_linear_rademacher(xs, eps, 1.0)))
        assert est.values == tuple(classical)


@pytest.mark.parametrize("seed", range(5))
def test_linear_type_three_below_bound(seed):
    spec = NetworkSpec(input_dim=8, budgets=(1.0,))
    cfg = EstimatorConfig(n_epsilon_draws=10, n_outer_replicates=10, rng_seed=seed)
    for rho in (0.1, 0.5, 0.9):
        est = estimate_expected_rademacher(spec, "III", sphere_sampler(8), rho, 30, cfg)
        assert est.point <= theoretical_complexity_bound(spec, "III", rho, 30) + 3 * est.std_error


def test_doubling_top_budget_doubles_estimate(rng):
    a = NetworkSpec(input_dim=3, widths=(3,), budgets=(1.0, 1.0))
    b = NetworkSpec(input_dim=3, widths=(3,), budgets=(1.0, 2.0))
    xs = rng.normal(size=(6, 3))
    masks = sample_masks(a, "II", SamplerConfig(0.5, 1), size=6)
    ea = estimate_empirical_rademacher(a, "II", xs, masks, FAST)
    eb = estimate_empirical_rademacher(b, "II", xs, masks, FAST)
    np.testing.assert_allclose(eb.values, 2 * np.array(ea.values), rtol=1e-12)


@pytest.mark.parametrize("absconv", [True, False])
@pytest.mark.parametrize("t", ["I", "II", "III"])
def test_values_dominate_random_probes_and_zero(absconv, t, rng):
    spec = NetworkSpec(input_dim=3, widths=(3, 2), budgets=(1.0, 1.0, 1.0), activation="tanh")
    cfg = EstimatorConfig(n_epsilon_draws=3, n_restarts=5, ascent_steps=200, use_absconv_reduction=absconv)
    xs = sphere_sampler(3)(rng, 8)
    masks = sample_masks(spec, t, SamplerConfig(0.7, 9), size=8)
    est = estimate_empirical_rademacher(spec, t, xs, masks, cfg)
    assert est.diagnostics["route"] == ("absconv_ascent" if absconv else "ascent")
    assert min(est.values) >= 0.0
    for draw, eps in enumerate(est.diagnostics["signs"]):
        for _ in range(30):
            probe = random_weights(spec, rng, scale=rng.uniform())
            value, _ = inner_objective_and_gradient(spec, probe, xs, masks, eps)
            assert est.values[draw] >= value


@pytest.mark.parametrize("kind", ["tanh", "centered_sigmoid", "identity", "relu"])
def test_inner_gradient_finite_difference(kind, rng):
    spec = NetworkSpec(input_dim=3, widths=(3, 2), budgets=(1.0, 1.0, 1.0), activation=kind)
    xs = rng.normal(size=(5, 3))
    masks = sample_masks(spec, "III", SamplerConfig(0.8, 1), size=5)
    eps = sample_signs(rng, 1, 5)[0]
    w = random_weights(spec, rng)
    _, grad = inner_objective_and_gradient(spec, w, xs, masks, eps)
    theta, g = w.flat(), grad.flat()
    h = 1e-5
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        fd = (
            inner_objective_and_gradient(spec, WeightAssignment.from_flat(spec, up), xs, masks, eps)[0]
            - inner_objective_and_gradient(spec, WeightAssignment.from_flat(spec, down), xs, masks, eps)[0]
        ) / (2 * h)
        assert g[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_divergence_reports_diagnostics():
    spec = NetworkSpec(input_dim=2, widths=(2,), budgets=(1.0, 1.0))
    xs = np.array([[np.nan, 0.0], [1.0, 0.0]])
    masks = sample_masks(spec, "I", SamplerConfig(1.0), size=2)
    with pytest.raises(EstimatorDivergence) as err:
        estimate_empirical_rademacher(spec, "I", xs, masks, FAST)
    assert err.value.diagnostics["step"] == 0 and "signs" in err.value.diagnostics


def test_input_validation(rng):
    spec = NetworkSpec(input_dim=2)
    masks = sample_masks(spec, "I", SamplerConfig(0.5), size=3)
    with pytest.raises(ValueError):
        estimate_empirical_rademacher(spec, "II", rng.normal(size=(3, 2)), masks, FAST)
    with pytest.raises(ValueError):
        estimate_empirical_rademacher(spec, "I", rng.normal(size=(4, 2)), masks, FAST)
    with pytest.raises(ValueError):
        EstimatorConfig(n_restarts=0)
    with pytest.raises(ValueError):
        EstimatorConfig(step_decay=1.5)


def test_summarize_single_value_has_zero_error():
    s = summarize([0.3])
    assert s.point == 0.3 and s.std_error == 0.0 and s.n_replicates == 1
    s = summarize([1.0, 3.0])
    assert s.point == 2.0 and s.std_error == pytest.approx(1.0)


def test_expected_estimate_is_reproducible():
    spec = NetworkSpec(input_dim=3, widths=(2,), budgets=(1.0, 1.0))
    a = estimate_expected_rademacher(spec, "II", sphere_sampler(3), 0.5, 10, FAST)
    b = estimate_expected_rademacher(spec, "II", sphere_sampler(3), 0.5, 10, FAST)
    assert a.values == b.values
