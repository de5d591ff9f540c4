import math

import numpy as np
import pytest

from dropout_rademacher.bounds import (
    LossSpec,
    generalization_bound,
    labels_to_binary,
    loss_bound,
    loss_derivative,
    loss_lipschitz,
    loss_value,
    output_bound,
    rho_exponent,
    theoretical_complexity_bound,
)
from dropout_rademacher.network import NetworkSpec


def unit_spec(k, activation="tanh"):
    return NetworkSpec(input_dim=3, widths=(2,) * k, budgets=(1.0,) * (k + 1), activation=activation)


def test_complexity_bound_examples():
    assert theoretical_complexity_bound(unit_spec(0), "I", 0.25, 100) == pytest.approx(0.05, rel=1e-15)
    assert theoretical_complexity_bound(unit_spec(0), "III", 0.25, 100) == pytest.approx(0.025, rel=1e-15)
    assert theoretical_complexity_bound(unit_spec(2), "II", 0.25, 100) == pytest.approx(0.0125, rel=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rho_one_is_the_plain_network_bound(k):
    spec = NetworkSpec(input_dim=2, widths=(3,) * k, budgets=(2.0,) + (0.5,) * k, input_bound=1.5)
    expected = 1.5 * 2.0 * 0.5**k / math.sqrt(49)
    for t in ("I", "II"):
        assert theoretical_complexity_bound(spec, t, 1.0, 49) == pytest.approx(expected, rel=1e-15)


def test_centered_sigmoid_lipschitz_enters():
    spec = unit_spec(2, "centered_sigmoid")
    assert output_bound(spec) == 1 / 16
    assert theoretical_complexity_bound(spec, "III", 1.0, 1) == 1 / 16


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("t", ["I", "II", "III"])
def test_two_point_log_ratio_is_the_exponent(k, t):
    spec = unit_spec(k)
    a = theoretical_complexity_bound(spec, t, 0.2, 50)
    b = theoretical_complexity_bound(spec, t, 0.8, 50)
    expected = (k + 1) if t == "III" else (k + 1) / 2
    assert rho_exponent(k, t) == expected
    assert math.log(b / a) / math.log(4.0) == pytest.approx(expected, rel=1e-12)


def test_output_bound_examples():
    assert output_bound(NetworkSpec(input_dim=2, budgets=(2.0,), input_bound=3.0)) == 6.0
    assert output_bound(unit_spec(1)) == 1.0


def test_loss_lipschitz_examples():
    assert loss_lipschitz(LossSpec("cross_entropy_sigmoid"), 5.0) == 1.0
    assert loss_lipschitz(LossSpec("square", y_bound=1.0), 1.0) == 4.0
    assert loss_lipschitz(LossSpec("square", y_bound=0.0), 0.0) == 0.0


def test_generalization_bound_examples():
    spec = unit_spec(0)
    delta = 2 * math.exp(-4)
    r2 = generalization_bound(0.0, 0.0, LossSpec(), spec, delta, 100, "expected", loss_bound_override=1.0)
    assert r2.total_bound == pytest.approx(0.2, rel=1e-14)
    r1 = generalization_bound(0.0, 0.0, LossSpec(), spec, delta, 100, "empirical", loss_bound_override=1.0)
    assert r1.total_bound == pytest.approx(0.6, rel=1e-14)
    sq = generalization_bound(0.1, 0.05, LossSpec("square", y_bound=1.0), unit_spec(1), 0.05, 100)
    assert sq.loss_bound == 4.0
    assert sq.total_bound == pytest.approx(0.1 + 2 * 4 * 0.05 + 4 * math.sqrt(math.log(40) / 100))


def test_generalization_bound_validation():
    with pytest.raises(ValueError):
        generalization_bound(0, 0, LossSpec(), unit_spec(0), 1.0, 10)
    with pytest.raises(ValueError):
        generalization_bound(0, -1, LossSpec(), unit_spec(0), 0.1, 10)
    with pytest.raises(ValueError):
        generalization_bound(0, 0, LossSpec(), unit_spec(0), 0.1, 10, variant="other")


def test_entropy_loss_bounded_by_clamp():
    loss = LossSpec("cross_entropy_sigmoid", p_min=1e-3)
    f = np.linspace(-50, 50, 1001)
    for y in (0.0, 1.0):
        assert np.all(loss_value(loss, f, y) <= loss_bound(loss, 0.0) + 1e-12)
        assert np.all(np.abs(loss_derivative(loss, f, y)) <= 1.0)


@pytest.mark.parametrize("kind", ["square", "cross_entropy_sigmoid"])
def test_loss_derivative_finite_difference(kind):
    loss = LossSpec(kind)
    f = np.linspace(-2, 2, 9) + 0.013
    h = 1e-6
    for y in (0.0, 1.0):
        fd = (loss_value(loss, f + h, y) - loss_value(loss, f - h, y)) / (2 * h)
        np.testing.assert_allclose(loss_derivative(loss, f, y), fd, rtol=1e-6, atol=1e-9)


def test_labels_to_binary():
    np.testing.assert_array_equal(labels_to_binary([-1, 1, 1, -1]), [0, 1, 1, 0])


def test_bad_inputs():
    with pytest.raises(ValueError):
        theoretical_complexity_bound(unit_spec(0), "I", 1.5, 10)
    with pytest.raises(ValueError):
        theoretical_complexity_bound(unit_spec(0), "I", 0.5, 0)
    with pytest.raises(ValueError):
        LossSpec("hinge")
