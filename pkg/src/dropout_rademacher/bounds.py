"""Closed-form complexity bounds, losses, and generalization-bound assembly."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .masks import DropoutType

LOSS_KINDS = ("cross_entropy_sigmoid", "square")


@dataclass(frozen=True)
class LossSpec:
    """Loss function.  Entropy-loss labels are in {0, 1}; the sigmoid output is
    clamped to [p_min, 1 - p_min] so the loss is bounded by ln(1/p_min)."""

    kind: str = "square"
    y_bound: float = 1.0
    p_min: float = 1e-6

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.kind!r}; expected one of {LOSS_KINDS}")
        if not 0 < self.p_min < 0.5:
            raise ValueError("p_min must lie in (0, 0.5)")
        if not self.y_bound >= 0:
            raise ValueError("y_bound must be >= 0")


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(t, dtype=float)))


def loss_value(loss, f, y):
    f = np.asarray(f, dtype=float)
    y = np.asarray(y, dtype=float)
    if loss.kind == "square":
        return (y - f) ** 2
    p = np.clip(_sigmoid(f), loss.p_min, 1.0 - loss.p_min)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))


def loss_derivative(loss, f, y):
    """d loss / d f.  For the clamped entropy loss it is zero where the clamp is active."""
    f = np.asarray(f, dtype=float)
    y = np.asarray(y, dtype=float)
    if loss.kind == "square":
        return 2.0 * (f - y)
    p = _sigmoid(f)
    inside = (p > loss.p_min) & (p < 1.0 - loss.p_min)
    return np.where(inside, p - y, 0.0)


def labels_to_binary(y):
    """Map {-1, +1} labels to {0, 1}."""
    return (np.asarray(y) > 0).astype(float)


def _check_rho_n(rho, n):
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")


def output_bound(spec):
    """L^k * Bhat * prod_j B_j, a bound on |f(w, x, r)| over the feasible set."""
    k = spec.hidden_layers
    return spec.lipschitz ** k * spec.input_bound * math.prod(spec.budgets)


def rho_exponent(k, dropout_type):
    """Exponent of rho in the theoretical complexity bound."""
    dropout_type = DropoutType.parse(dropout_type)
    if dropout_type is DropoutType.III:
        return float(k + 1)
    return (k + 1) / 2.0


def theoretical_complexity_bound(spec, dropout_type, rho, n):
    """Upper bound on the expected dropout Rademacher complexity.

    k = 0:  B Bhat sqrt(rho/n) for types I/II and B Bhat rho/sqrt(n) for III.
    k >= 1: L^k Bhat prod_j B_j rho^((k+1)/2) / sqrt(n) for I/II and with rho^(k+1) for III.
    """
    _check_rho_n(rho, n)
    p = rho_exponent(spec.hidden_layers, dropout_type)
    return output_bound(spec) * rho ** p / math.sqrt(n)


def loss_lipschitz(loss, f_bound):
    if f_bound < 0:
        raise ValueError("f_bound must be >= 0")
    if loss.kind == "cross_entropy_sigmoid":
        return 1.0
    return 2.0 * (loss.y_bound + f_bound)


def loss_bound(loss, f_bound):
    if loss.kind == "square":
        return (loss.y_bound + f_bound) ** 2
    return math.log(1.0 / loss.p_min)


@dataclass(frozen=True)
class BoundReport:
    complexity_bound: float
    loss_lipschitz: float
    loss_bound: float
    mcdiarmid_term: float
    total_bound: float
    variant: str
    empirical_risk: float
    rho: float
    n: int
    delta: float
    budgets: tuple
    input_bound: float

    def as_record(self):
        rec = asdict(self)
        rec["budgets"] = list(self.budgets)
        return rec


def generalization_bound(
    empirical_risk,
    complexity_quantity,
    loss,
    spec,
    delta,
    n,
    variant="expected",
    rho=float("nan"),
    loss_bound_override=None,
):
    """Risk bound holding with probability >= 1 - delta.

    ``variant='expected'`` uses the expected complexity and one deviation term;
    ``variant='empirical'`` uses the empirical complexity and three.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if complexity_quantity < 0:
        raise ValueError("complexity_quantity must be >= 0")
    if variant not in ("expected", "empirical"):
        raise ValueError(f"unknown variant {variant!r}")
    f_bound = output_bound(spec)
    lip = loss_lipschitz(loss, f_bound)
    B = loss_bound(loss, f_bound) if loss_bound_override is None else float(loss_bound_override)
    c = 1.0 if variant == "expected" else 3.0
    deviation = c * B * math.sqrt(math.log(2.0 / delta) / n)
    total = empirical_risk + 2.0 * lip * complexity_quantity + deviation
    return BoundReport(
        complexity_bound=float(complexity_quantity),
        loss_lipschitz=lip,
        loss_bound=B,
        mcdiarmid_term=deviation,
        total_bound=total,
        variant=variant,
        empirical_risk=float(empirical_risk),
        rho=float(rho),
        n=int(n),
        delta=float(delta),
        budgets=spec.budgets,
        input_bound=spec.input_bound,
    )
