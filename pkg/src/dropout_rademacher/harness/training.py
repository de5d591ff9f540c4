"""SGD with dropout and the synthetic generalization-gap experiment.

The synthetic data (teacher network plus clipped Gaussian noise, inputs on a
sphere) is a design of this package, chosen only to exercise the risk bound.
"""

from dataclasses import dataclass, field

import numpy as np

from ..bounds import LossSpec, generalization_bound, loss_derivative, loss_value, theoretical_complexity_bound
from ..estimator import sphere_sampler
from ..masks import DropoutType, draw_masks, effective_masks, make_rng
from ..network import WeightAssignment, backprop, ones_masks, project_layers, propagate, random_weights


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.05
    batch_size: int = 1
    loss: LossSpec = field(default_factory=LossSpec)
    n_train: int = 100
    n_test: int = 10_000
    dropout_type: str = "II"
    keep_probability: float = 0.5
    init_scale: float = 0.5
    noise: float = 0.1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.keep_probability <= 1.0:
            raise ValueError("keep_probability must lie in [0, 1]")
        if self.dropout_type is not None:
            object.__setattr__(self, "dropout_type", DropoutType.parse(self.dropout_type).value)

    @property
    def effective_type(self):
        """Dropout type used for bounds; plain training counts as type I with rho = 1."""
        return self.dropout_type or "I"

    @property
    def effective_rho(self):
        return 1.0 if self.dropout_type is None else self.keep_probability


class TrainingDivergence(FloatingPointError):
    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


def _masks_for(spec, tcfg, rng, size):
    if tcfg.dropout_type is None:
        return list(ones_masks(spec))
    bundle = draw_masks(spec, tcfg.dropout_type, tcfg.keep_probability, rng, size)
    return [m[None] for m in effective_masks(bundle)]


def dropout_outputs(spec, w, X, masks):
    layers = [layer[None] for layer in (w.layers if isinstance(w, WeightAssignment) else w)]
    out, _ = propagate(spec, layers, X, masks)
    return out[0]


def dropout_risk(spec, w, X, y, tcfg, rng):
    """Mean loss with one fresh mask bundle per example."""
    masks = _masks_for(spec, tcfg, rng, len(X))
    return float(np.mean(loss_value(tcfg.loss, dropout_outputs(spec, w, X, masks), y)))


def train_with_dropout(spec, data, tcfg, seed=0):
    """Minibatch SGD where every example in every step gets a fresh mask bundle.

    Weights are projected onto the feasible balls at the end of each epoch.
    Returns the final weights and the train risk after each epoch.
    """
    X, y = (np.asarray(a, dtype=float) for a in data)
    if len(X) == 0:
        raise ValueError("training data is empty")
    if X.shape[1] != spec.input_dim:
        raise ValueError(f"inputs have dimension {X.shape[1]}, network expects {spec.input_dim}")
    init_rng, order_rng, mask_rng, eval_rng = (make_rng(seed, s) for s in range(4))
    layers = [layer[None] for layer in random_weights(spec, init_rng, scale=tcfg.init_scale).layers]
    trajectory = []
    for epoch in range(tcfg.epochs):
        order = order_rng.permutation(len(X))
        for start in range(0, len(X), tcfg.batch_size):
            idx = order[start:start + tcfg.batch_size]
            masks = _masks_for(spec, tcfg, mask_rng, len(idx))
            out, cache = propagate(spec, layers, X[idx], masks)
            coeffs = loss_derivative(tcfg.loss, out, y[idx][None]) / len(idx)
            grads = backprop(spec, layers, masks, cache, coeffs)
            layers = [w - tcfg.learning_rate * g for w, g in zip(layers, grads)]
        layers = project_layers(spec, layers)
        w = WeightAssignment(tuple(layer[0] for layer in layers))
        risk = dropout_risk(spec, w, X, y, tcfg, eval_rng)
        trajectory.append(risk)
        if not np.isfinite(risk):
            raise TrainingDivergence(f"non-finite train risk at epoch {epoch}", trajectory)
    return WeightAssignment(tuple(layer[0] for layer in layers)), trajectory


def synthetic_regression(spec, tcfg, rng, n, teacher):
    """Inputs on the sphere of radius Bhat, targets from a teacher network plus noise."""
    X = sphere_sampler(spec.input_dim, spec.input_bound)(rng, n)
    clean = dropout_outputs(spec, teacher, X, list(ones_masks(spec)))
    y = np.clip(clean + tcfg.noise * rng.standard_normal(n), -tcfg.loss.y_bound, tcfg.loss.y_bound)
    return X, y


def bound_check(spec, w, train, test, tcfg, delta, rng):
    """Empirical dropout risk, held-out risk, and the expected-complexity risk bound."""
    emp = dropout_risk(spec, w, *train, tcfg, rng)
    held_out = dropout_risk(spec, w, *test, tcfg, rng)
    n = len(train[0])
    complexity = theoretical_complexity_bound(spec, tcfg.effective_type, tcfg.effective_rho, n)
    report = generalization_bound(
        emp, complexity, tcfg.loss, spec, delta, n, "expected", rho=tcfg.effective_rho
    )
    return {
        "empirical_risk": emp,
        "held_out_risk": held_out,
        "bound": report.total_bound,
        "complexity_bound": complexity,
        "holds": bool(held_out <= report.total_bound),
    }


def gap_trial(spec, tcfg, delta, seed):
    data_rng = make_rng(seed, 10)
    teacher = random_weights(spec, make_rng(seed, 11))
    train = synthetic_regression(spec, tcfg, data_rng, tcfg.n_train, teacher)
    test = synthetic_regression(spec, tcfg, data_rng, tcfg.n_test, teacher)
    w, trajectory = train_with_dropout(spec, train, tcfg, seed=seed)
    record = bound_check(spec, w, train, test, tcfg, delta, make_rng(seed, 12))
    record["final_train_risk"] = trajectory[-1]
    return record
