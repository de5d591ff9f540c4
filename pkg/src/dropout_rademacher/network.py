"""Bias-free fully connected networks with norm-constrained weight vectors.

Layer ``j`` (``0 <= j <= k``) is stored as a matrix of shape ``(out_j, in_j)``
whose rows are the weight vectors of that layer.  ``in_0 = d``,
``in_j = m_j`` and ``out_j = m_{j+1}`` for ``j < k``; the top layer ``k`` has a
single row.  Rows of layer 0 live in an L2 ball of radius ``B_0``; rows of every
other layer live in an L1 ball of radius ``B_j``.  For ``k = 0`` the single
linear weight vector is layer 0 and is therefore L2 constrained.
"""

from dataclasses import dataclass, field

import numpy as np

from .projection import project_l1_ball, project_l2_ball

ACTIVATION_KINDS = ("tanh", "centered_sigmoid", "relu", "identity")

_LIPSCHITZ = {"tanh": 1.0, "centered_sigmoid": 0.25, "relu": 1.0, "identity": 1.0}


class ShapeError(ValueError):
    """Raised when weights, masks or inputs disagree with a NetworkSpec."""

    def __init__(self, what, layer, expected, actual):
        self.what = what
        self.layer = layer
        self.expected = tuple(expected)
        self.actual = tuple(actual)
        super().__init__(
            f"{what}: layer {layer} expected shape {self.expected}, got {self.actual}"
        )


@dataclass(frozen=True)
class ActivationInfo:
    kind: str
    lipschitz: float
    value_at_zero: float = 0.0


def activation_info(kind):
    if kind not in _LIPSCHITZ:
        raise ValueError(f"unknown activation {kind!r}; expected one of {ACTIVATION_KINDS}")
    return ActivationInfo(kind=kind, lipschitz=_LIPSCHITZ[kind], value_at_zero=0.0)


def activation_eval(info, t):
    """Evaluate the activation elementwise.  Every supported kind maps 0 to 0."""
    kind = info.kind if isinstance(info, ActivationInfo) else info
    t = np.asarray(t, dtype=float)
    if kind == "tanh":
        out = np.tanh(t)
    elif kind == "centered_sigmoid":
        # 1/(1+e^{-t}) - 1/2 == tanh(t/2)/2, which is exactly 0 at 0 and stable
        out = 0.5 * np.tanh(0.5 * t)
    elif kind == "relu":
        out = np.maximum(t, 0.0)
    elif kind == "identity":
        out = t.copy()
    else:
        raise ValueError(f"unknown activation {kind!r}")
    return out if out.ndim else float(out)


def activation_derivative(info, t):
    """Derivative of the activation; the relu subgradient at 0 is taken as 0."""
    kind = info.kind if isinstance(info, ActivationInfo) else info
    t = np.asarray(t, dtype=float)
    if kind == "tanh":
        return 1.0 - np.tanh(t) ** 2
    if kind == "centered_sigmoid":
        return 0.25 * (1.0 - np.tanh(0.5 * t) ** 2)
    if kind == "relu":
        return (t > 0).astype(float)
    if kind == "identity":
        return np.ones_like(t)
    raise ValueError(f"unknown activation {kind!r}")


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture and norm budgets of a bias-free feedforward network.

    Parameters
    ----------
    input_dim : int
        Input dimension d.
    widths : tuple of int
        Hidden widths m_1..m_k; empty for the linear (k = 0) model.
    budgets : tuple of float
        k + 1 budgets.  ``budgets[0]`` is the L2 radius for layer-0 weight
        vectors, ``budgets[j]`` (j >= 1) the L1 radius for layer-j vectors.
    activation : str
        One of ``ACTIVATION_KINDS``.
    input_bound : float
        L2 bound on inputs.
    """

    input_dim: int
    widths: tuple = ()
    budgets: tuple = (1.0,)
    activation: str = "tanh"
    input_bound: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(m) for m in self.widths))
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if any(m < 1 for m in self.widths):
            raise ValueError("all hidden widths must be >= 1")
        if len(self.budgets) != len(self.widths) + 1:
            raise ValueError(
                f"need {len(self.widths) + 1} norm budgets for k={len(self.widths)}, "
                f"got {len(self.budgets)}"
            )
        if any(not b > 0 for b in self.budgets):
            raise ValueError("norm budgets must be > 0")
        if not self.input_bound > 0:
            raise ValueError("input_bound must be > 0")
        activation_info(self.activation)

    @property
    def hidden_layers(self):
        return len(self.widths)

    @property
    def lipschitz(self):
        return _LIPSCHITZ[self.activation]

    @property
    def activation_info(self):
        return activation_info(self.activation)

    @property
    def layer_shapes(self):
        units = (self.input_dim,) + self.widths
        return [
            (units[j + 1] if j < self.hidden_layers else 1, units[j])
            for j in range(self.hidden_layers + 1)
        ]

    def with_depth(self, k, width=None):
        """Spec of the same family with ``k`` hidden layers.

        Widths repeat ``width`` (default: first hidden width, or 1); budgets
        keep ``B_0`` and reuse the last available hidden budget for deeper layers.
        """
        if width is None:
            width = self.widths[0] if self.widths else 1
        hidden = self.budgets[1:] or (1.0,)
        budgets = (self.budgets[0],) + tuple(hidden[min(j, len(hidden) - 1)] for j in range(k))
        return NetworkSpec(
            input_dim=self.input_dim,
            widths=(width,) * k,
            budgets=budgets,
            activation=self.activation,
            input_bound=self.input_bound,
        )


@dataclass(frozen=True)
class WeightAssignment:
    """Concrete weights; ``layers[j]`` has shape ``spec.layer_shapes[j]``."""

    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(
            self, "layers", tuple(np.array(w, dtype=float) for w in self.layers)
        )
        for w in self.layers:
            w.setflags(write=False)

    def flat(self):
        return np.concatenate([w.ravel() for w in self.layers])

    @classmethod
    def from_flat(cls, spec, theta):
        theta = np.asarray(theta, dtype=float)
        layers, start = [], 0
        for shape in spec.layer_shapes:
            size = shape[0] * shape[1]
            layers.append(theta[start:start + size].reshape(shape))
            start += size
        if start != theta.size:
            raise ValueError(f"expected {start} parameters, got {theta.size}")
        return cls(tuple(layers))


def check_weights(spec, w):
    layers = w.layers if isinstance(w, WeightAssignment) else tuple(w)
    if len(layers) != spec.hidden_layers + 1:
        raise ShapeError("weights", len(layers), (spec.hidden_layers + 1,), (len(layers),))
    for j, (layer, shape) in enumerate(zip(layers, spec.layer_shapes)):
        if np.shape(layer) != shape:
            raise ShapeError("weights", j, shape, np.shape(layer))


def _check_input(spec, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (spec.input_dim,):
        raise ShapeError("input", 0, (spec.input_dim,), x.shape)
    return x


def layer_radii(spec):
    """(norm, radius) per layer: L2 for layer 0, L1 above."""
    return [("l2" if j == 0 else "l1", b) for j, b in enumerate(spec.budgets)]


def project_layers(spec, layers):
    """Project every weight vector of (possibly batched) layer arrays."""
    out = []
    for layer, (norm, radius) in zip(layers, layer_radii(spec)):
        proj = project_l2_ball if norm == "l2" else project_l1_ball
        out.append(proj(layer, radius))
    return out


def project_weights(w, spec):
    """Euclidean projection of each weight vector onto its feasible ball."""
    check_weights(spec, w)
    return WeightAssignment(tuple(project_layers(spec, w.layers)))


def is_feasible(spec, w, rtol=1e-9):
    for layer, (norm, radius) in zip(w.layers, layer_radii(spec)):
        ord_ = 2 if norm == "l2" else 1
        if np.any(np.linalg.norm(layer, ord=ord_, axis=-1) > radius * (1 + rtol)):
            return False
    return True


def sample_boundary(rng, shape, norm, radius):
    """Uniform samples on the L2 sphere or the L1 sphere of `radius`."""
    if norm == "l2":
        g = rng.standard_normal(shape)
        n = np.linalg.norm(g, axis=-1, keepdims=True)
        return radius * g / np.where(n > 0, n, 1.0)
    e = rng.standard_exponential(shape)
    signs = rng.choice((-1.0, 1.0), size=shape)
    return radius * signs * e / np.sum(e, axis=-1, keepdims=True)


def random_weights(spec, rng, scale=1.0, batch=()):
    """Weights drawn uniformly on the boundaries of the feasible balls, times `scale`."""
    layers = [
        scale * sample_boundary(rng, tuple(batch) + shape, norm, radius)
        for shape, (norm, radius) in zip(spec.layer_shapes, layer_radii(spec))
    ]
    return layers if batch else WeightAssignment(tuple(layers))


def ones_masks(spec):
    return tuple(np.ones((1, 1) + shape) for shape in spec.layer_shapes)


def _masked_inputs(M, psi):
    # Q[p, n, a, b] = M[p, n, a, b] * psi[p, n, b]; leading axes may be 1
    return M * psi[..., None, :]


def _apply(W, Q, n):
    """z[p, n, a] = sum_b W[p, a, b] Q[p, n, a, b]."""
    P, a, b = W.shape
    if Q.shape[0] == 1:
        # shared across problems: one (P x b) @ (b x n) product per output unit
        # contiguous copy so the summation order does not depend on the mask layout
        Qt = np.ascontiguousarray(np.broadcast_to(Q[0], (n, a, b)).transpose(1, 2, 0))
        return np.matmul(W.transpose(1, 0, 2), Qt).transpose(1, 2, 0)
    return np.einsum("pab,pnab->pna", W, np.broadcast_to(Q, (P, n, a, b)))


def _weight_grad(dz, Q):
    """g[p, a, b] = sum_n dz[p, n, a] Q[p, n, a, b]."""
    P, n, a = dz.shape
    b = Q.shape[-1]
    if Q.shape[0] == 1:
        Qt = np.ascontiguousarray(np.broadcast_to(Q[0], (n, a, b)).transpose(1, 0, 2))
        return np.matmul(dz.transpose(2, 0, 1), Qt).transpose(1, 0, 2)
    return np.einsum("pna,pnab->pab", dz, np.broadcast_to(Q, (P, n, a, b)))


def propagate(spec, layers, X, masks):
    """Batched dropout forward pass.

    Parameters
    ----------
    layers : list of arrays, shape (P, out_j, in_j)
        P independent weight settings evaluated in parallel.
    X : array, shape (n, d)
    masks : list of arrays, shape (P or 1, n, out_j or 1, in_j)
        Effective 0/1 masks multiplying each weight for each example.

    Returns the outputs, shape (P, n), and the cache used by ``backprop``.
    """
    act = spec.activation
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    psi = X[None]
    cache = []
    k = spec.hidden_layers
    for j, (W, M) in enumerate(zip(layers, masks)):
        Q = _masked_inputs(M, psi)
        z = _apply(W, Q, n)
        cache.append((Q, z))
        if j < k:
            psi = activation_eval(act, z)
    return cache[-1][1][..., 0], cache


def backprop(spec, layers, masks, cache, coeffs):
    """Gradient of ``sum_e coeffs[p, e] * f_p(x_e)`` with respect to each layer.

    ``coeffs`` has shape (P, n); returns arrays shaped like ``layers``.
    """
    grads = [None] * len(layers)
    dz = np.asarray(coeffs, dtype=float)[..., None]
    for j in range(len(layers) - 1, -1, -1):
        Q, _ = cache[j]
        grads[j] = _weight_grad(dz, Q)
        if j > 0:
            dpsi = np.einsum("pnab,pab->pnb", dz[..., None] * masks[j], layers[j])
            dz = dpsi * activation_derivative(spec.activation, cache[j - 1][1])
    return grads


def forward(spec, w, x):
    """Dropout-free output f(w, x) = <w^[k]_1, Psi_k>."""
    return _single_output(spec, w, x, ones_masks(spec))


def _single_output(spec, w, x, masks):
    check_weights(spec, w)
    x = _check_input(spec, x)
    if x.ndim != 1:
        raise ShapeError("input", 0, (spec.input_dim,), x.shape)
    layers = [layer[None] for layer in w.layers]
    out, _ = propagate(spec, layers, x[None], masks)
    return float(out[0, 0])
