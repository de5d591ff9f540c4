"""Bernoulli dropout masks and the three dropout forward passes.

Type I drops units (including inputs): one 0/1 vector per layer, multiplying
the layer input.  Type II drops weights: one 0/1 vector per weight vector.
Type III does both; the unit mask of a layer is shared by all of that layer's
weight vectors.  No 1/rho rescaling is applied anywhere.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .network import ShapeError, _check_input, _single_output, check_weights


class DropoutType(str, Enum):
    I = "I"
    II = "II"
    III = "III"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown dropout type {value!r}; expected I, II or III") from None


DROPOUT_TYPES = (DropoutType.I, DropoutType.II, DropoutType.III)


def make_rng(seed, stream_id=0):
    """Generator for the stream (seed, stream_id); streams are independent."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),)))


def child_seed(seed, *keys):
    """Deterministic 63-bit seed for the sub-stream ``keys`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class SamplerConfig:
    keep_probability: float
    rng_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0.0 <= self.keep_probability <= 1.0:
            raise ValueError(f"keep probability must lie in [0, 1], got {self.keep_probability}")


@dataclass(frozen=True)
class MaskBundle:
    """0/1 masks for one dropout pass, or for a batch of passes.

    ``unit[j]`` has shape ``(*batch, in_j)`` and ``weight[j]`` shape
    ``(*batch, out_j, in_j)``.  Type I carries only ``unit``, Type II only
    ``weight``, Type III both.
    """

    dropout_type: DropoutType
    unit: tuple = None
    weight: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "dropout_type", DropoutType.parse(self.dropout_type))
        t = self.dropout_type
        if (self.unit is None) == (t in (DropoutType.I, DropoutType.III)):
            raise ValueError(f"type {t.value} bundle has wrong unit masks")
        if (self.weight is None) == (t in (DropoutType.II, DropoutType.III)):
            raise ValueError(f"type {t.value} bundle has wrong weight masks")
        for name in ("unit", "weight"):
            arrays = getattr(self, name)
            if arrays is not None:
                arrays = tuple(np.asarray(a, dtype=np.uint8) for a in arrays)
                if any(np.any(a > 1) for a in arrays):
                    raise ValueError("mask entries must be 0 or 1")
                object.__setattr__(self, name, arrays)

    @property
    def batch_shape(self):
        if self.weight is not None:
            return self.weight[0].shape[:-2]
        return self.unit[0].shape[:-1]

    def __getitem__(self, idx):
        """Select along the leading batch axes."""
        pick = lambda arrays: None if arrays is None else tuple(a[idx] for a in arrays)
        return MaskBundle(self.dropout_type, pick(self.unit), pick(self.weight))

    def arrays(self):
        return [a for group in (self.unit, self.weight) if group is not None for a in group]


def check_masks(spec, masks):
    batch = masks.batch_shape
    shapes = spec.layer_shapes
    for name, arrays, expect in (
        ("unit mask", masks.unit, [(i,) for _, i in shapes]),
        ("weight mask", masks.weight, shapes),
    ):
        if arrays is None:
            continue
        if len(arrays) != len(shapes):
            raise ShapeError(name, len(arrays), (len(shapes),), (len(arrays),))
        for j, (a, shape) in enumerate(zip(arrays, expect)):
            if a.shape != batch + tuple(shape):
                raise ShapeError(name, j, batch + tuple(shape), a.shape)


def sample_masks(spec, dropout_type, cfg, size=None):
    """Draw a MaskBundle; every entry is 1 independently with probability rho.

    ``size`` adds leading batch axes (e.g. one bundle per example).
    """
    return draw_masks(spec, dropout_type, cfg.keep_probability, make_rng(cfg.rng_seed, cfg.stream_id), size)


def draw_masks(spec, dropout_type, rho, rng, size=None):
    """Like ``sample_masks`` but consuming an existing Generator."""
    dropout_type = DropoutType.parse(dropout_type)
    batch = () if size is None else tuple(np.atleast_1d(size))

    def draw(shape):
        return (rng.random(batch + shape) < rho).astype(np.uint8)

    unit = weight = None
    if dropout_type in (DropoutType.II, DropoutType.III):
        weight = tuple(draw(shape) for shape in spec.layer_shapes)
    if dropout_type in (DropoutType.I, DropoutType.III):
        unit = tuple(draw((i,)) for _, i in spec.layer_shapes)
    return MaskBundle(dropout_type, unit, weight)


def ones_bundle(spec, dropout_type, size=None):
    return sample_masks(spec, dropout_type, SamplerConfig(1.0), size=size)


def effective_masks(masks):
    """Per-weight multipliers: weight mask times the unit mask of the layer input.

    Shapes are ``(*batch, out_j, in_j)``, or ``(*batch, 1, in_j)`` for Type I.
    """
    out = []
    for j in range(len(masks.unit if masks.unit is not None else masks.weight)):
        m = None
        if masks.unit is not None:
            m = masks.unit[j][..., None, :].astype(float)
        if masks.weight is not None:
            w = masks.weight[j].astype(float)
            m = w if m is None else w * m
        out.append(m)
    return out


def forward_dropout(spec, w, x, masks):
    """Dropout output f(w, x, r) for a single example and a single bundle."""
    check_weights(spec, w)
    _check_input(spec, x)
    check_masks(spec, masks)
    if masks.batch_shape != ():
        raise ShapeError("masks", 0, (), masks.batch_shape)
    eff = [m[None, None] for m in effective_masks(masks)]
    return _single_output(spec, w, x, eff)


def tie_masks(masks, spec):
    """Type II bundle whose weight masks in layer j all copy the Type I unit mask r^[j]."""
    if masks.dropout_type is not DropoutType.I:
        raise ValueError(f"tie_masks needs a type I bundle, got type {masks.dropout_type.value}")
    check_masks(spec, masks)
    weight = tuple(
        np.ascontiguousarray(np.broadcast_to(u[..., None, :], u.shape[:-1] + shape))
        for u, shape in zip(masks.unit, spec.layer_shapes)
    )
    return MaskBundle(DropoutType.II, None, weight)


def dump_masks(masks):
    """Debug text: one line per mask vector, entries space separated.

    Order is layer 0 upward; within a layer, weight-mask rows first, then the
    unit mask.
    """
    if masks.batch_shape != ():
        raise ValueError("dump_masks takes a single (unbatched) bundle")
    lines = [f"# dropout type {masks.dropout_type.value}"]
    for j in range(len(masks.unit if masks.unit is not None else masks.weight)):
        if masks.weight is not None:
            lines.extend(" ".join(map(str, row)) for row in masks.weight[j])
        if masks.unit is not None:
            lines.append(" ".join(map(str, masks.unit[j])))
    return "\n".join(lines) + "\n"


def parse_masks(text, spec):
    """Inverse of ``dump_masks``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header, rows = lines[0], lines[1:]
    dropout_type = DropoutType.parse(header.split()[-1])
    rows = iter(np.array(ln.split(), dtype=np.uint8) for ln in rows)
    unit, weight = [], []
    for out, _ in spec.layer_shapes:
        if dropout_type is not DropoutType.I:
            weight.append(np.stack([next(rows) for _ in range(out)]))
        if dropout_type is not DropoutType.II:
            unit.append(next(rows))
    bundle = MaskBundle(dropout_type, tuple(unit) or None, tuple(weight) or None)
    check_masks(spec, bundle)
    return bundle
