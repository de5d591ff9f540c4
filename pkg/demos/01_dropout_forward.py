"""
Dropout forward passes
======================

The three dropout types differ only in where the 0/1 masks sit: on the
units feeding a layer (I), on every single weight (II), or on both (III).
"""

import numpy as np

from dropout_rademacher import NetworkSpec, random_weights, forward
from dropout_rademacher.masks import SamplerConfig, dump_masks, forward_dropout, sample_masks, tie_masks

spec = NetworkSpec(input_dim=3, widths=(2,), budgets=(1.0, 1.0), activation="tanh")
rng = np.random.default_rng(0)
w = random_weights(spec, rng)
x = np.array([0.6, -0.8, 0.0])
print("no dropout:", forward(spec, w, x))

# one mask bundle per type, keep probability 0.5
for t in ("I", "II", "III"):
    masks = sample_masks(spec, t, SamplerConfig(0.5, rng_seed=1))
    print(dump_masks(masks), "output:", forward_dropout(spec, w, x, masks), "\n")

# a type I bundle is a type II bundle whose weight masks repeat the unit mask
unit = sample_masks(spec, "I", SamplerConfig(0.5, rng_seed=3))
tied = tie_masks(unit, spec)
print("type I:", forward_dropout(spec, w, x, unit), " tied type II:", forward_dropout(spec, w, x, tied))

# masks that keep everything reproduce the plain network exactly
print("rho = 1:", forward_dropout(spec, w, x, sample_masks(spec, "III", SamplerConfig(1.0))))
