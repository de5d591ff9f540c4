"""Dropout Rademacher complexity of bias-free feedforward networks."""

from .bounds import (
    BoundReport,
    LossSpec,
    generalization_bound,
    loss_lipschitz,
    output_bound,
    theoretical_complexity_bound,
)
from .estimator import (
    ComplexityEstimate,
    EstimatorConfig,
    closed_form_linear_sup,
    estimate_empirical_rademacher,
    estimate_expected_rademacher,
    sphere_sampler,
)
from .masks import DropoutType, MaskBundle, SamplerConfig, forward_dropout, sample_masks, tie_masks
from .moments import MomentQuery, moment_analytic, moment_monte_carlo
from .network import (
    ActivationInfo,
    NetworkSpec,
    WeightAssignment,
    activation_eval,
    activation_info,
    forward,
    project_weights,
    random_weights,
)

__version__ = "0.1.0"
