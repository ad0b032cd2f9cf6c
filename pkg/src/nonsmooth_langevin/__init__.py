"""Langevin sampling for non-smooth composite targets pi = exp(-F - G o K).

Samplers driven by subgradients or proximal maps of the non-smooth part,
exact discrete transport distances for evaluating them, the matching
theoretical error bounds, and a config-driven experiment runner.
"""

from .bounds import (
    RegularityConstants,
    constants_from_model,
    kl_bound_general,
    kl_bound_strong,
    phi,
    w2_bound_strong,
    w2_bound_varying,
    w2_bound_varying_curve,
)
from .cli import ExperimentConfig, config_from_dict, load_config, run_experiment
from .estimation import (
    DiscreteDistribution,
    Grid2D,
    MomentAccumulator,
    histogram,
    mixture_average,
    validate_weight_schedule,
)
from .images import (
    edge_masks,
    gaussian_kernel,
    make_synthetic_data,
    phantom_image,
    read_image_pgm,
    write_image_pgm,
)
from .linops import (
    Conv2D,
    Difference2D,
    Grad2D,
    Identity,
    LinearOperator,
    power_iteration_norm_sq,
)
from .metrics import (
    discretize_target,
    kl_discrete,
    mean_error_bound_check,
    pinsker_check,
    tv_discrete,
    w2_exact,
)
from .potentials import (
    GSpec,
    Model,
    NonsmoothF,
    ProxSolverError,
    SmoothF,
    eval_U,
    grad_F,
    moreau_grad,
    moreau_value,
    prox_F,
    prox_FGK_pd,
    prox_GK_pd,
    subgrad_F,
    subgrad_G_select,
)
from .samplers import (
    ALGORITHMS,
    EnsembleResult,
    SamplerConfig,
    StepSchedule,
    check_step_caps,
    run_ensemble,
    select_eps_params,
    step_size_cap,
)
from .transport import transport_cost

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "Conv2D",
    "Difference2D",
    "DiscreteDistribution",
    "EnsembleResult",
    "ExperimentConfig",
    "GSpec",
    "Grad2D",
    "Grid2D",
    "Identity",
    "LinearOperator",
    "Model",
    "MomentAccumulator",
    "NonsmoothF",
    "ProxSolverError",
    "RegularityConstants",
    "SamplerConfig",
    "SmoothF",
    "StepSchedule",
    "check_step_caps",
    "config_from_dict",
    "constants_from_model",
    "discretize_target",
    "edge_masks",
    "eval_U",
    "gaussian_kernel",
    "grad_F",
    "histogram",
    "kl_bound_general",
    "kl_bound_strong",
    "kl_discrete",
    "load_config",
    "make_synthetic_data",
    "mean_error_bound_check",
    "mixture_average",
    "moreau_grad",
    "moreau_value",
    "phantom_image",
    "phi",
    "pinsker_check",
    "power_iteration_norm_sq",
    "prox_F",
    "prox_FGK_pd",
    "prox_GK_pd",
    "read_image_pgm",
    "run_ensemble",
    "run_experiment",
    "select_eps_params",
    "step_size_cap",
    "subgrad_F",
    "subgrad_G_select",
    "transport_cost",
    "tv_discrete",
    "validate_weight_schedule",
    "w2_bound_strong",
    "w2_bound_varying",
    "w2_bound_varying_curve",
    "w2_exact",
    "write_image_pgm",
]
