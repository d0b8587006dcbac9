"""Online learning of neural nets with low-rank square-root filters.

The package keeps a Gaussian belief over network parameters, updates it
one observation at a time through square-root Kalman recursions whose
cost is linear in the parameter count, and exposes the closed-form
posterior predictive that downstream bandit and Bayesian-optimization
policies act on.
"""

from .bench import (
    ConfigError,
    ExperimentConfig,
    StepRecord,
    default_config,
    load_config,
    make_rng,
    run,
    validate_config,
)
from .bounds import hilofi_cov_bound, lrkf_blup_gap_bound, lrkf_cov_bound
from .decision import (
    BoxDomain,
    DiscreteActions,
    bo_propose,
    epsilon_greedy_action,
    expected_improvement,
    lowdisc_candidates,
    predictive_sample_action,
    thompson_sample_action,
)
from .environments import (
    BoFunction,
    DatasetExhausted,
    MnistBandit,
    SyntheticBandit,
    ackley,
    bandit_context,
    bandit_reward,
    bo_eval,
    branin,
    drawnn,
    hartmann6,
    inbetween_dataset,
    load_mnist_idx,
    mnist_paths,
    resolve_data_dir,
)
from .filters import (
    DenseBelief,
    GaussianPredictive,
    HiLoFiBelief,
    LoLoFiBelief,
    LrkfBelief,
    NoiseConfig,
    UpdateGains,
    classification_step,
    dense_predict_update,
    hilofi_step,
    init_dense,
    init_hilofi,
    init_lolofi,
    init_lrkf,
    load_belief,
    lolofi_step,
    lrkf_step,
    moment_matched_obs,
    predictive,
    sample_function,
    save_belief,
    softmax,
    spec_hash,
    update_obs,
)
from .linalg import lowrank_project, lowrank_project_inflated, qr_stack, tri_solve_gram
from .net import (
    FlatParams,
    JacobianPair,
    NetworkSpec,
    forward,
    forward_batch,
    init_params,
    jacobians,
    jvp_params,
    param_counts,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "StepRecord",
    "default_config",
    "load_config",
    "make_rng",
    "run",
    "validate_config",
    "hilofi_cov_bound",
    "lrkf_blup_gap_bound",
    "lrkf_cov_bound",
    "BoxDomain",
    "DiscreteActions",
    "bo_propose",
    "epsilon_greedy_action",
    "expected_improvement",
    "lowdisc_candidates",
    "predictive_sample_action",
    "thompson_sample_action",
    "BoFunction",
    "DatasetExhausted",
    "MnistBandit",
    "SyntheticBandit",
    "ackley",
    "bandit_context",
    "bandit_reward",
    "bo_eval",
    "branin",
    "drawnn",
    "hartmann6",
    "inbetween_dataset",
    "load_mnist_idx",
    "mnist_paths",
    "resolve_data_dir",
    "DenseBelief",
    "GaussianPredictive",
    "HiLoFiBelief",
    "LoLoFiBelief",
    "LrkfBelief",
    "NoiseConfig",
    "UpdateGains",
    "classification_step",
    "dense_predict_update",
    "hilofi_step",
    "init_dense",
    "init_hilofi",
    "init_lolofi",
    "init_lrkf",
    "load_belief",
    "lolofi_step",
    "lrkf_step",
    "moment_matched_obs",
    "predictive",
    "sample_function",
    "save_belief",
    "softmax",
    "spec_hash",
    "update_obs",
    "lowrank_project",
    "lowrank_project_inflated",
    "qr_stack",
    "tri_solve_gram",
    "FlatParams",
    "JacobianPair",
    "NetworkSpec",
    "forward",
    "forward_batch",
    "init_params",
    "jacobians",
    "jvp_params",
    "param_counts",
    "__version__",
]
