"""Desk-scale laboratory for difficulty-estimated policy optimization."""

from .errors import ConfigError, NoInformativeSamples, TrainingFault
from .estimator import (
    EstimatorLossConfig,
    EstimatorModel,
    EstimatorTarget,
    estimator_forward,
    estimator_update,
    init_estimator,
    joint_loss_and_grad,
    predict_difficulty_score,
)
from .experiment import (
    ExperimentConfig,
    RunResult,
    StepMetrics,
    load_config,
    run_ablation,
    run_compare,
    run_experiment,
    run_route,
)
from .grpo import (
    AdvantageVector,
    GrpoConfig,
    clipped_term,
    group_advantages,
    grpo_objective,
    grpo_objective_grad,
    grpo_step,
    kl_bernoulli,
)
from .policy import (
    PolicyState,
    RolloutGroup,
    actor_ppl_proxy,
    init_policy,
    log_prob,
    sample_rollouts,
    success_prob,
)
from .router import RouterConfig, RoutingReport, cascade_eval, route
from .scheduler import (
    BatchPlan,
    FilterConfig,
    dapo_dynamic_sampling,
    depo_filter,
    grpo_plain,
    make_targets,
    offline_stage_prune,
)
from .sim_core import (
    JShaped,
    Prompt,
    PromptPool,
    TwoCluster,
    Uniform,
    binary_entropy,
    generate_pool,
    load_pool,
    save_pool,
    sigmoid,
    substream,
)

__version__ = "0.1.0"
