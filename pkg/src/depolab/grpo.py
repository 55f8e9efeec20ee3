"""Group-relative advantages, the clipped surrogate with KL penalty, and the actor step.

Conventions fixed here:
  * population standard deviation in the advantage, with a floor that routes
    uniform-reward groups to the all-zero "zero variance" branch;
  * the batch objective averages over informative (non-zero-variance) groups
    only, so zero-variance groups contribute exactly nothing;
  * at the clip boundary the min is realized by the unclipped branch, making
    the piecewise gradient deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoInformativeSamples
from .policy import PolicyState, RolloutGroup
from .sim_core import Prompt, log_sigmoid, sigmoid

# One training batch: (prompt, its rollout group, its advantage vector) triples.
Batch = list[tuple[Prompt, RolloutGroup, "AdvantageVector"]]


@dataclass(frozen=True)
class GrpoConfig:
    # learning_rate and kl_beta are sized so a 1000-step run on the default
    # J-shaped pool neither stalls nor saturates: faster rates solve the whole
    # pool within ~200 steps and collapse every training-dynamics comparison.
    clip_eps: float = 0.2
    kl_beta: float = 0.25
    learning_rate: float = 0.001
    inner_epochs: int = 2
    group_size: int = 8
    std_floor: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.clip_eps < 1.0:
            raise ConfigError(f"clip_eps must be in (0, 1), got {self.clip_eps}")
        if self.kl_beta < 0:
            raise ConfigError(f"kl_beta must be >= 0, got {self.kl_beta}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.inner_epochs < 1:
            raise ConfigError(f"inner_epochs must be >= 1, got {self.inner_epochs}")
        if self.group_size < 1:
            raise ConfigError(f"group_size must be >= 1, got {self.group_size}")
        if self.std_floor < 0:
            raise ConfigError(f"std_floor must be >= 0, got {self.std_floor}")


@dataclass
class AdvantageVector:
    values: np.ndarray
    is_zero_variance: bool


def group_advantages(rewards: np.ndarray, std_floor: float = 1e-8) -> AdvantageVector:
    """Standardize rewards against their group mean and population std."""
    rewards = np.asarray(rewards, dtype=float)
    if len(rewards) < 2:
        raise ValueError(f"group_advantages needs G >= 2 rewards, got {len(rewards)}")
    mean = rewards.mean()
    std = rewards.std()  # population std
    if std <= std_floor:
        return AdvantageVector(values=np.zeros_like(rewards), is_zero_variance=True)
    return AdvantageVector(values=(rewards - mean) / std, is_zero_variance=False)


def clipped_term(ratio: float, advantage: float, clip_eps: float) -> float:
    """min(ratio*A, clip(ratio, 1-eps, 1+eps)*A)."""
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    return float(np.minimum(ratio * advantage, clipped * advantage))


def kl_bernoulli(logit_theta: float, logit_ref: float) -> float:
    """Exact KL between Bernoullis given by their logits, stable at saturation."""
    p = sigmoid(logit_theta)
    # log p - log q and log(1-p) - log(1-q) via stable log-sigmoids
    d_pos = log_sigmoid(logit_theta) - log_sigmoid(logit_ref)
    d_neg = log_sigmoid(-logit_theta) - log_sigmoid(-logit_ref)
    return float(max(0.0, p * d_pos + (1.0 - p) * d_neg))


def _stack_batch(batch: Batch):
    feats = np.stack([prompt.features for prompt, _, _ in batch])
    outcomes = np.stack([group.outcomes for _, group, _ in batch]).astype(float)
    advantages = np.stack([adv.values for _, _, adv in batch])
    informative = np.array([not adv.is_zero_variance for _, _, adv in batch])
    return feats, outcomes, advantages, informative


def _surrogate_pieces(theta, feats, outcomes, advantages, old_logits, clip_eps):
    """Per-element surrogate values and the active-branch gradient coefficients."""
    logits = feats @ theta
    probs = sigmoid(logits)
    lp_new = outcomes * log_sigmoid(logits)[:, None] + (1 - outcomes) * log_sigmoid(-logits)[:, None]
    lp_old = (
        outcomes * log_sigmoid(old_logits)[:, None]
        + (1 - outcomes) * log_sigmoid(-old_logits)[:, None]
    )
    ratios = np.exp(lp_new - lp_old)
    unclipped = ratios * advantages
    clipped = np.clip(ratios, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    take_unclipped = unclipped <= clipped  # tie resolved toward the unclipped branch
    terms = np.where(take_unclipped, unclipped, clipped)
    # d(ratio*A)/dtheta = A * ratio * (o - p) * features; clipped branch is constant
    coef = np.where(take_unclipped, advantages * ratios * (outcomes - probs[:, None]), 0.0)
    return logits, probs, terms, coef


def grpo_objective(
    policy: PolicyState,
    old_logits: np.ndarray,
    ref: PolicyState,
    batch: Batch,
    cfg: GrpoConfig,
) -> float:
    """Scalar surrogate-minus-KL objective averaged over informative groups."""
    feats, outcomes, advantages, informative = _stack_batch(batch)
    if not informative.any():
        return 0.0
    old_logits = np.asarray(old_logits, dtype=float)
    logits, _, terms, _ = _surrogate_pieces(
        policy.theta, feats, outcomes, advantages, old_logits, cfg.clip_eps
    )
    ref_logits = feats @ ref.theta
    per_group = terms.mean(axis=1)
    if cfg.kl_beta > 0.0:
        kl = np.array([kl_bernoulli(z, zr) for z, zr in zip(logits, ref_logits)])
        per_group = per_group - cfg.kl_beta * kl
    return float(per_group[informative].mean())


def grpo_objective_grad(
    policy: PolicyState,
    old_logits: np.ndarray,
    ref: PolicyState,
    batch: Batch,
    cfg: GrpoConfig,
) -> np.ndarray:
    """Exact gradient of grpo_objective with respect to theta."""
    feats, outcomes, advantages, informative = _stack_batch(batch)
    if not informative.any():
        return np.zeros_like(policy.theta)
    old_logits = np.asarray(old_logits, dtype=float)
    logits, probs, _, coef = _surrogate_pieces(
        policy.theta, feats, outcomes, advantages, old_logits, cfg.clip_eps
    )
    group_coef = coef.mean(axis=1)
    if cfg.kl_beta > 0.0:
        # dKL/dz = (z - z_ref) * p * (1 - p) for Bernoulli logits
        ref_logits = feats @ ref.theta
        group_coef = group_coef - cfg.kl_beta * (logits - ref_logits) * probs * (1.0 - probs)
    grad = (group_coef[informative, None] * feats[informative]).mean(axis=0)
    return grad


def grpo_step(
    policy: PolicyState,
    ref: PolicyState,
    batch: Batch,
    cfg: GrpoConfig,
) -> tuple[PolicyState, dict]:
    """Run inner-epoch gradient ascent on the surrogate with frozen rollout logits.

    Returns the updated policy and a metrics fragment (mean reward, mean
    advantage magnitude, mean KL against the reference after the update).
    """
    if not batch:
        raise NoInformativeSamples("no rollout groups in batch")
    old_logits = np.array([group.old_logit for _, group, _ in batch])
    theta = policy.theta.copy()
    work = PolicyState(theta=theta, version=policy.version)
    for _ in range(cfg.inner_epochs):
        grad = grpo_objective_grad(work, old_logits, ref, batch, cfg)
        theta = theta + cfg.learning_rate * grad
        work = PolicyState(theta=theta, version=policy.version)
    updated = PolicyState(theta=theta, version=policy.version + 1)

    rewards = np.concatenate([group.rewards for _, group, _ in batch])
    advs = np.concatenate([adv.values for _, _, adv in batch])
    feats = np.stack([prompt.features for prompt, _, _ in batch])
    kls = [
        kl_bernoulli(float(f @ theta), float(f @ ref.theta))
        for f in feats
    ]
    fragment = {
        "mean_reward": float(rewards.mean()),
        "mean_adv_mag": float(np.abs(advs).mean()),
        "mean_kl": float(np.mean(kls)),
    }
    return updated, fragment


__all__ = [
    "AdvantageVector",
    "GrpoConfig",
    "NoInformativeSamples",
    "clipped_term",
    "group_advantages",
    "grpo_objective",
    "grpo_objective_grad",
    "grpo_step",
    "kl_bernoulli",
]
