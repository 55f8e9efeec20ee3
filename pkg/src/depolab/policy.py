"""The simulated actor: a Bernoulli-outcome policy over prompt feature vectors.

Episodes are single-token: one success/failure draw per response, with the
success probability given by a logistic over the prompt features. Reward
equals the outcome (verifiable binary reward).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .sim_core import Prompt, binary_entropy, log_sigmoid, sigmoid


@dataclass
class PolicyState:
    """Logit-space weights over prompt features plus a step counter."""

    theta: np.ndarray
    version: int = 0

    def copy(self) -> "PolicyState":
        return PolicyState(theta=self.theta.copy(), version=self.version)


@dataclass
class RolloutGroup:
    """G binary outcomes for one prompt, with the sampling policy's logit."""

    prompt_id: int
    outcomes: np.ndarray
    old_logit: float

    @property
    def rewards(self) -> np.ndarray:
        return self.outcomes.astype(float)

    @property
    def group_size(self) -> int:
        return len(self.outcomes)


def init_policy(num_features: int, skill: float = 1.0) -> PolicyState:
    """Difficulty-aware initial actor: logit = skill * (-latent_difficulty)."""
    theta = np.zeros(num_features)
    theta[1] = skill
    return PolicyState(theta=theta, version=0)


def policy_logits(policy: PolicyState, features: np.ndarray) -> np.ndarray:
    return features @ policy.theta


def success_prob(policy: PolicyState, prompt: Prompt) -> float:
    if len(policy.theta) != len(prompt.features):
        raise ValueError(
            f"feature length mismatch: policy has {len(policy.theta)}, "
            f"prompt has {len(prompt.features)}"
        )
    return float(sigmoid(float(policy.theta @ prompt.features)))


def sample_rollouts(
    policy: PolicyState, prompt: Prompt, group_size: int, rng: np.random.Generator
) -> RolloutGroup:
    """G i.i.d. Bernoulli(success_prob) outcomes; logit recorded from the sampling policy."""
    if group_size < 1:
        raise ValueError(f"group_size must be >= 1, got {group_size}")
    logit = float(policy.theta @ prompt.features)
    p = sigmoid(logit)
    outcomes = (rng.random(group_size) < p).astype(np.int64)
    return RolloutGroup(prompt_id=prompt.id, outcomes=outcomes, old_logit=logit)


def sample_rollout_batch(
    policy: PolicyState,
    prompts: list[Prompt],
    group_size: int,
    rng: np.random.Generator,
) -> list[RolloutGroup]:
    """Batch equivalent of sample_rollouts; consumes rng in per-prompt row order.

    Logits are per-prompt vector dots (not one stacked matrix product) so the
    arithmetic is bit-identical however a regime groups its rollout calls.
    """
    if not prompts:
        return []
    logits = np.array([float(policy.theta @ p.features) for p in prompts])
    probs = sigmoid(logits)
    draws = rng.random((len(prompts), group_size))
    groups = []
    for i, prompt in enumerate(prompts):
        outcomes = (draws[i] < probs[i]).astype(np.int64)
        groups.append(RolloutGroup(prompt_id=prompt.id, outcomes=outcomes, old_logit=float(logits[i])))
    return groups


def actor_ppl_proxy(policy: PolicyState, prompt: Prompt) -> float:
    """Normalized uncertainty of the actor on a prompt: binary entropy of its success prob."""
    return float(binary_entropy(success_prob(policy, prompt)))


def log_prob(logit: float, outcome: int) -> float:
    """log-probability of a single outcome under a Bernoulli with the given logit."""
    if outcome == 1:
        return float(log_sigmoid(logit))
    return float(log_sigmoid(-logit))


def save_policy(policy: PolicyState, path) -> None:
    rec = {"version": policy.version, "theta": [float(x) for x in policy.theta]}
    Path(path).write_text(json.dumps(rec, indent=2) + "\n")


def load_policy(path) -> PolicyState:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"policy file not found: {path}")
    rec = json.loads(path.read_text())
    return PolicyState(theta=np.array(rec["theta"], dtype=float), version=int(rec["version"]))
