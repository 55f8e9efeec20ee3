"""Batch assembly for the four training regimes.

All regimes walk the same per-step candidate permutation, so matched-seed runs
see identical candidate streams until a regime's own filtering diverges:
  * plain batches keep the first B candidates;
  * score filtering drops candidates outside the keep band before any rollout;
  * dynamic oversampling rolls out candidates and discards uniform-reward
    groups after the fact, up to an oversampling budget;
  * staged pruning periodically re-evaluates the whole pool and removes
    prompts outside a retention band.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .estimator import EstimatorModel, EstimatorTarget, predict_difficulty_score
from .policy import PolicyState, RolloutGroup, actor_ppl_proxy, sample_rollout_batch
from .sim_core import PromptPool

REGIMES = ("grpo", "depo", "dapo", "offline")


@dataclass(frozen=True)
class FilterConfig:
    warmup_steps: int = 100
    keep_low: float = 1.0 / 16.0
    keep_high: float = 15.0 / 16.0
    enabled: bool = True
    refill: bool = False

    def __post_init__(self):
        if self.warmup_steps < 0:
            raise ConfigError(f"warmup_steps must be >= 0, got {self.warmup_steps}")
        if not 0.0 < self.keep_low < 1.0:
            raise ConfigError(f"keep_low must be in (0, 1), got {self.keep_low}")
        if not 0.0 < self.keep_high < 1.0:
            raise ConfigError(f"keep_high must be in (0, 1), got {self.keep_high}")
        if self.keep_low >= self.keep_high:
            raise ConfigError(
                f"keep_low must be < keep_high, got {self.keep_low} >= {self.keep_high}"
            )


@dataclass
class BatchPlan:
    regime: str
    kept: list[int]
    dropped: list[int]
    candidates_seen: int
    short_batch: bool = False

    @property
    def filter_ratio(self) -> float:
        if self.candidates_seen == 0:
            return 0.0
        return len(self.dropped) / self.candidates_seen


def grpo_plain(candidate_order: np.ndarray, batch_size: int) -> BatchPlan:
    """Keep the first batch_size sampled candidates, drop none."""
    kept = [int(i) for i in candidate_order[:batch_size]]
    return BatchPlan(regime="grpo", kept=kept, dropped=[], candidates_seen=len(kept))


def depo_filter(
    estimator: EstimatorModel | None,
    pool: PromptPool,
    candidate_order: np.ndarray,
    batch_size: int,
    step: int,
    cfg: FilterConfig,
) -> tuple[BatchPlan, np.ndarray]:
    """Score candidates pre-rollout and keep those inside the keep band.

    During warm-up (or when disabled) every candidate is kept. With refill the
    permutation is walked past batch_size until the batch fills or the pool is
    exhausted. Returns the plan plus the scores of every examined candidate,
    aligned with the examined prefix of candidate_order.
    """
    active = cfg.enabled and step >= cfg.warmup_steps
    limit = len(candidate_order) if (active and cfg.refill) else min(batch_size, len(candidate_order))
    examined: list[int] = []
    kept: list[int] = []
    dropped: list[int] = []
    scores: list[float] = []
    for raw in candidate_order[:limit]:
        if active and cfg.refill and len(kept) >= batch_size:
            break
        pid = int(raw)
        examined.append(pid)
        score = (
            float(predict_difficulty_score(estimator, pool[pid].features))
            if estimator is not None
            else float("nan")
        )
        scores.append(score)
        if not active or cfg.keep_low <= score <= cfg.keep_high:
            kept.append(pid)
        else:
            dropped.append(pid)
    short = len(kept) < min(batch_size, len(candidate_order))
    return (
        BatchPlan(
            regime="depo",
            kept=kept,
            dropped=dropped,
            candidates_seen=len(examined),
            short_batch=short,
        ),
        np.array(scores),
    )


def dapo_dynamic_sampling(
    policy: PolicyState,
    pool: PromptPool,
    candidate_order: np.ndarray,
    batch_size: int,
    group_size: int,
    max_oversample: float,
    rollout_rng: np.random.Generator,
    discard_uniform: bool = True,
) -> tuple[BatchPlan, list[RolloutGroup]]:
    """Roll out candidates and keep non-uniform groups until the batch fills.

    Every examined candidate is fully rolled out (and must be charged by the
    caller) whether kept or discarded. Stops at batch_size informative groups
    or after max_oversample * batch_size candidates; a partial batch is
    flagged short.
    """
    if max_oversample < 1:
        raise ConfigError(f"max_oversample must be >= 1, got {max_oversample}")
    budget = int(max_oversample * batch_size)
    kept: list[int] = []
    dropped: list[int] = []
    groups: list[RolloutGroup] = []
    seen = 0
    for raw in candidate_order:
        if len(kept) >= batch_size or seen >= budget:
            break
        pid = int(raw)
        seen += 1
        group = sample_rollout_batch(policy, [pool[pid]], group_size, rollout_rng)[0]
        uniform = group.outcomes.min() == group.outcomes.max()
        if discard_uniform and uniform:
            dropped.append(pid)
        else:
            kept.append(pid)
            groups.append(group)
    plan = BatchPlan(
        regime="dapo",
        kept=kept,
        dropped=dropped,
        candidates_seen=seen,
        short_batch=len(kept) < batch_size,
    )
    return plan, groups


def offline_stage_prune(
    policy: PolicyState,
    pool: PromptPool,
    live_ids: list[int],
    k_eval: int,
    keep_lo: float,
    keep_hi: float,
    rng: np.random.Generator,
) -> tuple[list[int], int]:
    """Evaluate mean reward over k_eval rollouts per live prompt; retain the mid band.

    Returns (retained ids, rollouts performed). Raises ConfigError if nothing
    survives; the runner decides how to proceed.
    """
    if keep_lo >= keep_hi:
        raise ConfigError(f"offline keep band invalid: keep_lo={keep_lo} >= keep_hi={keep_hi}")
    prompts = [pool[i] for i in live_ids]
    groups = sample_rollout_batch(policy, prompts, k_eval, rng)
    retained = [
        pid
        for pid, group in zip(live_ids, groups)
        if keep_lo <= group.rewards.mean() <= keep_hi
    ]
    rollouts = len(live_ids) * k_eval
    if not retained:
        raise ConfigError(
            f"offline prune retained no prompts (keep band [{keep_lo}, {keep_hi}])"
        )
    return retained, rollouts


def make_targets(
    groups: list[RolloutGroup], policy: PolicyState, pool: PromptPool
) -> list[EstimatorTarget]:
    """Estimator targets from this step's trajectories: group mean reward and actor PPL proxy."""
    targets = []
    for group in groups:
        prompt = pool[group.prompt_id]
        targets.append(
            EstimatorTarget(
                prompt_id=group.prompt_id,
                reward=float(group.rewards.mean()),
                ppl=actor_ppl_proxy(policy, prompt),
            )
        )
    return targets
