"""Confidence-threshold cascade between a weak and a strong simulated model.

A frozen difficulty estimator (trained against the small policy) scores each
query; scores below tau are escalated to the large policy. Per-query rollout
draws are shared between the two policies, so the small-only, large-only, and
routed evaluations are exactly comparable and a positive skill shift dominates
outcome-by-outcome.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .estimator import EstimatorModel, predict_difficulty_score
from .policy import PolicyState
from .sim_core import LANE_ROUTER, PromptPool, sigmoid, substream

SMALL = "small"
LARGE = "large"


@dataclass(frozen=True)
class RouterConfig:
    tau: float
    small_policy: PolicyState
    large_policy: PolicyState
    eval_rollouts: int = 32

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must be in [0, 1], got {self.tau}")
        if self.eval_rollouts < 1:
            raise ConfigError(f"eval_rollouts must be >= 1, got {self.eval_rollouts}")


@dataclass
class BucketStats:
    accuracy: float
    queries_to_small: int
    queries_to_large: int
    delta_vs_small: float
    delta_vs_large: float


@dataclass
class RoutingReport:
    tau: float
    accuracy: float
    queries_to_small: int
    queries_to_large: int
    accuracy_small_only: float
    accuracy_large_only: float
    delta_vs_small: float
    delta_vs_large: float
    buckets: dict[str, BucketStats] = field(default_factory=dict)

    @property
    def pct_small(self) -> float:
        total = self.queries_to_small + self.queries_to_large
        return self.queries_to_small / total if total else 0.0


def route(score: float, tau: float) -> str:
    """score >= tau stays on the small model; score < tau escalates."""
    return SMALL if score >= tau else LARGE


def _difficulty_buckets(pool: PromptPool) -> np.ndarray:
    """Tercile labels by latent difficulty: easy / mid / hard."""
    diffs = pool.difficulties()
    lo, hi = np.quantile(diffs, [1 / 3, 2 / 3])
    labels = np.where(diffs <= lo, "easy", np.where(diffs <= hi, "mid", "hard"))
    return labels


def cascade_eval(
    pool: PromptPool,
    estimator: EstimatorModel,
    cfg: RouterConfig,
    seed: int,
) -> RoutingReport:
    """Route every query, evaluate mean reward over shared rollout draws, aggregate."""
    feats = pool.features_matrix()
    scores = predict_difficulty_score(estimator, feats)
    p_small = sigmoid(feats @ cfg.small_policy.theta)
    p_large = sigmoid(feats @ cfg.large_policy.theta)

    n = len(pool)
    acc_small = np.empty(n)
    acc_large = np.empty(n)
    for i in range(n):
        draws = substream(seed, LANE_ROUTER, i).random(cfg.eval_rollouts)
        acc_small[i] = (draws < p_small[i]).mean()
        acc_large[i] = (draws < p_large[i]).mean()

    to_small = scores >= cfg.tau
    routed = np.where(to_small, acc_small, acc_large)

    def stats(mask: np.ndarray) -> BucketStats:
        return BucketStats(
            accuracy=float(routed[mask].mean()),
            queries_to_small=int(to_small[mask].sum()),
            queries_to_large=int((~to_small[mask]).sum()),
            delta_vs_small=float(routed[mask].mean() - acc_small[mask].mean()),
            delta_vs_large=float(routed[mask].mean() - acc_large[mask].mean()),
        )

    labels = _difficulty_buckets(pool)
    buckets = {name: stats(labels == name) for name in ("easy", "mid", "hard") if (labels == name).any()}
    return RoutingReport(
        tau=cfg.tau,
        accuracy=float(routed.mean()),
        queries_to_small=int(to_small.sum()),
        queries_to_large=int((~to_small).sum()),
        accuracy_small_only=float(acc_small.mean()),
        accuracy_large_only=float(acc_large.mean()),
        delta_vs_small=float(routed.mean() - acc_small.mean()),
        delta_vs_large=float(routed.mean() - acc_large.mean()),
        buckets=buckets,
    )


def route_sweep(
    pool: PromptPool,
    estimator: EstimatorModel,
    small_policy: PolicyState,
    large_policy: PolicyState,
    taus: list[float],
    eval_rollouts: int,
    seed: int,
) -> list[RoutingReport]:
    reports = []
    for tau in taus:
        cfg = RouterConfig(
            tau=tau,
            small_policy=small_policy,
            large_policy=large_policy,
            eval_rollouts=eval_rollouts,
        )
        reports.append(cascade_eval(pool, estimator, cfg, seed))
    return reports


def write_route_csv(reports: list[RoutingReport], path) -> None:
    fieldnames = [
        "tau",
        "accuracy",
        "n_small",
        "n_large",
        "pct_small",
        "delta_vs_small",
        "delta_vs_large",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for rep in reports:
            writer.writerow(
                {
                    "tau": rep.tau,
                    "accuracy": rep.accuracy,
                    "n_small": rep.queries_to_small,
                    "n_large": rep.queries_to_large,
                    "pct_small": rep.pct_small,
                    "delta_vs_small": rep.delta_vs_small,
                    "delta_vs_large": rep.delta_vs_large,
                }
            )
