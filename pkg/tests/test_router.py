import numpy as np
import pytest

from depolab.errors import ConfigError
from depolab.estimator import (
    EstimatorLossConfig,
    EstimatorTarget,
    estimator_update,
    init_estimator,
    joint_loss_and_grad,
)
from depolab.policy import PolicyState, init_policy
from depolab.router import RouterConfig, cascade_eval, route, route_sweep, write_route_csv
from depolab.sim_core import Uniform, generate_pool, sigmoid, substream


def difficulty_estimator(pool, policy, steps=400, seed=0):
    """Fit the estimator toward the small policy's true success probabilities."""
    model = init_estimator(pool.num_features, 8, substream(seed, 3))
    cfg = EstimatorLossConfig(w_rank=0.0, w_distill=0.0)
    feats = pool.features_matrix()
    probs = sigmoid(feats @ policy.theta)
    targets = [
        EstimatorTarget(prompt_id=p.id, reward=float(probs[i]), ppl=0.5)
        for i, p in enumerate(pool.prompts)
    ]
    for _ in range(steps):
        _, grads, _ = joint_loss_and_grad(model, feats, targets, cfg)
        model = estimator_update(model, grads, cfg.learning_rate)
    return model


@pytest.fixture(scope="module")
def routing_setup():
    pool = generate_pool(Uniform(-3, 3), 300, 0, 0.0, substream(21, 0))
    small = init_policy(2, skill=1.0)
    large = small.copy()
    large.theta[0] += 2.0  # strictly dominant skill shift
    estimator = difficulty_estimator(pool, small)
    return pool, small, large, estimator


class TestRoute:
    def test_tau_zero_all_small(self):
        for score in (0.0, 0.3, 1.0):
            assert route(score, 0.0) == "small"

    def test_tau_one_boundary(self):
        assert route(1.0, 1.0) == "small"
        assert route(0.999, 1.0) == "large"

    def test_strict_inequality(self):
        assert route(0.74, 0.75) == "large"
        assert route(0.75, 0.75) == "small"

    def test_invalid_tau(self):
        with pytest.raises(ConfigError):
            RouterConfig(tau=1.5, small_policy=init_policy(2), large_policy=init_policy(2))


class TestCascadeEval:
    def test_tau_zero_equals_small_only(self, routing_setup):
        pool, small, large, estimator = routing_setup
        cfg = RouterConfig(tau=0.0, small_policy=small, large_policy=large, eval_rollouts=16)
        report = cascade_eval(pool, estimator, cfg, seed=5)
        assert report.queries_to_small == len(pool)
        assert report.accuracy == report.accuracy_small_only
        assert report.delta_vs_small == 0.0

    def test_tau_above_max_equals_large_only(self, routing_setup):
        pool, small, large, estimator = routing_setup
        cfg = RouterConfig(tau=1.0, small_policy=small, large_policy=large, eval_rollouts=16)
        report = cascade_eval(pool, estimator, cfg, seed=5)
        # continuous scores never reach exactly 1.0
        assert report.queries_to_large == len(pool)
        assert report.accuracy == report.accuracy_large_only
        assert report.delta_vs_large == 0.0

    def test_sandwich_property(self, routing_setup):
        pool, small, large, estimator = routing_setup
        for tau in (0.3, 0.5, 0.7, 0.75):
            cfg = RouterConfig(tau=tau, small_policy=small, large_policy=large, eval_rollouts=16)
            report = cascade_eval(pool, estimator, cfg, seed=5)
            assert report.accuracy_small_only - 1e-12 <= report.accuracy
            assert report.accuracy <= report.accuracy_large_only + 1e-12

    def test_split_monotone_in_tau(self, routing_setup):
        pool, small, large, estimator = routing_setup
        reports = route_sweep(pool, estimator, small, large, [0.3, 0.5, 0.7, 0.75], 16, seed=5)
        larges = [r.queries_to_large for r in reports]
        assert all(a <= b for a, b in zip(larges, larges[1:]))

    def test_identical_policies_tau_invariant(self, routing_setup):
        pool, small, _, estimator = routing_setup
        accs = []
        for tau in (0.0, 0.4, 0.8):
            cfg = RouterConfig(tau=tau, small_policy=small, large_policy=small, eval_rollouts=16)
            accs.append(cascade_eval(pool, estimator, cfg, seed=5).accuracy)
        assert accs[0] == accs[1] == accs[2]

    def test_shared_rollout_draws(self, routing_setup):
        # per-query draws are shared, so a dominant policy wins pointwise
        pool, small, large, estimator = routing_setup
        cfg = RouterConfig(tau=0.5, small_policy=small, large_policy=large, eval_rollouts=16)
        report = cascade_eval(pool, estimator, cfg, seed=5)
        assert report.accuracy_large_only >= report.accuracy_small_only
        for bucket in report.buckets.values():
            assert bucket.delta_vs_large <= 1e-12

    def test_buckets_partition_queries(self, routing_setup):
        pool, small, large, estimator = routing_setup
        cfg = RouterConfig(tau=0.6, small_policy=small, large_policy=large, eval_rollouts=8)
        report = cascade_eval(pool, estimator, cfg, seed=5)
        total_small = sum(b.queries_to_small for b in report.buckets.values())
        total_large = sum(b.queries_to_large for b in report.buckets.values())
        assert total_small == report.queries_to_small
        assert total_large == report.queries_to_large
        assert report.queries_to_small + report.queries_to_large == len(pool)


class TestRouteCsv:
    def test_columns_and_rows(self, routing_setup, tmp_path):
        pool, small, large, estimator = routing_setup
        reports = route_sweep(pool, estimator, small, large, [0.3, 0.75], 8, seed=5)
        path = tmp_path / "route.csv"
        write_route_csv(reports, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "tau,accuracy,n_small,n_large,pct_small,delta_vs_small,delta_vs_large"
        assert len(lines) == 3
