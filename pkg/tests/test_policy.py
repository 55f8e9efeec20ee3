import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depolab.policy import (
    PolicyState,
    actor_ppl_proxy,
    init_policy,
    load_policy,
    log_prob,
    sample_rollout_batch,
    sample_rollouts,
    save_policy,
    success_prob,
)
from depolab.sim_core import Prompt, substream


def prompt_with(difficulty, extra=()):
    feats = np.concatenate(([1.0, -difficulty], list(extra)))
    return Prompt(id=0, features=feats, latent_difficulty=difficulty)


class TestSuccessProb:
    def test_zero_theta(self):
        policy = PolicyState(theta=np.zeros(2))
        assert success_prob(policy, prompt_with(1.7)) == 0.5

    def test_difficulty_feature(self):
        policy = init_policy(2, skill=1.0)
        for d in (-2.0, 0.0, 3.0):
            assert success_prob(policy, prompt_with(d)) == pytest.approx(
                1 / (1 + math.exp(d)), abs=1e-12
            )

    def test_hand_dot_product(self):
        policy = PolicyState(theta=np.array([0.5, 1.0, 0.0]))
        prompt = Prompt(id=0, features=np.array([1.0, -2.0, 3.0]), latent_difficulty=2.0)
        assert success_prob(policy, prompt) == pytest.approx(0.18242552380635635, abs=1e-10)

    def test_dimension_mismatch(self):
        policy = PolicyState(theta=np.zeros(3))
        with pytest.raises(ValueError):
            success_prob(policy, prompt_with(0.0))

    def test_monotone_in_difficulty(self):
        policy = init_policy(2, skill=1.0)
        probs = [success_prob(policy, prompt_with(d)) for d in np.linspace(-3, 3, 13)]
        assert all(a > b for a, b in zip(probs, probs[1:]))


class TestSampleRollouts:
    def test_degenerate_bernoulli(self):
        policy = PolicyState(theta=np.array([1000.0, 0.0]))
        group = sample_rollouts(policy, prompt_with(0.0), 32, substream(0, 0))
        assert group.outcomes.sum() == 32
        assert np.array_equal(group.rewards, np.ones(32))

    def test_monte_carlo_mean(self):
        policy = PolicyState(theta=np.zeros(2))
        group = sample_rollouts(policy, prompt_with(0.0), 10000, substream(1, 0))
        assert abs(group.outcomes.mean() - 0.5) < 0.02

    def test_same_seed_identical(self):
        policy = init_policy(2)
        a = sample_rollouts(policy, prompt_with(0.3), 50, substream(5, 2))
        b = sample_rollouts(policy, prompt_with(0.3), 50, substream(5, 2))
        assert np.array_equal(a.outcomes, b.outcomes)
        assert a.old_logit == b.old_logit

    def test_old_logit_recorded(self):
        policy = PolicyState(theta=np.array([0.25, 1.0]))
        group = sample_rollouts(policy, prompt_with(2.0), 4, substream(0, 0))
        assert group.old_logit == pytest.approx(0.25 - 2.0)

    def test_batch_matches_sequential(self):
        # the batch path must consume the rng exactly like per-prompt calls
        policy = init_policy(2)
        prompts = [prompt_with(d) for d in (-1.0, 0.0, 2.0)]
        batch = sample_rollout_batch(policy, prompts, 8, substream(9, 1))
        rng = substream(9, 1)
        singles = [sample_rollouts(policy, p, 8, rng) for p in prompts]
        for a, b in zip(batch, singles):
            assert np.array_equal(a.outcomes, b.outcomes)
            assert a.old_logit == b.old_logit


class TestPplProxy:
    def test_max_uncertainty(self):
        policy = PolicyState(theta=np.zeros(2))
        assert actor_ppl_proxy(policy, prompt_with(0.0)) == 1.0

    def test_saturated(self):
        policy = PolicyState(theta=np.array([1000.0, 0.0]))
        assert actor_ppl_proxy(policy, prompt_with(0.0)) == 0.0

    def test_hand_value(self):
        # p = 0.9 -> binary entropy 0.46900
        logit = math.log(0.9 / 0.1)
        policy = PolicyState(theta=np.array([logit, 0.0]))
        assert actor_ppl_proxy(policy, prompt_with(0.0)) == pytest.approx(0.46900, abs=1e-5)

    def test_symmetry(self):
        up = PolicyState(theta=np.array([1.3, 0.0]))
        down = PolicyState(theta=np.array([-1.3, 0.0]))
        p = prompt_with(0.0)
        assert actor_ppl_proxy(up, p) == pytest.approx(actor_ppl_proxy(down, p), abs=1e-12)


class TestLogProb:
    def test_symmetric_point(self):
        assert log_prob(0.0, 1) == pytest.approx(-math.log(2), abs=1e-12)

    def test_hand_value(self):
        assert log_prob(2.0, 0) == pytest.approx(-2.1269280110429714, abs=1e-10)

    @given(st.floats(min_value=-700, max_value=700))
    @settings(max_examples=200)
    def test_normalization(self, logit):
        total = math.exp(log_prob(logit, 1)) + math.exp(log_prob(logit, 0))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_no_catastrophic_values(self):
        assert log_prob(700.0, 1) == pytest.approx(0.0, abs=1e-300)
        assert log_prob(-700.0, 1) == pytest.approx(-700.0, rel=1e-12)


class TestPolicyIO:
    def test_round_trip(self, tmp_path):
        policy = PolicyState(theta=np.array([0.1, -2.5, 3.0]), version=17)
        save_policy(policy, tmp_path / "policy.json")
        loaded = load_policy(tmp_path / "policy.json")
        assert loaded.version == 17
        assert np.array_equal(loaded.theta, policy.theta)
