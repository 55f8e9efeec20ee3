"""Prompt pools, difficulty profiles, deterministic RNG lanes, and shared numerics.

Prompts are feature vectors: features[0] is a bias, features[1] encodes the
negated latent difficulty, and the remaining components are distractor noise.
All randomness flows through counter-based Philox substreams addressed by
(seed, lane, step, ...) so that independent parts of a run never share or
perturb each other's streams.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

# Named RNG lanes. Every stochastic operation draws from substream(seed, LANE, ...),
# so adding or removing consumers in one lane cannot shift draws in another.
LANE_POOL = 0
LANE_CANDIDATES = 1
LANE_ROLLOUTS = 2
LANE_ESTIMATOR = 3
LANE_PRUNE = 4
LANE_ROUTER = 5


def substream(seed: int, *path: int) -> np.random.Generator:
    """Deterministic Philox generator addressed by (seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def sigmoid(x):
    """Numerically stable logistic; saturates cleanly for |x| up to ~700."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if out.ndim == 0 else out


def softplus(x):
    """log(1 + e^x) without overflow."""
    x = np.asarray(x, dtype=float)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return float(out) if out.ndim == 0 else out


def log_sigmoid(x):
    """log(sigmoid(x)) = -softplus(-x), stable for large |x|."""
    x = np.asarray(x, dtype=float)
    out = -softplus(-x)
    return float(out) if np.ndim(out) == 0 else out


def binary_entropy(p):
    """Entropy of Bernoulli(p) in bits, with the 0*log(0) = 0 convention."""
    p = np.asarray(p, dtype=float)
    out = -(_xlogx(p) + _xlogx(1.0 - p)) / np.log(2.0)
    return float(out) if out.ndim == 0 else out


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log(p[mask])
    return out


@dataclass
class Prompt:
    """One training question surrogate: a feature vector plus its latent difficulty."""

    id: int
    features: np.ndarray
    latent_difficulty: float


@dataclass(frozen=True)
class Uniform:
    """Difficulty drawn uniformly from [lo, hi]."""

    lo: float
    hi: float

    def validate(self):
        if self.lo > self.hi:
            raise ConfigError(f"uniform profile: lo must be <= hi, got lo={self.lo}, hi={self.hi}")


# Cluster placement for the J-shaped profile, in difficulty units relative to the
# mid band. The easy cluster straddles the high end of a skill-1 actor's useful
# range; the hard cluster sits far enough out to stay intractable.
JSHAPED_EASY_SPAN = (2.5, 1.0)
JSHAPED_HARD_SPAN = (6.0, 10.0)


@dataclass(frozen=True)
class JShaped:
    """Mass piled near both difficulty extremes with a thin uniform middle."""

    easy_mass: float
    hard_mass: float
    mid_lo: float
    mid_hi: float

    def validate(self):
        if self.easy_mass < 0 or self.hard_mass < 0:
            raise ConfigError(
                f"jshaped profile: masses must be nonnegative, got easy_mass={self.easy_mass}, "
                f"hard_mass={self.hard_mass}"
            )
        if self.easy_mass + self.hard_mass > 1.0:
            raise ConfigError(
                f"jshaped profile: easy_mass + hard_mass must be <= 1, got "
                f"{self.easy_mass + self.hard_mass}"
            )
        if self.mid_lo >= self.mid_hi:
            raise ConfigError(
                f"jshaped profile: mid_lo must be < mid_hi, got mid_lo={self.mid_lo}, mid_hi={self.mid_hi}"
            )


TWOCLUSTER_SPREAD = 0.25


@dataclass(frozen=True)
class TwoCluster:
    """Two normal difficulty clusters; mix is the probability of the easy one."""

    mu_easy: float
    mu_hard: float
    mix: float

    def validate(self):
        if not 0.0 <= self.mix <= 1.0:
            raise ConfigError(f"twocluster profile: mix must be in [0, 1], got {self.mix}")


Profile = Uniform | JShaped | TwoCluster


@dataclass
class PromptPool:
    """Ordered prompt collection with the profile that generated it."""

    prompts: list[Prompt]
    profile: Profile | None = None

    def __len__(self):
        return len(self.prompts)

    def __getitem__(self, idx: int) -> Prompt:
        return self.prompts[idx]

    @property
    def num_features(self) -> int:
        return len(self.prompts[0].features)

    def features_matrix(self, ids=None) -> np.ndarray:
        if ids is None:
            return np.stack([p.features for p in self.prompts])
        return np.stack([self.prompts[i].features for i in ids])

    def difficulties(self) -> np.ndarray:
        return np.array([p.latent_difficulty for p in self.prompts])


def _sample_difficulties(profile: Profile, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(profile, Uniform):
        return rng.uniform(profile.lo, profile.hi, size=n)
    if isinstance(profile, JShaped):
        u = rng.random(n)
        v = rng.random(n)
        easy_far, easy_near = JSHAPED_EASY_SPAN
        hard_near, hard_far = JSHAPED_HARD_SPAN
        d = profile.mid_lo + v * (profile.mid_hi - profile.mid_lo)
        easy = u < profile.easy_mass
        hard = (u >= profile.easy_mass) & (u < profile.easy_mass + profile.hard_mass)
        d[easy] = profile.mid_lo - easy_far + v[easy] * (easy_far - easy_near)
        d[hard] = profile.mid_hi + hard_near + v[hard] * (hard_far - hard_near)
        return d
    if isinstance(profile, TwoCluster):
        u = rng.random(n)
        z = rng.normal(0.0, TWOCLUSTER_SPREAD, size=n)
        mu = np.where(u < profile.mix, profile.mu_easy, profile.mu_hard)
        return mu + z
    raise ConfigError(f"unknown difficulty profile {profile!r}")


def generate_pool(
    profile: Profile,
    n: int,
    noise_dims: int,
    noise_scale: float,
    rng: np.random.Generator,
) -> PromptPool:
    """Draw n prompts with difficulties from the profile and i.i.d. distractor noise."""
    if n < 1:
        raise ConfigError(f"pool size n must be >= 1, got {n}")
    if noise_dims < 0:
        raise ConfigError(f"noise_dims must be >= 0, got {noise_dims}")
    if noise_scale < 0:
        raise ConfigError(f"noise_scale must be >= 0, got {noise_scale}")
    profile.validate()

    difficulties = _sample_difficulties(profile, n, rng)
    noise = rng.normal(0.0, noise_scale, size=(n, noise_dims)) if noise_dims else np.zeros((n, 0))
    prompts = []
    for i in range(n):
        feats = np.concatenate(([1.0, -difficulties[i]], noise[i]))
        prompts.append(Prompt(id=i, features=feats, latent_difficulty=float(difficulties[i])))
    return PromptPool(prompts=prompts, profile=profile)


def save_pool(pool: PromptPool, path) -> None:
    """One JSON record per prompt: id, difficulty, features."""
    with open(path, "w") as fh:
        for p in pool.prompts:
            rec = {
                "id": p.id,
                "difficulty": p.latent_difficulty,
                "features": [float(x) for x in p.features],
            }
            fh.write(json.dumps(rec) + "\n")


def load_pool(path) -> PromptPool:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"pool file not found: {path}")
    prompts = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            prompts.append(
                Prompt(
                    id=int(rec["id"]),
                    features=np.array(rec["features"], dtype=float),
                    latent_difficulty=float(rec["difficulty"]),
                )
            )
    if not prompts:
        raise ConfigError(f"pool file is empty: {path}")
    return PromptPool(prompts=prompts, profile=None)
