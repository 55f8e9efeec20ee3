"""Online difficulty estimator: shared tanh encoder with reward and PPL heads.

The reward head is trained with BCE toward the realized group mean reward
(higher = easier); a BCE distillation term pulls the PPL head toward the
actor's normalized uncertainty; a pairwise hinge on the reward logits keeps
the predicted scores from collapsing toward the batch mean. Gradients are
hand-written backprop through the small network and checked against finite
differences in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, TrainingFault
from .sim_core import sigmoid, softplus

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

PARAM_KEYS = ("w_enc", "b_enc", "w_adv", "b_adv", "w_ppl", "b_ppl")


@dataclass(frozen=True)
class EstimatorLossConfig:
    w_distill: float = 0.5
    w_rank: float = 3.0
    margin: float = 0.5
    pair_gap: float = 0.25
    learning_rate: float = 1e-2
    pair_cap: int = 512
    de_loss: str = "bce"  # "bce" or "mse" (ablation)
    hidden: int = 16

    def __post_init__(self):
        if self.w_distill < 0:
            raise ConfigError(f"w_distill must be >= 0, got {self.w_distill}")
        if self.w_rank < 0:
            raise ConfigError(f"w_rank must be >= 0, got {self.w_rank}")
        if self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if self.pair_gap < 0:
            raise ConfigError(f"pair_gap must be >= 0, got {self.pair_gap}")
        if self.learning_rate <= 0:
            raise ConfigError(f"estimator learning_rate must be > 0, got {self.learning_rate}")
        if self.pair_cap < 1:
            raise ConfigError(f"pair_cap must be >= 1, got {self.pair_cap}")
        if self.de_loss not in ("bce", "mse"):
            raise ConfigError(f"de_loss must be 'bce' or 'mse', got {self.de_loss!r}")
        if self.hidden < 1:
            raise ConfigError(f"hidden must be >= 1, got {self.hidden}")


@dataclass
class EstimatorTarget:
    """Per-prompt training targets: group mean reward and normalized PPL, both in [0, 1]."""

    prompt_id: int
    reward: float
    ppl: float


@dataclass
class EstimatorModel:
    params: dict[str, np.ndarray]
    adam_m: dict[str, np.ndarray]
    adam_v: dict[str, np.ndarray]
    adam_t: int = 0
    version: int = 0

    @property
    def hidden(self) -> int:
        return self.params["w_enc"].shape[0]

    @property
    def num_features(self) -> int:
        return self.params["w_enc"].shape[1]

    def copy(self) -> "EstimatorModel":
        return EstimatorModel(
            params={k: v.copy() for k, v in self.params.items()},
            adam_m={k: v.copy() for k, v in self.adam_m.items()},
            adam_v={k: v.copy() for k, v in self.adam_v.items()},
            adam_t=self.adam_t,
            version=self.version,
        )


def init_estimator(num_features: int, hidden: int, rng: np.random.Generator) -> EstimatorModel:
    params = {
        "w_enc": rng.normal(0.0, 0.2, size=(hidden, num_features)),
        "b_enc": np.zeros(hidden),
        "w_adv": rng.normal(0.0, 0.2, size=hidden),
        "b_adv": np.zeros(()),
        "w_ppl": rng.normal(0.0, 0.2, size=hidden),
        "b_ppl": np.zeros(()),
    }
    zeros = {k: np.zeros_like(v) for k, v in params.items()}
    return EstimatorModel(
        params=params,
        adam_m={k: v.copy() for k, v in zeros.items()},
        adam_v={k: v.copy() for k, v in zeros.items()},
    )


def estimator_forward(model: EstimatorModel, features: np.ndarray):
    """Return (reward_logit, ppl_logit); accepts a single vector or an (N, F) batch."""
    features = np.asarray(features, dtype=float)
    single = features.ndim == 1
    x = features[None, :] if single else features
    if x.shape[1] != model.num_features:
        raise ValueError(
            f"feature length mismatch: model expects {model.num_features}, got {x.shape[1]}"
        )
    h = np.tanh(x @ model.params["w_enc"].T + model.params["b_enc"])
    reward_logit = h @ model.params["w_adv"] + model.params["b_adv"]
    ppl_logit = h @ model.params["w_ppl"] + model.params["b_ppl"]
    if single:
        return float(reward_logit[0]), float(ppl_logit[0])
    return reward_logit, ppl_logit


def bce_with_logit(logit, target):
    """-[t*log(sigmoid(z)) + (1-t)*log(1-sigmoid(z))] in a saturation-safe form."""
    logit = np.asarray(logit, dtype=float)
    target = np.asarray(target, dtype=float)
    out = target * softplus(-logit) + (1.0 - target) * softplus(logit)
    return float(out) if out.ndim == 0 else out


def loss_de(reward_logit, target) -> float:
    return float(np.mean(bce_with_logit(reward_logit, target)))


def loss_de_grad(reward_logit, target):
    """d loss_de / d logit = sigmoid(logit) - target, exactly."""
    return sigmoid(reward_logit) - np.asarray(target, dtype=float)


def loss_mse(reward_logit, target) -> float:
    pred = sigmoid(np.asarray(reward_logit, dtype=float))
    return float(np.mean(0.5 * (np.asarray(target, dtype=float) - pred) ** 2))


def loss_mse_grad(reward_logit, target):
    pred = sigmoid(np.asarray(reward_logit, dtype=float))
    return (pred - np.asarray(target, dtype=float)) * pred * (1.0 - pred)


def loss_distill(ppl_logit, target) -> float:
    return float(np.mean(bce_with_logit(ppl_logit, target)))


def build_rank_pairs(targets: list[EstimatorTarget], pair_gap: float) -> list[tuple[int, int]]:
    """All ordered (easy, hard) index pairs whose reward targets differ by >= pair_gap."""
    pairs = []
    for i, ti in enumerate(targets):
        for j, tj in enumerate(targets):
            if i != j and ti.reward - tj.reward >= pair_gap:
                pairs.append((i, j))
    return pairs


def loss_rank(easy_logits, hard_logits, margin: float) -> float:
    """Mean hinge max(0, margin - (easy - hard)); empty pair set scores 0."""
    easy_logits = np.asarray(easy_logits, dtype=float)
    if easy_logits.size == 0:
        return 0.0
    hard_logits = np.asarray(hard_logits, dtype=float)
    return float(np.mean(np.maximum(0.0, margin - (easy_logits - hard_logits))))


def joint_loss_and_grad(
    model: EstimatorModel,
    features: np.ndarray,
    targets: list[EstimatorTarget],
    cfg: EstimatorLossConfig,
    rng: np.random.Generator | None = None,
):
    """Joint loss over a batch and its exact gradient for every weight.

    Returns (loss, grads, parts) where parts carries the unweighted components.
    Rank pairs beyond cfg.pair_cap are subsampled with rng (a fixed-seed
    fallback keeps the selection deterministic when rng is omitted).
    """
    if len(targets) == 0:
        raise ValueError("joint_loss_and_grad requires a non-empty batch")
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n = x.shape[0]
    reward_t = np.array([t.reward for t in targets])
    ppl_t = np.array([t.ppl for t in targets])

    pre = x @ model.params["w_enc"].T + model.params["b_enc"]
    h = np.tanh(pre)
    a_logit = h @ model.params["w_adv"] + model.params["b_adv"]
    p_logit = h @ model.params["w_ppl"] + model.params["b_ppl"]

    if cfg.de_loss == "bce":
        de = loss_de(a_logit, reward_t)
        g_a = loss_de_grad(a_logit, reward_t) / n
    else:
        de = loss_mse(a_logit, reward_t)
        g_a = loss_mse_grad(a_logit, reward_t) / n
    distill = loss_distill(p_logit, ppl_t)
    g_p = cfg.w_distill * (sigmoid(p_logit) - ppl_t) / n

    pairs = build_rank_pairs(targets, cfg.pair_gap)
    if len(pairs) > cfg.pair_cap:
        sub_rng = rng if rng is not None else np.random.Generator(np.random.Philox(np.random.SeedSequence(0)))
        idx = sub_rng.choice(len(pairs), size=cfg.pair_cap, replace=False)
        pairs = [pairs[k] for k in sorted(idx)]
    if pairs:
        easy = np.array([e for e, _ in pairs])
        hard = np.array([j for _, j in pairs])
        gaps = cfg.margin - (a_logit[easy] - a_logit[hard])
        rank = float(np.mean(np.maximum(0.0, gaps)))
        active = gaps > 0.0  # hinge subgradient at the kink uses the inactive branch
        scale = cfg.w_rank / len(pairs)
        np.add.at(g_a, easy[active], -scale)
        np.add.at(g_a, hard[active], scale)
    else:
        rank = 0.0

    loss = de + cfg.w_distill * distill + cfg.w_rank * rank

    # Backprop through heads and the shared encoder.
    grads = {
        "w_adv": h.T @ g_a,
        "b_adv": np.asarray(g_a.sum()),
        "w_ppl": h.T @ g_p,
        "b_ppl": np.asarray(g_p.sum()),
    }
    dh = g_a[:, None] * model.params["w_adv"] + g_p[:, None] * model.params["w_ppl"]
    dpre = dh * (1.0 - h**2)
    grads["w_enc"] = dpre.T @ x
    grads["b_enc"] = dpre.sum(axis=0)

    parts = {"de": de, "distill": distill, "rank": rank, "joint": loss, "n_pairs": len(pairs)}
    return loss, grads, parts


def estimator_update(
    model: EstimatorModel, grads: dict[str, np.ndarray], learning_rate: float
) -> EstimatorModel:
    """One Adam descent step; raises TrainingFault on non-finite gradients."""
    for key in PARAM_KEYS:
        if not np.isfinite(grads[key]).all():
            raise TrainingFault(f"non-finite gradient in estimator parameter {key!r}")
    t = model.adam_t + 1
    params, m_new, v_new = {}, {}, {}
    for key in PARAM_KEYS:
        g = grads[key]
        m = ADAM_BETA1 * model.adam_m[key] + (1 - ADAM_BETA1) * g
        v = ADAM_BETA2 * model.adam_v[key] + (1 - ADAM_BETA2) * g**2
        m_hat = m / (1 - ADAM_BETA1**t)
        v_hat = v / (1 - ADAM_BETA2**t)
        params[key] = model.params[key] - learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        m_new[key] = m
        v_new[key] = v
    return EstimatorModel(
        params=params, adam_m=m_new, adam_v=v_new, adam_t=t, version=model.version + 1
    )


def predict_difficulty_score(model: EstimatorModel, features: np.ndarray):
    """Predicted group mean reward in (0, 1); higher = easier for the actor."""
    reward_logit, _ = estimator_forward(model, features)
    return sigmoid(reward_logit)


def save_estimator(model: EstimatorModel, path) -> None:
    rec = {
        "version": model.version,
        "adam_t": model.adam_t,
        "params": {k: np.asarray(v).tolist() for k, v in model.params.items()},
        "adam_m": {k: np.asarray(v).tolist() for k, v in model.adam_m.items()},
        "adam_v": {k: np.asarray(v).tolist() for k, v in model.adam_v.items()},
    }
    Path(path).write_text(json.dumps(rec) + "\n")


def load_estimator(path) -> EstimatorModel:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"estimator file not found: {path}")
    rec = json.loads(path.read_text())
    return EstimatorModel(
        params={k: np.array(v, dtype=float) for k, v in rec["params"].items()},
        adam_m={k: np.array(v, dtype=float) for k, v in rec["adam_m"].items()},
        adam_v={k: np.array(v, dtype=float) for k, v in rec["adam_v"].items()},
        adam_t=int(rec["adam_t"]),
        version=int(rec["version"]),
    )
