"""Experiment configuration, the end-to-end training loop, and run orchestration.

Configs are strict INI files with one section per module; unknown keys are
rejected by name. Per-step metrics are appended as one JSON record per line;
summary tables are CSV. Runs are bit-reproducible from (config, seed).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from configparser import ConfigParser
from pathlib import Path

import numpy as np

from . import accounting, router as router_mod
from .errors import ConfigError, TrainingFault
from .estimator import (
    EstimatorLossConfig,
    EstimatorModel,
    estimator_update,
    init_estimator,
    joint_loss_and_grad,
    predict_difficulty_score,
    save_estimator,
    load_estimator,
)
from .grpo import GrpoConfig, group_advantages, grpo_step
from .policy import (
    PolicyState,
    init_policy,
    load_policy,
    sample_rollout_batch,
    save_policy,
)
from .scheduler import (
    REGIMES,
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
    LANE_CANDIDATES,
    LANE_ESTIMATOR,
    LANE_POOL,
    LANE_PRUNE,
    LANE_ROLLOUTS,
    PromptPool,
    TwoCluster,
    Uniform,
    generate_pool,
    load_pool,
    save_pool,
    substream,
)


@dataclass(frozen=True)
class PoolConfig:
    profile: str = "jshaped"
    n: int = 2000
    noise_dims: int = 4
    noise_scale: float = 0.5
    lo: float = -2.0
    hi: float = 2.0
    easy_mass: float = 0.4
    hard_mass: float = 0.4
    mid_lo: float = -0.5
    mid_hi: float = 0.5
    mu_easy: float = -2.0
    mu_hard: float = 2.0
    mix: float = 0.5
    path: str = ""

    def make_profile(self):
        if self.profile == "uniform":
            return Uniform(self.lo, self.hi)
        if self.profile == "jshaped":
            return JShaped(self.easy_mass, self.hard_mass, self.mid_lo, self.mid_hi)
        if self.profile == "twocluster":
            return TwoCluster(self.mu_easy, self.mu_hard, self.mix)
        raise ConfigError(f"profile must be uniform, jshaped, or twocluster, got {self.profile!r}")


@dataclass(frozen=True)
class OfflineConfig:
    stage_interval: int = 200
    keep_lo: float = 0.1
    keep_hi: float = 0.9
    k_eval: int = 0  # 0 means "use group_size"

    def __post_init__(self):
        if self.stage_interval < 1:
            raise ConfigError(f"stage_interval must be >= 1, got {self.stage_interval}")
        if self.keep_lo >= self.keep_hi:
            raise ConfigError(f"keep_lo must be < keep_hi, got {self.keep_lo} >= {self.keep_hi}")


@dataclass(frozen=True)
class RouterSpec:
    taus: tuple[float, ...] = (0.3, 0.5, 0.7, 0.75)
    eval_rollouts: int = 32
    skill_shift: float = 2.0
    from_run: str = ""
    estimator: str = ""
    small_policy: str = ""


@dataclass(frozen=True)
class ExperimentConfig:
    regime: str = "depo"
    steps: int = 1000
    batch_size: int = 128
    group_size: int = 8
    seed: int = 0
    out_dir: str = "out"
    init_skill: float = 1.0
    pool: PoolConfig = field(default_factory=PoolConfig)
    grpo: GrpoConfig = field(default_factory=GrpoConfig)
    est: EstimatorLossConfig = field(default_factory=EstimatorLossConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    dapo_max_oversample: float = 4.0
    dapo_discard_uniform: bool = True
    offline: OfflineConfig = field(default_factory=OfflineConfig)
    router: RouterSpec = field(default_factory=RouterSpec)

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.steps}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.group_size < 2:
            raise ConfigError(f"group_size must be >= 2, got {self.group_size}")
        if self.dapo_max_oversample < 1:
            raise ConfigError(f"max_oversample must be >= 1, got {self.dapo_max_oversample}")

    @property
    def k_eval(self) -> int:
        return self.offline.k_eval or self.group_size


@dataclass
class StepMetrics:
    """One per-step record; serialized as a single JSON line."""

    step: int
    candidates: int
    kept: int
    dropped: int
    filter_ratio: float
    short_batch: bool
    pool_live: int
    prune_failed: bool
    mean_reward: float | None
    mean_adv_mag: float | None
    mean_kl: float | None
    loss_de: float | None
    loss_distill: float | None
    loss_rank: float | None
    loss_joint: float | None
    pred_mean: float | None
    pred_std: float | None
    pred_mae: float | None
    policy_version: int
    estimator_version: int | None
    sample_units: float
    rollout_units: float
    adv_compute_units: float
    reward_units: float
    estimator_units: float

    def to_record(self) -> dict:
        return asdict(self)


def emit_metrics(record: dict, sink) -> None:
    sink.write(json.dumps(record) + "\n")


def read_metrics(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


@dataclass
class RunResult:
    config: ExperimentConfig
    metrics: list[StepMetrics]
    policy: PolicyState
    ref_policy: PolicyState
    estimator: EstimatorModel | None
    ledger: accounting.CostLedger
    pool: PromptPool
    live_ids: list[int]

    def series(self, name: str) -> list:
        return [getattr(m, name) for m in self.metrics]


def build_pool(cfg: ExperimentConfig) -> PromptPool:
    if cfg.pool.path:
        return load_pool(cfg.pool.path)
    rng = substream(cfg.seed, LANE_POOL)
    return generate_pool(
        cfg.pool.make_profile(), cfg.pool.n, cfg.pool.noise_dims, cfg.pool.noise_scale, rng
    )


def _candidate_order(rng: np.random.Generator, live_ids: np.ndarray) -> np.ndarray:
    return live_ids[rng.permutation(len(live_ids))]


def run_experiment(cfg: ExperimentConfig, sink=None) -> RunResult:
    """Run one regime end to end; deterministic under (config, seed)."""
    pool = build_pool(cfg)
    num_features = pool.num_features
    policy = init_policy(num_features, cfg.init_skill)
    ref = policy.copy()
    use_estimator = cfg.regime == "depo" and cfg.filter.enabled
    estimator = (
        init_estimator(num_features, cfg.est.hidden, substream(cfg.seed, LANE_ESTIMATOR))
        if use_estimator
        else None
    )
    ledger = accounting.CostLedger()
    live_ids = list(range(len(pool)))
    metrics: list[StepMetrics] = []

    for step in range(cfg.steps):
        prune_failed = False
        if cfg.regime == "offline" and step > 0 and step % cfg.offline.stage_interval == 0:
            prune_rng = substream(cfg.seed, LANE_PRUNE, step)
            try:
                live_ids, eval_rollouts = offline_stage_prune(
                    policy,
                    pool,
                    live_ids,
                    cfg.k_eval,
                    cfg.offline.keep_lo,
                    cfg.offline.keep_hi,
                    prune_rng,
                )
            except ConfigError:
                # Nothing survived the band; keep training on the previous pool.
                prune_failed = True
                eval_rollouts = len(live_ids) * cfg.k_eval
            ledger.charge("rollout", eval_rollouts)
            ledger.charge("reward", eval_rollouts)

        cand_rng = substream(cfg.seed, LANE_CANDIDATES, step)
        roll_rng = substream(cfg.seed, LANE_ROLLOUTS, step)
        order = _candidate_order(cand_rng, np.asarray(live_ids))

        scores_by_id: dict[int, float] = {}
        pred_mean = pred_std = None
        if cfg.regime == "dapo":
            plan, groups = dapo_dynamic_sampling(
                policy,
                pool,
                order,
                cfg.batch_size,
                cfg.group_size,
                cfg.dapo_max_oversample,
                roll_rng,
                discard_uniform=cfg.dapo_discard_uniform,
            )
            ledger.charge("sample", plan.candidates_seen)
            ledger.charge("rollout", plan.candidates_seen * cfg.group_size)
            ledger.charge("reward", plan.candidates_seen * cfg.group_size)
        elif use_estimator:
            plan, scores = depo_filter(
                estimator, pool, order, cfg.batch_size, step, cfg.filter
            )
            ledger.charge("sample", plan.candidates_seen)
            ledger.charge("estimator", plan.candidates_seen)
            examined = [int(i) for i in order[: plan.candidates_seen]]
            scores_by_id = dict(zip(examined, scores.tolist()))
            if len(scores):
                pred_mean = float(scores.mean())
                pred_std = float(scores.std())
            kept_prompts = [pool[i] for i in plan.kept]
            groups = sample_rollout_batch(policy, kept_prompts, cfg.group_size, roll_rng)
            ledger.charge("rollout", len(groups) * cfg.group_size)
            ledger.charge("reward", len(groups) * cfg.group_size)
        else:
            plan = grpo_plain(order, cfg.batch_size)
            plan = replace_plan_regime(plan, cfg.regime)
            ledger.charge("sample", plan.candidates_seen)
            kept_prompts = [pool[i] for i in plan.kept]
            groups = sample_rollout_batch(policy, kept_prompts, cfg.group_size, roll_rng)
            ledger.charge("rollout", len(groups) * cfg.group_size)
            ledger.charge("reward", len(groups) * cfg.group_size)

        advantages = [group_advantages(g.rewards, cfg.grpo.std_floor) for g in groups]
        ledger.charge("adv_compute", len(groups))
        batch = [(pool[g.prompt_id], g, adv) for g, adv in zip(groups, advantages)]

        if batch:
            policy, fragment = grpo_step(policy, ref, batch, cfg.grpo)
            if not np.isfinite(policy.theta).all():
                raise TrainingFault(f"step {step}: non-finite policy parameters")
        else:
            fragment = {"mean_reward": None, "mean_adv_mag": None, "mean_kl": None}

        parts = {"de": None, "distill": None, "rank": None, "joint": None}
        pred_mae = None
        if use_estimator and batch:
            targets = make_targets(groups, policy, pool)
            feats = pool.features_matrix([t.prompt_id for t in targets])
            est_rng = substream(cfg.seed, LANE_ESTIMATOR, step)
            loss, grads, raw_parts = joint_loss_and_grad(
                estimator, feats, targets, cfg.est, est_rng
            )
            if not np.isfinite(loss):
                raise TrainingFault(f"step {step}: non-finite estimator loss")
            estimator = estimator_update(estimator, grads, cfg.est.learning_rate)
            ledger.charge("estimator", len(targets))
            parts = {k: float(raw_parts[k]) for k in ("de", "distill", "rank", "joint")}
            errors = [
                abs(scores_by_id[t.prompt_id] - t.reward)
                for t in targets
                if t.prompt_id in scores_by_id
            ]
            pred_mae = float(np.mean(errors)) if errors else None

        costs = ledger.next_step()
        record = StepMetrics(
            step=step,
            candidates=plan.candidates_seen,
            kept=len(plan.kept),
            dropped=len(plan.dropped),
            filter_ratio=plan.filter_ratio,
            short_batch=plan.short_batch,
            pool_live=len(live_ids),
            prune_failed=prune_failed,
            mean_reward=fragment["mean_reward"],
            mean_adv_mag=fragment["mean_adv_mag"],
            mean_kl=fragment["mean_kl"],
            loss_de=parts["de"],
            loss_distill=parts["distill"],
            loss_rank=parts["rank"],
            loss_joint=parts["joint"],
            pred_mean=pred_mean,
            pred_std=pred_std,
            pred_mae=pred_mae,
            policy_version=policy.version,
            estimator_version=estimator.version if estimator is not None else None,
            sample_units=costs["sample"],
            rollout_units=costs["rollout"],
            adv_compute_units=costs["adv_compute"],
            reward_units=costs["reward"],
            estimator_units=costs["estimator"],
        )
        metrics.append(record)
        if sink is not None:
            emit_metrics(record.to_record(), sink)

    return RunResult(
        config=cfg,
        metrics=metrics,
        policy=policy,
        ref_policy=ref,
        estimator=estimator,
        ledger=ledger,
        pool=pool,
        live_ids=live_ids,
    )


def replace_plan_regime(plan: BatchPlan, regime: str) -> BatchPlan:
    plan.regime = regime
    return plan


def save_run_outputs(result: RunResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.jsonl", "w") as fh:
        for m in result.metrics:
            emit_metrics(m.to_record(), fh)
    save_policy(result.policy, out / "policy.json")
    if result.estimator is not None:
        save_estimator(result.estimator, out / "estimator.json")
    save_pool(result.pool, out / "pool.jsonl")
    rows = accounting.summarize({result.config.regime: result.ledger}, baseline=result.config.regime)
    accounting.write_summary_csv(rows, out / "costs.csv")
    write_resolved_config(result.config, out / "resolved_config.ini")


def run_compare(cfg: ExperimentConfig, regimes=REGIMES) -> tuple[dict[str, RunResult], list[dict]]:
    """Run each regime on matched seeds and summarize costs against plain GRPO."""
    results = {}
    for regime in regimes:
        results[regime] = run_experiment(replace(cfg, regime=regime))
    rows = accounting.summarize({name: res.ledger for name, res in results.items()})
    return results, rows


ABLATION_AXES = ("rank_weight", "loss_form", "drop_rank", "drop_rank_and_distill")
RANK_WEIGHT_SWEEP = (0.0, 1.0, 3.0, 6.0, 10.0)


def _ablation_variants(cfg: ExperimentConfig, axis: str) -> list[tuple[str, ExperimentConfig]]:
    base = replace(cfg, regime="depo")
    if axis == "rank_weight":
        return [
            (f"w_rank={w:g}", replace(base, est=replace(base.est, w_rank=w)))
            for w in RANK_WEIGHT_SWEEP
        ]
    if axis == "loss_form":
        return [
            ("bce", replace(base, est=replace(base.est, de_loss="bce"))),
            ("mse", replace(base, est=replace(base.est, de_loss="mse"))),
        ]
    if axis == "drop_rank":
        return [
            ("base", base),
            ("no_rank", replace(base, est=replace(base.est, w_rank=0.0))),
        ]
    if axis == "drop_rank_and_distill":
        return [
            ("base", base),
            ("no_rank_no_distill", replace(base, est=replace(base.est, w_rank=0.0, w_distill=0.0))),
        ]
    raise ConfigError(f"ablation axis must be one of {ABLATION_AXES}, got {axis!r}")


def run_ablation(cfg: ExperimentConfig, axis: str) -> list[dict]:
    """Matched-seed variants along one axis; per-variant summary records."""
    rows = []
    for name, variant_cfg in _ablation_variants(cfg, axis):
        result = run_experiment(variant_cfg)
        rows.append(summarize_variant(name, result))
    return rows


def summarize_variant(name: str, result: RunResult) -> dict:
    cfg = result.config
    post = [m for m in result.metrics if m.step >= cfg.filter.warmup_steps]
    window = result.metrics[-max(1, len(result.metrics) // 10):]
    rewards = [m.mean_reward for m in window if m.mean_reward is not None]
    ratios = [m.filter_ratio for m in post]
    maes = [m.pred_mae for m in post if m.pred_mae is not None]
    if result.estimator is not None:
        scores = predict_difficulty_score(result.estimator, result.pool.features_matrix())
        pred_std = float(np.std(scores))
    else:
        pred_std = None
    return {
        "variant": name,
        "mean_reward": float(np.mean(rewards)) if rewards else None,
        "filter_ratio": float(np.mean(ratios)) if ratios else None,
        "pred_std": pred_std,
        "pred_mae": float(np.mean(maes)) if maes else None,
    }


def run_rank_weight_stream(
    cfg: ExperimentConfig, w_values=(0.0, 3.0), steps: int = 500
) -> dict[float, tuple[EstimatorModel, float]]:
    """Train one estimator per rank weight on an identical target stream.

    The stream comes from a plain (unfiltered) trajectory, so the estimators
    cannot influence the batches they see; matched initialization plus matched
    batches isolates the effect of the ranking term. Returns per-weight
    (model, std of predicted scores over the pool).
    """
    pool = build_pool(cfg)
    policy = init_policy(pool.num_features, cfg.init_skill)
    ref = policy.copy()
    models = {
        w: init_estimator(pool.num_features, cfg.est.hidden, substream(cfg.seed, LANE_ESTIMATOR))
        for w in w_values
    }
    for step in range(steps):
        cand_rng = substream(cfg.seed, LANE_CANDIDATES, step)
        roll_rng = substream(cfg.seed, LANE_ROLLOUTS, step)
        order = _candidate_order(cand_rng, np.arange(len(pool)))
        plan = grpo_plain(order, cfg.batch_size)
        prompts = [pool[i] for i in plan.kept]
        groups = sample_rollout_batch(policy, prompts, cfg.group_size, roll_rng)
        advantages = [group_advantages(g.rewards, cfg.grpo.std_floor) for g in groups]
        batch = [(pool[g.prompt_id], g, adv) for g, adv in zip(groups, advantages)]
        policy, _ = grpo_step(policy, ref, batch, cfg.grpo)
        targets = make_targets(groups, policy, pool)
        feats = pool.features_matrix([t.prompt_id for t in targets])
        for w in w_values:
            est_cfg = replace(cfg.est, w_rank=w)
            est_rng = substream(cfg.seed, LANE_ESTIMATOR, step)
            _, grads, _ = joint_loss_and_grad(models[w], feats, targets, est_cfg, est_rng)
            models[w] = estimator_update(models[w], grads, cfg.est.learning_rate)
    out = {}
    for w, model in models.items():
        scores = predict_difficulty_score(model, pool.features_matrix())
        out[w] = (model, float(np.std(scores)))
    return out


def run_route(cfg: ExperimentConfig) -> list[router_mod.RoutingReport]:
    """Tau sweep over a frozen estimator and skill-separated small/large policies."""
    spec = cfg.router
    est_path = spec.estimator
    small_path = spec.small_policy
    pool_path = ""
    if spec.from_run:
        run_dir = Path(spec.from_run)
        est_path = est_path or str(run_dir / "estimator.json")
        small_path = small_path or str(run_dir / "policy.json")
        candidate_pool = run_dir / "pool.jsonl"
        if candidate_pool.exists():
            pool_path = str(candidate_pool)
    if not est_path:
        raise ConfigError(
            "router requires a frozen estimator: set [router] estimator or from_run"
        )
    if not small_path:
        raise ConfigError(
            "router requires a small policy snapshot: set [router] small_policy or from_run"
        )
    estimator = load_estimator(est_path)
    small = load_policy(small_path)
    large = small.copy()
    large.theta = large.theta.copy()
    large.theta[0] += spec.skill_shift
    pool = load_pool(pool_path) if pool_path else build_pool(cfg)
    return router_mod.route_sweep(
        pool, estimator, small, large, list(spec.taus), spec.eval_rollouts, cfg.seed
    )


# --- configuration files ---------------------------------------------------

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_floats(raw: str) -> tuple[float, ...]:
    items = [piece.strip() for piece in raw.split(",") if piece.strip()]
    return tuple(float(piece) for piece in items)


# section -> key -> (parser, target dataclass field)
_SCHEMA = {
    "run": {
        "regime": str,
        "steps": int,
        "batch_size": int,
        "group_size": int,
        "seed": int,
        "out_dir": str,
        "init_skill": float,
    },
    "pool": {
        "profile": str,
        "n": int,
        "noise_dims": int,
        "noise_scale": float,
        "lo": float,
        "hi": float,
        "easy_mass": float,
        "hard_mass": float,
        "mid_lo": float,
        "mid_hi": float,
        "mu_easy": float,
        "mu_hard": float,
        "mix": float,
        "path": str,
    },
    "grpo": {
        "clip_eps": float,
        "kl_beta": float,
        "learning_rate": float,
        "inner_epochs": int,
        "std_floor": float,
    },
    "estimator": {
        "w_distill": float,
        "w_rank": float,
        "margin": float,
        "pair_gap": float,
        "learning_rate": float,
        "pair_cap": int,
        "de_loss": str,
        "hidden": int,
    },
    "filter": {
        "warmup_steps": int,
        "keep_low": float,
        "keep_high": float,
        "enabled": _parse_bool,
        "refill": _parse_bool,
    },
    "dapo": {"max_oversample": float, "discard_uniform": _parse_bool},
    "offline": {
        "stage_interval": int,
        "keep_lo": float,
        "keep_hi": float,
        "k_eval": int,
    },
    "router": {
        "taus": _parse_floats,
        "eval_rollouts": int,
        "skill_shift": float,
        "from_run": str,
        "estimator": str,
        "small_policy": str,
    },
}


def _collect_section(parser: ConfigParser, section: str) -> dict:
    values = {}
    if section not in _SCHEMA:
        raise ConfigError(f"unknown config section [{section}]")
    if not parser.has_section(section):
        return values
    known = _SCHEMA[section]
    for key, raw in parser.items(section):
        if key not in known:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        try:
            values[key] = known[key](raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] invalid value for {key!r}: {exc}") from exc
    return values


def config_from_sections(sections: dict[str, dict]) -> ExperimentConfig:
    for section in sections:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
    run = sections.get("run", {})
    grpo_kwargs = dict(sections.get("grpo", {}))
    group_size = run.get("group_size", 8)
    dapo = sections.get("dapo", {})
    try:
        cfg = ExperimentConfig(
            **run,
            pool=PoolConfig(**sections.get("pool", {})),
            grpo=GrpoConfig(group_size=group_size, **grpo_kwargs),
            est=EstimatorLossConfig(**sections.get("estimator", {})),
            filter=FilterConfig(**sections.get("filter", {})),
            dapo_max_oversample=dapo.get("max_oversample", 4.0),
            dapo_discard_uniform=dapo.get("discard_uniform", True),
            offline=OfflineConfig(**sections.get("offline", {})),
            router=RouterSpec(**sections.get("router", {})),
        )
    except TypeError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return cfg


def load_config(path) -> ExperimentConfig:
    """Parse a strict key = value config file into an ExperimentConfig."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh)
    sections = {name: _collect_section(parser, name) for name in parser.sections()}
    return config_from_sections(sections)


def resolved_sections(cfg: ExperimentConfig) -> dict[str, dict[str, str]]:
    def fmt(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, tuple):
            return ", ".join(repr(v) for v in value)
        if isinstance(value, float):
            return repr(value)
        return str(value)

    return {
        "run": {
            "regime": cfg.regime,
            "steps": fmt(cfg.steps),
            "batch_size": fmt(cfg.batch_size),
            "group_size": fmt(cfg.group_size),
            "seed": fmt(cfg.seed),
            "out_dir": cfg.out_dir,
            "init_skill": fmt(cfg.init_skill),
        },
        "pool": {key: fmt(getattr(cfg.pool, key)) for key in _SCHEMA["pool"]},
        "grpo": {key: fmt(getattr(cfg.grpo, key)) for key in _SCHEMA["grpo"]},
        "estimator": {key: fmt(getattr(cfg.est, key)) for key in _SCHEMA["estimator"]},
        "filter": {key: fmt(getattr(cfg.filter, key)) for key in _SCHEMA["filter"]},
        "dapo": {
            "max_oversample": fmt(cfg.dapo_max_oversample),
            "discard_uniform": fmt(cfg.dapo_discard_uniform),
        },
        "offline": {key: fmt(getattr(cfg.offline, key)) for key in _SCHEMA["offline"]},
        "router": {key: fmt(getattr(cfg.router, key)) for key in _SCHEMA["router"]},
    }


def write_resolved_config(cfg: ExperimentConfig, path) -> None:
    parser = ConfigParser()
    for section, values in resolved_sections(cfg).items():
        parser.add_section(section)
        for key, value in values.items():
            parser.set(section, key, value)
    with open(path, "w") as fh:
        parser.write(fh)
