import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from depolab.cli import main as cli_main
from depolab.errors import ConfigError
from depolab.experiment import (
    ExperimentConfig,
    PoolConfig,
    load_config,
    read_metrics,
    run_compare,
    run_experiment,
    run_route,
    save_run_outputs,
    write_resolved_config,
)


def desk_cfg(**overrides):
    base = ExperimentConfig(
        steps=12,
        batch_size=8,
        group_size=8,
        seed=0,
        pool=PoolConfig(n=80),
        filter=replace(ExperimentConfig().filter, warmup_steps=4),
    )
    return replace(base, **overrides)


class TestConfigFiles:
    def test_minimal_config_gets_defaults(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[run]\nregime = grpo\nseed = 3\n")
        cfg = load_config(path)
        assert cfg.regime == "grpo"
        assert cfg.seed == 3
        assert cfg.steps == 1000
        assert cfg.batch_size == 128
        assert cfg.group_size == 8
        assert cfg.filter.warmup_steps == 100
        assert cfg.est.w_distill == 0.5
        assert cfg.est.w_rank == 3.0

    def test_unknown_key_rejected_by_name(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[run]\nregime = grpo\n\n[grpo]\nclip_epsilon = 0.2\n")
        with pytest.raises(ConfigError, match="clip_epsilon"):
            load_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[run]\nregime = grpo\n\n[optimizer]\nlr = 1\n")
        with pytest.raises(ConfigError, match="optimizer"):
            load_config(path)

    def test_invariant_violation_names_key(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[run]\nregime = grpo\n\n[grpo]\nclip_eps = 1.5\n")
        with pytest.raises(ConfigError, match="clip_eps"):
            load_config(path)

    def test_bad_value_type(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text("[run]\nsteps = soon\n")
        with pytest.raises(ConfigError, match="steps"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.ini")

    def test_resolved_round_trip(self, tmp_path):
        cfg = desk_cfg()
        path = tmp_path / "resolved.ini"
        write_resolved_config(cfg, path)
        reloaded = load_config(path)
        assert reloaded == cfg

    def test_round_trip_identical_run(self, tmp_path):
        cfg = desk_cfg(regime="depo")
        write_resolved_config(cfg, tmp_path / "resolved.ini")
        reloaded = load_config(tmp_path / "resolved.ini")
        a = run_experiment(cfg)
        b = run_experiment(reloaded)
        assert [m.to_record() for m in a.metrics] == [m.to_record() for m in b.metrics]


class TestRunExperiment:
    def test_depo_disabled_is_grpo_bit_identical(self):
        grpo = run_experiment(desk_cfg(regime="grpo"))
        depo_off = run_experiment(
            desk_cfg(regime="depo", filter=replace(desk_cfg().filter, enabled=False))
        )
        assert [m.to_record() for m in grpo.metrics] == [m.to_record() for m in depo_off.metrics]
        assert np.array_equal(grpo.policy.theta, depo_off.policy.theta)

    def test_regime_reduction_dapo(self):
        # max_oversample = 1 with uniform-group discarding disabled walks the
        # same candidate prefix with the same rollout stream as plain batches
        grpo = run_experiment(desk_cfg(regime="grpo"))
        dapo = run_experiment(
            desk_cfg(regime="dapo", dapo_max_oversample=1.0, dapo_discard_uniform=False)
        )
        assert np.array_equal(grpo.policy.theta, dapo.policy.theta)
        assert grpo.series("mean_reward") == dapo.series("mean_reward")

    def test_warmup_equivalence_policies(self):
        warm = 6
        cfg_depo = desk_cfg(regime="depo", steps=warm, filter=replace(desk_cfg().filter, warmup_steps=warm))
        cfg_grpo = desk_cfg(regime="grpo", steps=warm)
        depo = run_experiment(cfg_depo)
        grpo = run_experiment(cfg_grpo)
        assert np.array_equal(depo.policy.theta, grpo.policy.theta)
        assert depo.series("mean_reward") == grpo.series("mean_reward")

    def test_metrics_one_record_per_step_ordered(self):
        result = run_experiment(desk_cfg(regime="depo"))
        assert [m.step for m in result.metrics] == list(range(12))

    def test_determinism_byte_identical(self, tmp_path):
        cfg = desk_cfg(regime="depo")
        for name in ("a", "b"):
            result = run_experiment(cfg)
            save_run_outputs(result, tmp_path / name)
        a = (tmp_path / "a" / "metrics.jsonl").read_bytes()
        b = (tmp_path / "b" / "metrics.jsonl").read_bytes()
        assert a == b

    def test_zero_steps(self):
        result = run_experiment(desk_cfg(steps=0))
        assert result.metrics == []

    def test_single_prompt_pool(self):
        cfg = desk_cfg(pool=PoolConfig(n=1), batch_size=1, steps=5)
        result = run_experiment(cfg)
        assert len(result.metrics) == 5

    def test_group_size_two(self):
        cfg = desk_cfg(group_size=2, grpo=replace(desk_cfg().grpo, group_size=2))
        result = run_experiment(cfg)
        assert len(result.metrics) == 12

    def test_offline_prunes_pool(self):
        cfg = desk_cfg(
            regime="offline",
            steps=8,
            offline=replace(desk_cfg().offline, stage_interval=4, keep_lo=0.01, keep_hi=0.99),
        )
        result = run_experiment(cfg)
        assert result.metrics[-1].pool_live <= 80

    def test_costs_match_plans(self):
        # conservation: total rollout units recomputable from the plans
        result = run_experiment(desk_cfg(regime="depo"))
        expected = sum(m.kept * 8 for m in result.metrics)
        assert result.ledger.totals()["rollout"] == expected

    def test_dapo_charges_discards(self):
        result = run_experiment(desk_cfg(regime="dapo"))
        expected = sum(m.candidates * 8 for m in result.metrics)
        assert result.ledger.totals()["rollout"] == expected


class TestCompare:
    def test_all_regimes_same_steps(self):
        results, rows = run_compare(desk_cfg(steps=6))
        assert set(results) == {"grpo", "depo", "dapo", "offline"}
        by_name = {r["regime"]: r for r in rows}
        assert by_name["grpo"]["ratio_vs_grpo"] == pytest.approx(1.0)
        for row in rows:
            assert row["total"] == pytest.approx(
                sum(row[c] for c in ("sample", "rollout", "adv_compute", "reward", "estimator"))
            )


class TestRouteOrchestration:
    def test_route_from_run(self, tmp_path):
        cfg = desk_cfg(regime="depo", steps=6, out_dir=str(tmp_path / "run"))
        result = run_experiment(cfg)
        save_run_outputs(result, cfg.out_dir)
        route_cfg = replace(
            cfg, router=replace(cfg.router, from_run=cfg.out_dir, taus=(0.0, 0.5, 1.0))
        )
        reports = run_route(route_cfg)
        assert len(reports) == 3
        larges = [r.queries_to_large for r in reports]
        assert all(a <= b for a, b in zip(larges, larges[1:]))

    def test_route_requires_snapshots(self):
        with pytest.raises(ConfigError, match="estimator"):
            run_route(desk_cfg())


class TestCli:
    def test_train_writes_outputs(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.ini"
        cfg_path.write_text(
            "[run]\nregime = depo\nsteps = 6\nbatch_size = 8\nseed = 1\n"
            "[pool]\nn = 60\n[filter]\nwarmup_steps = 2\n"
        )
        out = tmp_path / "run"
        rc = cli_main(["train", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        assert (out / "metrics.jsonl").exists()
        assert (out / "policy.json").exists()
        assert (out / "estimator.json").exists()
        assert (out / "pool.jsonl").exists()
        assert (out / "resolved_config.ini").exists()
        records = read_metrics(out / "metrics.jsonl")
        assert len(records) == 6

    def test_cli_seed_and_steps_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.ini"
        cfg_path.write_text("[run]\nregime = grpo\nsteps = 50\nbatch_size = 4\n[pool]\nn = 40\n")
        out = tmp_path / "run"
        rc = cli_main(
            ["train", "--config", str(cfg_path), "--out", str(out), "--steps", "3", "--seed", "9"]
        )
        assert rc == 0
        records = read_metrics(out / "metrics.jsonl")
        assert len(records) == 3

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.ini"
        cfg_path.write_text("[run]\nregime = fancy\n")
        rc = cli_main(["train", "--config", str(cfg_path)])
        assert rc == 2
        assert "regime" in capsys.readouterr().err

    def test_compare_route_plot_pipeline(self, tmp_path):
        cfg_path = tmp_path / "cfg.ini"
        cfg_path.write_text(
            "[run]\nregime = depo\nsteps = 6\nbatch_size = 8\nseed = 2\n"
            "[pool]\nn = 60\n[filter]\nwarmup_steps = 2\n"
            "[router]\ntaus = 0.0, 0.5\neval_rollouts = 4\n"
        )
        comp = tmp_path / "comp"
        rc = cli_main(["compare", "--config", str(cfg_path), "--out", str(comp), "--no-figures"])
        assert rc == 0
        assert (comp / "compare.csv").exists()
        for regime in ("grpo", "depo", "dapo", "offline"):
            assert (comp / regime / "metrics.jsonl").exists()

        rc = cli_main(
            [
                "route",
                "--config",
                str(cfg_path),
                "--out",
                str(comp),
                "--from-run",
                str(comp / "depo"),
                "--no-figures",
            ]
        )
        assert rc == 0
        assert (comp / "route.csv").exists()

        rc = cli_main(["plot", "--run", str(comp / "depo")])
        assert rc == 0
        assert (comp / "depo" / "reward_filter.png").exists()
        assert (comp / "depo" / "costs.png").exists()

    def test_ablate_cli(self, tmp_path):
        cfg_path = tmp_path / "cfg.ini"
        cfg_path.write_text(
            "[run]\nregime = depo\nsteps = 6\nbatch_size = 8\nseed = 2\n"
            "[pool]\nn = 60\n[filter]\nwarmup_steps = 2\n"
        )
        out = tmp_path / "ab"
        rc = cli_main(
            ["ablate", "--config", str(cfg_path), "--out", str(out), "--axis", "drop_rank", "--no-figures"]
        )
        assert rc == 0
        assert (out / "ablate_drop_rank.csv").exists()
