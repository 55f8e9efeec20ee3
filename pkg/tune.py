"""Scratch harness for picking desk-scale dynamics defaults. Not part of the package."""
import sys
import time
from dataclasses import replace

import numpy as np

from depolab.experiment import ExperimentConfig, PoolConfig, run_compare, run_experiment


def desk(lr, beta, seed=0, steps=1000, noise_scale=0.5, skill=1.0, **kw):
    base = ExperimentConfig(
        steps=steps,
        batch_size=32,
        group_size=8,
        seed=seed,
        init_skill=skill,
        pool=PoolConfig(n=2000, noise_scale=noise_scale),
    )
    return replace(
        base,
        grpo=replace(base.grpo, learning_rate=lr, kl_beta=beta),
        **kw,
    )


def study(name, lr, beta, seeds=(0,), steps=1000, **kw):
    for seed in seeds:
        t0 = time.time()
        depo = run_experiment(desk(lr, beta, seed, steps, **kw))
        grpo = run_experiment(replace(desk(lr, beta, seed, steps, **kw), regime="grpo"))
        post = [m for m in depo.metrics if 200 <= m.step < steps]
        gpost = [m for m in grpo.metrics if 200 <= m.step < steps]
        ratios = [m.filter_ratio for m in post]
        empty = sum(1 for m in post if m.kept == 0)
        wins = np.mean([
            (d.mean_reward is not None and g.mean_reward is not None and d.mean_reward >= g.mean_reward)
            for d, g in zip(post, gpost)
        ])
        maes = [m.pred_mae for m in post if m.pred_mae is not None]
        series_err = [
            abs(np.mean([s for s in (m.pred_mean,) if s is not None]) - m.mean_reward)
            for m in post
            if m.pred_mean is not None and m.mean_reward is not None
        ]
        d_reward = np.mean([m.mean_reward for m in post if m.mean_reward is not None])
        g_reward = np.mean([m.mean_reward for m in gpost if m.mean_reward is not None])
        arc = [
            np.mean([m.filter_ratio for m in depo.metrics if lo <= m.step < lo + 100])
            for lo in range(100, steps, 100)
        ]
        # theta drift
        th = depo.policy.theta
        print(
            f"{name} seed{seed}: ratio={np.mean(ratios):.3f} empty={empty} wins={wins:.2f} "
            f"maeP={np.mean(maes) if maes else float('nan'):.3f} "
            f"dR={d_reward:.3f} gR={g_reward:.3f} "
            f"th0={th[0]:+.2f} th1={th[1]:+.2f} |thn|={np.linalg.norm(th[2:]):.2f} "
            f"({time.time()-t0:.1f}s)"
        )
        print("   arc:", " ".join(f"{a:.2f}" for a in arc))


if __name__ == "__main__":
    from depolab import sim_core

    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    for name, span, lr, beta in [
        ("M sp(2,.75) lr.001 b.25 ", (2.0, 0.75), 0.001, 0.25),
        ("P sp(2,.75) lr.0007 b.25", (2.0, 0.75), 0.0007, 0.25),
        ("Q sp(1.6,.5) lr.001 b.25", (1.6, 0.5), 0.001, 0.25),
        ("R sp(2,.75) lr.001 b.5  ", (2.0, 0.75), 0.001, 0.5),
        ("S sp(2,.75) lr.0005 b.1 ", (2.0, 0.75), 0.0005, 0.1),
    ]:
        if which in ("all", name[0].lower()):
            sim_core.JSHAPED_EASY_SPAN = span
            study(name, lr, beta)
