"""Render metric series and summary tables to static image files.

Presentation only: every figure is derived from the JSONL/CSV outputs, so
plotting never participates in run determinism.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .accounting import CATEGORIES
from .experiment import read_metrics

plt.rcParams.update({
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
})


def _series(records: list[dict], key: str):
    steps = [r["step"] for r in records if r.get(key) is not None]
    vals = [r[key] for r in records if r.get(key) is not None]
    return steps, vals


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_run(run_dir, out_dir=None) -> list[Path]:
    """Reward/filter, estimator-loss, tracking, and cost panels for one run."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir else run_dir
    out.mkdir(parents=True, exist_ok=True)
    records = read_metrics(run_dir / "metrics.jsonl")
    written = []

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ax1.plot(*_series(records, "mean_reward"), lw=1.0, color="tab:blue")
    ax1.set_ylabel("mean reward")
    ax2.plot(*_series(records, "filter_ratio"), lw=1.0, color="tab:orange")
    ax2.set_ylabel("filter ratio")
    ax2.set_xlabel("step")
    ax2.set_ylim(-0.05, 1.05)
    written.append(_save(fig, out / "reward_filter.png"))

    loss_keys = ["loss_de", "loss_distill", "loss_rank", "loss_joint"]
    if any(r.get("loss_joint") is not None for r in records):
        fig, ax = plt.subplots(figsize=(7, 3.5))
        for key in loss_keys:
            steps, vals = _series(records, key)
            if steps:
                ax.plot(steps, vals, lw=1.0, label=key.removeprefix("loss_"))
        ax.set_xlabel("step")
        ax.set_ylabel("estimator loss")
        ax.legend()
        written.append(_save(fig, out / "estimator_losses.png"))

        fig, ax = plt.subplots(figsize=(7, 3.5))
        steps, pred = _series(records, "pred_mean")
        ax.plot(steps, pred, lw=1.0, label="predicted score (candidates)")
        steps, realized = _series(records, "mean_reward")
        ax.plot(steps, realized, lw=1.0, label="realized mean reward (kept)")
        steps, mae = _series(records, "pred_mae")
        ax.plot(steps, mae, lw=1.0, label="per-step MAE")
        ax.set_xlabel("step")
        ax.legend()
        written.append(_save(fig, out / "tracking.png"))

    fig, ax = plt.subplots(figsize=(7, 3.5))
    for cat in CATEGORIES:
        steps = [r["step"] for r in records]
        vals = np.cumsum([r[f"{cat}_units"] for r in records])
        ax.plot(steps, vals, lw=1.0, label=cat)
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative cost units")
    ax.legend()
    written.append(_save(fig, out / "costs.png"))
    return written


def plot_compare(compare_dir, out_dir=None) -> list[Path]:
    """Overlay reward curves per regime and bar the cost totals."""
    compare_dir = Path(compare_dir)
    out = Path(out_dir) if out_dir else compare_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for sub in sorted(compare_dir.iterdir()):
        metrics = sub / "metrics.jsonl"
        if sub.is_dir() and metrics.exists():
            records = read_metrics(metrics)
            ax.plot(*_series(records, "mean_reward"), lw=1.0, label=sub.name)
    ax.set_xlabel("step")
    ax.set_ylabel("mean training reward")
    ax.legend()
    written.append(_save(fig, out / "compare_rewards.png"))

    table = compare_dir / "compare.csv"
    if table.exists():
        with open(table) as fh:
            rows = list(csv.DictReader(fh))
        fig, ax = plt.subplots(figsize=(7, 4))
        regimes = [r["regime"] for r in rows]
        bottoms = np.zeros(len(rows))
        for cat in CATEGORIES:
            vals = np.array([float(r[cat]) for r in rows])
            ax.bar(regimes, vals, bottom=bottoms, label=cat)
            bottoms += vals
        ax.set_ylabel("cost units")
        ax.legend()
        written.append(_save(fig, out / "compare_costs.png"))
    return written


def plot_route(route_csv, out_dir=None) -> list[Path]:
    route_csv = Path(route_csv)
    out = Path(out_dir) if out_dir else route_csv.parent
    out.mkdir(parents=True, exist_ok=True)
    with open(route_csv) as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: float(r["tau"]))
    taus = [float(r["tau"]) for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax1.plot(taus, [float(r["accuracy"]) for r in rows], "o-", lw=1.0)
    ax1.set_xlabel("tau")
    ax1.set_ylabel("cascade accuracy")
    ax2.plot(taus, [float(r["pct_small"]) for r in rows], "o-", lw=1.0, color="tab:green")
    ax2.set_xlabel("tau")
    ax2.set_ylabel("fraction routed to small")
    ax2.set_ylim(-0.05, 1.05)
    return [_save(fig, out / "route.png")]


def plot_ablation(ablate_csv, out_dir=None) -> list[Path]:
    ablate_csv = Path(ablate_csv)
    out = Path(out_dir) if out_dir else ablate_csv.parent
    out.mkdir(parents=True, exist_ok=True)
    with open(ablate_csv) as fh:
        rows = list(csv.DictReader(fh))
    variants = [r["variant"] for r in rows]
    keys = ["mean_reward", "filter_ratio", "pred_std"]
    fig, axes = plt.subplots(1, len(keys), figsize=(3 * len(keys), 3.2))
    for ax, key in zip(axes, keys):
        vals = [float(r[key]) if r[key] not in ("", "None") else np.nan for r in rows]
        ax.bar(variants, vals)
        ax.set_ylabel(key)
        ax.tick_params(axis="x", rotation=45)
    return [_save(fig, out / f"{ablate_csv.stem}.png")]


def plot_any(run_dir, out_dir=None) -> list[Path]:
    """Render whatever artifacts exist under run_dir."""
    run_dir = Path(run_dir)
    written = []
    if (run_dir / "metrics.jsonl").exists():
        written += plot_run(run_dir, out_dir)
    if (run_dir / "compare.csv").exists() or any(
        (d / "metrics.jsonl").exists() for d in run_dir.iterdir() if d.is_dir()
    ):
        written += plot_compare(run_dir, out_dir)
    if (run_dir / "route.csv").exists():
        written += plot_route(run_dir / "route.csv", out_dir)
    for csv_path in sorted(run_dir.glob("ablate_*.csv")):
        written += plot_ablation(csv_path, out_dir)
    return written
