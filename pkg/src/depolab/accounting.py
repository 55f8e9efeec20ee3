"""Abstract-unit cost ledger mirroring a per-step runtime breakdown.

One rollout unit is one generated response; reward units are charged per
evaluated response; sample units per candidate prompt processed; estimator
units per score or per training target. Unit weights translate raw counts
into pseudo-seconds when desired (all 1.0 by default).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

CATEGORIES = ("sample", "rollout", "adv_compute", "reward", "estimator")


@dataclass
class CostLedger:
    unit_weights: dict[str, float] = field(
        default_factory=lambda: {c: 1.0 for c in CATEGORIES}
    )
    step_records: list[dict[str, float]] = field(default_factory=list)
    _current: dict[str, float] = field(default_factory=lambda: {c: 0.0 for c in CATEGORIES})

    def charge(self, category: str, amount: float) -> None:
        if category not in CATEGORIES:
            raise ValueError(f"unknown cost category {category!r}")
        if amount < 0:
            raise ValueError(f"cost amount must be >= 0, got {amount}")
        self._current[category] += amount

    def current(self) -> dict[str, float]:
        return dict(self._current)

    def next_step(self) -> dict[str, float]:
        """Close out the running step and append its record."""
        record = dict(self._current)
        self.step_records.append(record)
        self._current = {c: 0.0 for c in CATEGORIES}
        return record

    @property
    def num_steps(self) -> int:
        return len(self.step_records)

    def totals(self) -> dict[str, float]:
        out = {c: 0.0 for c in CATEGORIES}
        for rec in self.step_records:
            for c in CATEGORIES:
                out[c] += rec[c]
        return out

    def weighted_totals(self) -> dict[str, float]:
        return {c: v * self.unit_weights[c] for c, v in self.totals().items()}

    def weighted_total(self) -> float:
        return float(sum(self.weighted_totals().values()))

    def series(self, category: str) -> np.ndarray:
        return np.array([rec[category] for rec in self.step_records])


def summarize(ledgers: dict[str, CostLedger], baseline: str = "grpo") -> list[dict]:
    """Per-regime weighted totals and total ratio against the baseline regime."""
    steps = {name: ledger.num_steps for name, ledger in ledgers.items()}
    if len(set(steps.values())) > 1:
        raise ValueError(f"cost comparison requires equal step counts, got {steps}")
    if baseline not in ledgers:
        raise ValueError(f"baseline regime {baseline!r} missing from comparison")
    base_total = ledgers[baseline].weighted_total()
    rows = []
    for name, ledger in ledgers.items():
        weighted = ledger.weighted_totals()
        total = ledger.weighted_total()
        row = {"regime": name}
        row.update({c: weighted[c] for c in CATEGORIES})
        row["total"] = total
        row["ratio_vs_grpo"] = total / base_total if base_total > 0 else float("nan")
        rows.append(row)
    return rows


def write_summary_csv(rows: list[dict], path) -> None:
    fieldnames = ["regime", *CATEGORIES, "total", "ratio_vs_grpo"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
