"""Posterior summaries per replicate and bias/coverage tables across replicates."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

LEVELS = (80, 90, 95)
COLUMNS = ("parameter", "bias_mean", "bias_median", "avg_sd", "cov80", "cov90", "cov95")


@dataclass
class ReplicateResult:
    """Posterior summary of one chain. ``intervals[level]`` is a list of
    (lower, upper) pairs, one per parameter."""

    replicate: int
    names: tuple
    mean: list
    median: list
    sd: list
    intervals: dict
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["names"] = list(self.names)
        d["intervals"] = {str(k): v for k, v in self.intervals.items()}
        return d

    @classmethod
    def from_dict(cls, d) -> "ReplicateResult":
        return cls(int(d["replicate"]), tuple(d["names"]), list(d["mean"]), list(d["median"]),
                   list(d["sd"]), {int(k): [tuple(p) for p in v] for k, v in d["intervals"].items()},
                   dict(d.get("meta", {})))


def summarize_samples(samples, names, replicate: int = 0, meta=None) -> ReplicateResult:
    """Mean, median, sd and equal-tailed intervals of posterior draws (rows)."""
    s = np.atleast_2d(np.asarray(samples, float))
    if s.shape[0] < 2:
        raise ValueError("need at least two posterior draws")
    intervals = {}
    for level in LEVELS:
        a = (1 - level / 100) / 2
        lo, hi = np.quantile(s, [a, 1 - a], axis=0)
        intervals[level] = [(float(x), float(y)) for x, y in zip(lo, hi)]
    return ReplicateResult(replicate, tuple(names), s.mean(axis=0).tolist(),
                           np.median(s, axis=0).tolist(), s.std(axis=0, ddof=1).tolist(),
                           intervals, dict(meta or {}))


@dataclass
class MetricsTable:
    rows: list  # dicts keyed by COLUMNS
    n_replicates: int

    def row(self, parameter: str) -> dict:
        for r in self.rows:
            if r["parameter"] == parameter:
                return r
        raise KeyError(parameter)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: (r[k] if k == "parameter" else repr(float(r[k]))) for k in COLUMNS})

    @classmethod
    def from_csv(cls, path) -> "MetricsTable":
        with open(path, newline="") as fh:
            rows = [{k: (v if k == "parameter" else float(v)) for k, v in r.items()}
                    for r in csv.DictReader(fh)]
        return cls(rows, -1)

    def format(self) -> str:
        lines = ["{:<10} {:>10} {:>11} {:>8} {:>6} {:>6} {:>6}".format(*COLUMNS)]
        for r in self.rows:
            lines.append("{:<10} {:>10.4f} {:>11.4f} {:>8.4f} {:>6.0f} {:>6.0f} {:>6.0f}".format(
                r["parameter"], r["bias_mean"], r["bias_median"], r["avg_sd"],
                r["cov80"], r["cov90"], r["cov95"]))
        return "\n".join(lines)


def compute_metrics(results, true_theta) -> MetricsTable:
    """Bias of posterior mean/median, average sd and coverage (%) over replicates.

    Replicates are sorted by index first so the reduction order, and hence
    every float in the table, does not depend on the order of ``results``.
    """
    results = sorted(results, key=lambda r: r.replicate)
    if not results:
        raise ValueError("no replicate results")
    if true_theta is None:
        raise ValueError("metrics need a known true parameter (simulated-data study)")
    names = results[0].names
    truth = np.asarray(true_theta, float)
    if truth.size != len(names):
        raise ValueError("true parameter has the wrong dimension")
    mean = np.array([r.mean for r in results])
    med = np.array([r.median for r in results])
    sd = np.array([r.sd for r in results])
    rows = []
    for j, name in enumerate(names):
        row = {"parameter": name,
               "bias_mean": float(np.mean(mean[:, j] - truth[j])),
               "bias_median": float(np.mean(med[:, j] - truth[j])),
               "avg_sd": float(np.mean(sd[:, j]))}
        for level in LEVELS:
            hits = [r.intervals[level][j][0] <= truth[j] <= r.intervals[level][j][1] for r in results]
            row[f"cov{level}"] = 100.0 * float(np.mean(hits))
        rows.append(row)
    return MetricsTable(rows, len(results))


def save_results(path, results) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in results], indent=1))


def load_results(path) -> list:
    return [ReplicateResult.from_dict(d) for d in json.loads(Path(path).read_text())]
