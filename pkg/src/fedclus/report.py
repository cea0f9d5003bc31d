"""Report records and their JSON round trip."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

METRIC_NAMES = ("loss", "accuracy", "precision", "recall", "f1")
FINAL_METRIC_NAMES = METRIC_NAMES + ("auc", "ks")


def five_number_summary(values) -> dict[str, float]:
    """min, first quartile, median, mean, max; quartiles interpolate linearly between ranks."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("no values to summarize")
    return {
        "min": float(v.min()),
        "q1": float(np.quantile(v, 0.25)),
        "median": float(np.quantile(v, 0.5)),
        "mean": float(np.mean(v)),
        "max": float(v.max()),
    }


@dataclass
class RoundRecord:
    round: int
    loss: float
    accuracy: float
    precision: float
    recall: float
    f1: float


@dataclass
class FinalEval:
    roc: list  # [[fpr, tpr], ...]
    auc: float
    ks: float
    ks_point: list  # [fpr, tpr, threshold]
    confusion: dict  # tp/fp/fn/tn
    threshold: float


@dataclass
class RunReport:
    algorithm: str
    seed: int
    weight_mode: str
    tiers: str
    rounds: list  # list[RoundRecord]
    final: FinalEval
    ledger: dict  # messages, bytes, per-link-class counts
    latency: dict  # bandwidth profile -> seconds per round
    cluster_sizes: list = field(default_factory=list)  # groups per client

    def final_metrics(self) -> dict[str, float]:
        last = self.rounds[-1]
        out = {name: getattr(last, name) for name in METRIC_NAMES}
        out["auc"] = self.final.auc
        out["ks"] = self.final.ks
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d["rounds"] = [RoundRecord(**r) for r in d["rounds"]]
        d["final"] = FinalEval(**d["final"])
        return cls(**d)


@dataclass
class ExperimentReport:
    config: dict
    runs: list  # list[RunReport]
    summary: dict  # algorithm -> metric -> five-number summary
    deltas: dict  # "a-b" -> metric -> five-number summary of per-seed differences
    created: str = ""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        d = dict(d)
        d["runs"] = [RunReport.from_dict(r) for r in d["runs"]]
        return cls(**d)

    def runs_for(self, algorithm: str) -> list[RunReport]:
        return [r for r in self.runs if r.algorithm == algorithm]

    @property
    def algorithms(self) -> list[str]:
        seen: list[str] = []
        for r in self.runs:
            if r.algorithm not in seen:
                seen.append(r.algorithm)
        return seen


# baseline each clustered variant is compared against
DELTA_PAIRS = (("fedclusavg", "fedavg"), ("fedclusavg_plus", "fedavg_plus"))


def summarize(runs: list[RunReport]) -> tuple[dict, dict]:
    """Per-algorithm five-number summaries and paired-by-seed deltas."""
    algos: list[str] = []
    for r in runs:
        if r.algorithm not in algos:
            algos.append(r.algorithm)
    by_algo = {a: {r.seed: r.final_metrics() for r in runs if r.algorithm == a} for a in algos}
    summary = {
        a: {m: five_number_summary([v[m] for v in by_algo[a].values()]) for m in FINAL_METRIC_NAMES}
        for a in algos
    }
    pairs = [(a, b) for a, b in DELTA_PAIRS if a in by_algo and b in by_algo]
    if not pairs:
        pairs = [(a, algos[0]) for a in algos[1:]]
    deltas = {}
    for a, b in pairs:
        seeds = [s for s in by_algo[a] if s in by_algo[b]]
        if not seeds:
            continue
        deltas[f"{a}-{b}"] = {
            m: five_number_summary([by_algo[a][s][m] - by_algo[b][s][m] for s in seeds])
            for m in FINAL_METRIC_NAMES
        }
    return summary, deltas
