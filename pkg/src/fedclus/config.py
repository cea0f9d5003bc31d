"""Experiment configuration: JSON schema, defaults and validation.

Defaults: 100 clients, learning rate 0.01, 10 local epochs, 400 rounds.
The sub-server count has no default and must be given whenever a three-tier
algorithm is requested.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .aggregation import WeightMode
from .clustering import ClusterParams
from .datagen import SynthConfig
from .errors import ConfigError, SchemaError
from .model import Architecture, TrainSpec

ALGORITHMS = ("fedavg", "fedavg_plus", "fedclusavg", "fedclusavg_plus")
THREE_TIER = ("fedavg_plus", "fedclusavg_plus")
CLUSTERED = ("fedclusavg", "fedclusavg_plus")


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthetic"
    synthetic: SynthConfig = field(default_factory=SynthConfig)
    csv: str | None = None
    test_csv: str | None = None
    test_fraction: float = 1.0 / 7.0


@dataclass(frozen=True)
class PartitionConfig:
    k: int = 100
    skew: float = 0.8
    strategy: str = "label_skew"  # or "replicate"
    scaling: str = "global"  # or "per_client"
    seed: int | None = None


@dataclass(frozen=True)
class TopologyConfig:
    tiers: str | None = None
    q: int | None = None
    assignment: str = "contiguous"  # or "shuffled"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.01
    architecture: str = "logistic"
    hidden: int = 8

    def spec(self, seed: int) -> TrainSpec:
        return TrainSpec(self.epochs, self.batch_size, self.learning_rate, seed)

    @property
    def arch(self) -> Architecture:
        return Architecture(self.architecture, self.hidden)


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: tuple = ("fedavg",)
    seeds: tuple = (1,)
    data: DataConfig = field(default_factory=DataConfig)
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    rounds: int = 400
    cluster: ClusterParams = field(default_factory=ClusterParams)
    recluster_each_round: bool = False
    weight_mode: WeightMode = WeightMode.INVERSE
    bandwidths: dict = field(default_factory=lambda: {"wifi": 10e6, "5g": 100e6})
    participation: float = 1.0
    threshold: float = 0.5
    output_dir: str = "results"

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["weight_mode"] = self.weight_mode.value
        d["algorithms"] = list(self.algorithms)
        d["seeds"] = list(self.seeds)
        return d


_SECTIONS = {
    "partition": PartitionConfig,
    "topology": TopologyConfig,
    "train": TrainConfig,
    "cluster": ClusterParams,
}


_BASE_TYPES = {"int": int, "float": float, "str": str, "bool": bool}


def _check_type(key: str, value, expected):
    ok = {
        int: isinstance(value, int) and not isinstance(value, bool),
        float: isinstance(value, (int, float)) and not isinstance(value, bool),
        str: isinstance(value, str),
        bool: isinstance(value, bool),
    }[expected]
    if not ok:
        raise SchemaError(key, f"expected {expected.__name__}, got {type(value).__name__}")


def _build(cls, raw, prefix: str):
    if not isinstance(raw, dict):
        raise SchemaError(prefix, "expected an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in known:
            raise SchemaError(f"{prefix}.{key}", "unknown key")
    kwargs = {}
    for name, value in raw.items():
        key = f"{prefix}.{name}"
        # annotations are strings here, e.g. "int" or "int | None"
        ftype = str(known[name].type)
        if value is None and "None" in ftype:
            kwargs[name] = None
            continue
        base = _BASE_TYPES.get(ftype.split("|")[0].strip())
        if base is not None:
            _check_type(key, value, base)
            if base is float:
                value = float(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise SchemaError(prefix, str(exc)) from None


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise SchemaError("<root>", "config must be a JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            raise SchemaError(key, "unknown key")
    kw: dict[str, Any] = {}

    algos = raw.get("algorithms", ["fedavg"])
    if not isinstance(algos, list) or not algos:
        raise SchemaError("algorithms", "need a nonempty list")
    for a in algos:
        if a not in ALGORITHMS:
            raise SchemaError("algorithms", f"unknown algorithm {a!r}")
    if len(set(algos)) != len(algos):
        raise SchemaError("algorithms", "duplicate entries")
    kw["algorithms"] = tuple(algos)

    seeds = raw.get("seeds", [1])
    if not isinstance(seeds, list) or not seeds:
        raise SchemaError("seeds", "need a nonempty list")
    for s in seeds:
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2**64:
            raise SchemaError("seeds", f"seed {s!r} is not a 64-bit unsigned integer")
    if len(set(seeds)) != len(seeds):
        raise SchemaError("seeds", "duplicate entries")
    kw["seeds"] = tuple(seeds)

    if "data" in raw:
        kw["data"] = _data_from_dict(raw["data"])
    for name, cls in _SECTIONS.items():
        if name in raw:
            kw[name] = _build(cls, raw[name], name)

    if "rounds" in raw:
        _check_type("rounds", raw["rounds"], int)
        if raw["rounds"] < 0:
            raise SchemaError("rounds", "must be >= 0")
        kw["rounds"] = raw["rounds"]
    if "recluster_each_round" in raw:
        _check_type("recluster_each_round", raw["recluster_each_round"], bool)
        kw["recluster_each_round"] = raw["recluster_each_round"]
    if "weight_mode" in raw:
        try:
            kw["weight_mode"] = WeightMode(raw["weight_mode"])
        except ValueError:
            raise SchemaError("weight_mode", "must be 'literal' or 'inverse'") from None
    if "bandwidths" in raw:
        bw = raw["bandwidths"]
        if not isinstance(bw, dict) or not bw:
            raise SchemaError("bandwidths", "need a nonempty object of name -> bits/second")
        for name, v in bw.items():
            _check_type(f"bandwidths.{name}", v, float)
            if not v > 0:
                raise SchemaError(f"bandwidths.{name}", "must be > 0")
        kw["bandwidths"] = {k: float(v) for k, v in bw.items()}
    if "participation" in raw:
        _check_type("participation", raw["participation"], float)
        if not 0 < raw["participation"] <= 1:
            raise SchemaError("participation", "must lie in (0, 1]")
        kw["participation"] = float(raw["participation"])
    if "threshold" in raw:
        _check_type("threshold", raw["threshold"], float)
        kw["threshold"] = float(raw["threshold"])
    if "output_dir" in raw:
        _check_type("output_dir", raw["output_dir"], str)
        kw["output_dir"] = raw["output_dir"]

    cfg = ExperimentConfig(**kw)
    _validate(cfg)
    return cfg


def _data_from_dict(raw) -> DataConfig:
    if not isinstance(raw, dict):
        raise SchemaError("data", "expected an object")
    raw = dict(raw)
    source = raw.pop("source", "synthetic")
    if source not in ("synthetic", "csv"):
        raise SchemaError("data.source", "must be 'synthetic' or 'csv'")
    csv_keys = {"csv", "test_csv", "test_fraction"}
    csv_part = {k: raw.pop(k) for k in list(raw) if k in csv_keys}
    synth_fields = {f.name for f in dataclasses.fields(SynthConfig)} - {"seed"}
    for key in raw:
        if key not in synth_fields:
            raise SchemaError(f"data.{key}", "unknown key")
    synth = _build(SynthConfig, raw, "data") if raw else SynthConfig()
    if source == "csv":
        if not isinstance(csv_part.get("csv"), str):
            raise SchemaError("data.csv", "a csv source needs a path")
    tf = csv_part.get("test_fraction", 1.0 / 7.0)
    _check_type("data.test_fraction", tf, float)
    if not 0 < tf < 1:
        raise SchemaError("data.test_fraction", "must lie in (0, 1)")
    for key in ("csv", "test_csv"):
        if csv_part.get(key) is not None:
            _check_type(f"data.{key}", csv_part[key], str)
    return DataConfig(source, synth, csv_part.get("csv"), csv_part.get("test_csv"), float(tf))


def _validate(cfg: ExperimentConfig) -> None:
    p = cfg.partition
    if p.k < 1:
        raise SchemaError("partition.k", "must be >= 1")
    if not 0.0 <= p.skew <= 1.0:
        raise SchemaError("partition.skew", "must lie in [0, 1]")
    if p.strategy not in ("label_skew", "replicate"):
        raise SchemaError("partition.strategy", "must be 'label_skew' or 'replicate'")
    if p.scaling not in ("global", "per_client"):
        raise SchemaError("partition.scaling", "must be 'global' or 'per_client'")

    t = cfg.topology
    if t.tiers not in (None, "two_tier", "three_tier"):
        raise SchemaError("topology.tiers", "must be 'two_tier' or 'three_tier'")
    if t.assignment not in ("contiguous", "shuffled"):
        raise SchemaError("topology.assignment", "must be 'contiguous' or 'shuffled'")
    wants_three = any(a in THREE_TIER for a in cfg.algorithms)
    if (t.tiers == "three_tier" or wants_three) and t.q is None:
        raise SchemaError("topology.q", "three-tier runs need a sub-server count")
    if t.q is not None and not 1 <= t.q <= p.k:
        raise SchemaError("topology.q", f"must lie in [1, k={p.k}]")
    if t.tiers == "two_tier" and wants_three:
        raise SchemaError("topology.tiers", "two_tier conflicts with a three-tier algorithm")
    if t.tiers == "three_tier" and any(a not in THREE_TIER for a in cfg.algorithms):
        raise SchemaError("topology.tiers", "three_tier conflicts with a two-tier algorithm")

    tr = cfg.train
    if tr.architecture not in ("logistic", "mlp"):
        raise SchemaError("train.architecture", "must be 'logistic' or 'mlp'")
    if tr.epochs < 1 or tr.batch_size < 1:
        raise SchemaError("train", "epochs and batch_size must be >= 1")
    if not tr.learning_rate > 0:
        raise SchemaError("train.learning_rate", "must be > 0")
    if tr.hidden < 1:
        raise SchemaError("train.hidden", "must be >= 1")


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from None
    return config_from_dict(raw)


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Set dotted ``key=value`` pairs on a raw config dict; values parse as JSON when possible."""
    raw = json.loads(json.dumps(raw))
    for item in overrides:
        if "=" not in item:
            raise SchemaError(item, "override must look like key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise SchemaError(key, "cannot descend into a non-object")
        node[parts[-1]] = value
    return raw
