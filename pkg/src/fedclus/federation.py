"""Round orchestration for FedAvg, FedClusAvg and their three-tier variants.

Every round: broadcast the global parameters, let each participating
client train (per cluster group for the clustered algorithms), aggregate
client results (through sub-servers in the three-tier topology) and log
every parameter message in the communication ledger.
"""
from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .aggregation import WeightedEntry, WeightMode, aggregate, aggregate_plain
from .clustering import ClusterParams, ClusterSet, cluster_client
from .config import CLUSTERED, THREE_TIER, ExperimentConfig
from .datagen import (
    ClientShard,
    Dataset,
    generate_synthetic,
    load_csv,
    partition_label_skew,
    replicate_shards,
    split_train_test,
    standardize,
    standardize_shards,
)
from .errors import FedClusError, TopologyMismatch, UnknownLinkClass
from .metrics import (
    auc,
    classification_metrics,
    confusion_matrix,
    ks_point,
    ks_statistic,
    roc_curve,
)
from .model import TrainSpec, init_params, local_train, loss, predict_proba
from .report import ExperimentReport, FinalEval, RoundRecord, RunReport, summarize

HEADER_BYTES = 64
SERVER = "server"
ACCESS = "access"  # client <-> its aggregator
BACKBONE = "backbone"  # sub-server <-> central server


class Algorithm(str, Enum):
    FEDAVG = "fedavg"
    FEDAVG_PLUS = "fedavg_plus"
    FEDCLUSAVG = "fedclusavg"
    FEDCLUSAVG_PLUS = "fedclusavg_plus"

    @property
    def three_tier(self) -> bool:
        return self.value in THREE_TIER

    @property
    def clustered(self) -> bool:
        return self.value in CLUSTERED


@dataclass(frozen=True)
class Topology:
    tiers: str
    k: int
    q: int | None = None
    assignment: tuple = ()  # client_id -> subserver_id, three-tier only

    def __post_init__(self):
        if self.tiers == "two_tier":
            if self.q is not None:
                raise TopologyMismatch("two_tier topologies have no sub-servers")
        elif self.tiers == "three_tier":
            if self.q is None or not 1 <= self.q <= self.k:
                raise TopologyMismatch("three_tier needs 1 <= q <= k")
            if len(self.assignment) != self.k:
                raise TopologyMismatch("assignment must cover every client")
            if set(self.assignment) != set(range(self.q)):
                raise TopologyMismatch("every sub-server needs at least one client")
        else:
            raise TopologyMismatch(f"unknown tiers {self.tiers!r}")

    def members(self, sub: int) -> list[int]:
        return [c for c, s in enumerate(self.assignment) if s == sub]


def two_tier(k: int) -> Topology:
    return Topology("two_tier", k)


def three_tier(k: int, q: int, policy: str = "contiguous", seed: int = 0) -> Topology:
    """Equal contiguous blocks of client ids per sub-server (optionally over a seeded shuffle)."""
    if not 1 <= q <= k:
        raise TopologyMismatch("three_tier needs 1 <= q <= k")
    order = np.arange(k)
    if policy == "shuffled":
        order = np.random.default_rng(seed).permutation(k)
    elif policy != "contiguous":
        raise ValueError(f"unknown assignment policy {policy!r}")
    assignment = [0] * k
    for sub, block in enumerate(np.array_split(order, q)):
        for c in block:
            assignment[int(c)] = sub
    return Topology("three_tier", k, q, tuple(assignment))


class Message(NamedTuple):
    round: int
    src: str
    dst: str
    link: str
    payload_bytes: int


def payload_bytes(n_params: int) -> int:
    return 8 * n_params + HEADER_BYTES


def client_node(cid: int) -> str:
    return f"client:{cid}"


def sub_node(q: int) -> str:
    return f"sub:{q}"


def round_messages(topology: Topology, clients: Sequence[int], n_params: int, rnd: int) -> list[Message]:
    """Parameter messages of one round: uplinks from ``clients``, then the broadcast to everyone."""
    size = payload_bytes(n_params)
    msgs: list[Message] = []
    if topology.tiers == "two_tier":
        msgs += [Message(rnd, client_node(c), SERVER, ACCESS, size) for c in clients]
        msgs += [Message(rnd, SERVER, client_node(c), ACCESS, size) for c in range(topology.k)]
        return msgs
    active_subs = sorted({topology.assignment[c] for c in clients})
    msgs += [Message(rnd, client_node(c), sub_node(topology.assignment[c]), ACCESS, size) for c in clients]
    msgs += [Message(rnd, sub_node(s), SERVER, BACKBONE, size) for s in active_subs]
    msgs += [Message(rnd, SERVER, sub_node(s), BACKBONE, size) for s in range(topology.q)]
    msgs += [Message(rnd, sub_node(topology.assignment[c]), client_node(c), ACCESS, size) for c in range(topology.k)]
    return msgs


def latency_breakdown(messages: Iterable[Message], bandwidths: dict, topology: Topology | None = None) -> dict:
    """Per-stage transfer times in seconds.

    Messages into (out of) the same node share one link and go one after
    another; different nodes transfer in parallel. The uplink takes the
    slowest access branch plus the central backbone, the downlink the
    reverse.
    """
    recv: dict[tuple[str, str], float] = {}
    sent: dict[tuple[str, str], float] = {}
    n = 0
    for m in messages:
        n += 1
        if m.link not in bandwidths:
            raise UnknownLinkClass(m.link)
        if topology is not None and topology.tiers == "two_tier" and m.link == BACKBONE:
            raise TopologyMismatch("backbone message in a two-tier topology")
        t = 8.0 * m.payload_bytes / float(bandwidths[m.link])
        if m.src.startswith("client:") or (m.src.startswith("sub:") and m.dst == SERVER):
            recv[(m.link, m.dst)] = recv.get((m.link, m.dst), 0.0) + t
        else:
            sent[(m.link, m.src)] = sent.get((m.link, m.src), 0.0) + t
    if n == 0:
        raise ValueError("ledger slice is empty")

    def slowest(table, link):
        vals = [v for (lk, _), v in table.items() if lk == link]
        return max(vals) if vals else 0.0

    out = {
        "uplink_access": slowest(recv, ACCESS),
        "uplink_backbone": slowest(recv, BACKBONE),
        "downlink_backbone": slowest(sent, BACKBONE),
        "downlink_access": slowest(sent, ACCESS),
        "central_uplink": sum(v for (_, node), v in recv.items() if node == SERVER),
    }
    out["uplink"] = out["uplink_access"] + out["uplink_backbone"]
    out["downlink"] = out["downlink_backbone"] + out["downlink_access"]
    out["total"] = out["uplink"] + out["downlink"]
    return out


def estimate_round_latency(messages: Iterable[Message], bandwidths: dict, topology: Topology | None = None) -> float:
    """Modeled seconds for one round (uplink then downlink)."""
    return latency_breakdown(messages, bandwidths, topology)["total"]


def uniform_bandwidth(bps: float) -> dict:
    return {ACCESS: bps, BACKBONE: bps}


def ledger_totals(messages: Sequence[Message]) -> dict:
    links: dict[str, int] = {}
    central = 0
    for m in messages:
        links[m.link] = links.get(m.link, 0) + 1
        if SERVER in (m.src, m.dst):
            central += 1
    return {
        "messages": len(messages),
        "bytes": int(sum(m.payload_bytes for m in messages)),
        "central_messages": central,
        "per_link": dict(sorted(links.items())),
    }


def client_update(
    shard: ClientShard,
    cluster_set: ClusterSet | None,
    global_params: np.ndarray,
    spec: TrainSpec,
    mode: WeightMode | str,
    use_clustering: bool,
    key: Sequence[int] = (),
) -> WeightedEntry:
    """Train one client from ``global_params`` and return ``(params, n_k)``.

    With clustering, every group trains separately from the same start and
    the group models are combined by deviation weighting. All groups share
    the shuffle key, so groups holding identical data train identically.
    """
    X, y = shard.data.X, shard.data.y
    if not use_clustering:
        return WeightedEntry(local_train(global_params, X, y, spec, key), shard.data.n)
    if cluster_set is None:
        raise ValueError("clustered update needs a ClusterSet")
    entries = [
        WeightedEntry(local_train(global_params, X[g], y[g], spec, key), len(g))
        for g in cluster_set.groups
    ]
    return WeightedEntry(aggregate(entries, mode), shard.data.n)


def subserver_update(client_entries: Sequence[WeightedEntry], mode: WeightMode | str, clustered: bool = True) -> WeightedEntry:
    if not client_entries:
        raise ValueError("sub-server has no client entries")
    params = aggregate(client_entries, mode) if clustered else aggregate_plain(client_entries)
    return WeightedEntry(params, sum(e.count for e in client_entries))


@dataclass
class FedState:
    round: int
    global_params: np.ndarray
    shards: list
    cluster_cache: dict = field(default_factory=dict)  # client_id -> ClusterSet
    seed: int = 0


@dataclass
class RoundReport:
    round: int
    train_loss: float
    accuracy: float = float("nan")
    precision: float = float("nan")
    recall: float = float("nan")
    f1: float = float("nan")
    messages: list = field(default_factory=list)


def build_cluster_cache(shards: Sequence[ClientShard], params: ClusterParams) -> dict:
    return {s.client_id: cluster_client(s, params) for s in shards}


def evaluate(params: np.ndarray, data: Dataset, threshold: float = 0.5) -> dict:
    scores = predict_proba(params, data.X)
    cm = confusion_matrix(scores, data.y, threshold)
    m = classification_metrics(cm)
    return {"accuracy": m.accuracy, "precision": m.precision, "recall": m.recall, "f1": m.f1}


def _participants(state: FedState, k: int, participation: float) -> list[int]:
    if participation >= 1.0:
        return list(range(k))
    m = max(1, math.ceil(participation * k))
    rng = np.random.default_rng([state.seed, state.round, 1])
    return sorted(int(c) for c in rng.choice(k, size=m, replace=False))


def server_round(
    state: FedState,
    algorithm: Algorithm | str,
    topology: Topology,
    spec: TrainSpec,
    mode: WeightMode | str = WeightMode.INVERSE,
    *,
    test: Dataset | None = None,
    train: Dataset | None = None,
    cluster_params: ClusterParams | None = None,
    recluster: bool = False,
    participation: float = 1.0,
    threshold: float = 0.5,
    map_fn: Callable | None = None,
) -> tuple[FedState, RoundReport]:
    """Run one global round and return the advanced state with its report.

    ``map_fn`` (e.g. ``executor.map``) may run client updates concurrently;
    results are consumed in client order so the outcome never depends on it.
    """
    algorithm = Algorithm(algorithm)
    if algorithm.three_tier != (topology.tiers == "three_tier"):
        raise TopologyMismatch(f"{algorithm.value} cannot run on a {topology.tiers} topology")
    if len(state.shards) != topology.k:
        raise TopologyMismatch(f"{len(state.shards)} shards but topology has k={topology.k}")
    rnd = state.round + 1
    clients = _participants(state, topology.k, participation)

    cache = state.cluster_cache
    if algorithm.clustered and (recluster or any(c not in cache for c in clients)):
        cache = dict(cache)
        cp = cluster_params or ClusterParams()
        for c in clients:
            if recluster or c not in cache:
                cache[c] = cluster_client(state.shards[c], cp)

    def work(c):
        return client_update(
            state.shards[c], cache.get(c), state.global_params, spec, mode, algorithm.clustered, (rnd,)
        )

    entries = list((map_fn or map)(work, clients))
    by_client = dict(zip(clients, entries))

    if topology.tiers == "two_tier":
        top = entries
    else:
        top = []
        for s in range(topology.q):
            members = [by_client[c] for c in topology.members(s) if c in by_client]
            if members:
                top.append(subserver_update(members, mode, algorithm.clustered))
    new_params = aggregate(top, mode) if algorithm.clustered else aggregate_plain(top)

    msgs = round_messages(topology, clients, len(new_params), rnd)
    new_state = FedState(rnd, new_params, state.shards, cache, state.seed)
    report = RoundReport(rnd, _train_loss(new_params, state.shards, train), messages=msgs)
    if test is not None:
        for name, val in evaluate(new_params, test, threshold).items():
            setattr(report, name, val)
    return new_state, report


def _train_loss(params, shards, train: Dataset | None) -> float:
    if train is not None:
        return loss(params, train.X, train.y)
    X = np.concatenate([s.data.X for s in shards])
    y = np.concatenate([s.data.y for s in shards])
    return loss(params, X, y)


def derive_seed(seed: int, *tags: int) -> int:
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1, np.uint64)[0])


@dataclass
class PreparedData:
    train: Dataset
    test: Dataset
    shards: list


def prepare_data(config: ExperimentConfig, seed: int) -> PreparedData:
    """Load or generate data, scale it and split it across clients for one seed."""
    dc = config.data
    if dc.source == "synthetic":
        train, test = generate_synthetic(dataclasses.replace(dc.synthetic, seed=seed))
    else:
        full = load_csv(dc.csv)
        if dc.test_csv:
            train, test = full, load_csv(dc.test_csv)
        else:
            train, test = split_train_test(full, dc.test_fraction, derive_seed(seed, 1))
    pc = config.partition
    part_seed = pc.seed if pc.seed is not None else derive_seed(seed, 2)

    def split(data):
        if pc.strategy == "replicate":
            return replicate_shards(data, pc.k)
        return partition_label_skew(data, pc.k, pc.skew, part_seed)

    train_std, test_std, stats = standardize(train, test)
    if pc.scaling == "global":
        shards = split(train_std)
    else:
        shards = standardize_shards(split(train))
        train_std = Dataset(np.concatenate([s.data.X for s in shards]), np.concatenate([s.data.y for s in shards]))
    return PreparedData(train_std, test_std, shards)


def make_topology(config: ExperimentConfig, algorithm: Algorithm, seed: int) -> Topology:
    k = config.partition.k
    if algorithm.three_tier:
        return three_tier(k, config.topology.q, config.topology.assignment, derive_seed(seed, 3))
    return two_tier(k)


def final_eval(params: np.ndarray, test: Dataset, threshold: float) -> FinalEval:
    scores = predict_proba(params, test.X)
    cm = confusion_matrix(scores, test.y, threshold)
    try:
        curve = roc_curve(scores, test.y)
    except FedClusError:
        return FinalEval([], float("nan"), float("nan"), [], dataclasses.asdict(cm), threshold)
    kp = ks_point(curve)
    return FinalEval(
        [list(p) for p in curve.points()],
        auc(curve),
        ks_statistic(curve),
        [kp[0], kp[1], kp[2] if math.isfinite(kp[2]) else None],
        dataclasses.asdict(cm),
        threshold,
    )


def run_single(
    config: ExperimentConfig,
    algorithm: Algorithm | str,
    seed: int,
    data: PreparedData | None = None,
    map_fn: Callable | None = None,
    keep_messages: bool = False,
) -> tuple[RunReport, list[RoundReport]]:
    """One (algorithm, seed) cell: returns the serializable report and the raw round reports."""
    algorithm = Algorithm(algorithm)
    data = data or prepare_data(config, seed)
    topology = make_topology(config, algorithm, seed)
    spec = config.train.spec(derive_seed(seed, 4))
    params0 = init_params(data.train.feature_dim, config.train.arch, derive_seed(seed, 5))
    state = FedState(0, params0, data.shards, {}, seed)
    if algorithm.clustered:
        state.cluster_cache = build_cluster_cache(data.shards, config.cluster)

    first = evaluate(params0, data.test, config.threshold)
    records = [RoundRecord(0, _train_loss(params0, data.shards, data.train), **first)]
    raw: list[RoundReport] = []
    all_msgs: list[Message] = []
    for _ in range(config.rounds):
        state, rep = server_round(
            state,
            algorithm,
            topology,
            spec,
            config.weight_mode,
            test=data.test,
            train=data.train,
            cluster_params=config.cluster,
            recluster=config.recluster_each_round,
            participation=config.participation,
            threshold=config.threshold,
            map_fn=map_fn,
        )
        records.append(RoundRecord(rep.round, rep.train_loss, rep.accuracy, rep.precision, rep.recall, rep.f1))
        all_msgs.extend(rep.messages)
        if not keep_messages:
            rep.messages = []
        raw.append(rep)

    one_round = round_messages(topology, list(range(topology.k)), len(params0), 1)
    latency = {
        name: estimate_round_latency(one_round, uniform_bandwidth(bps), topology)
        for name, bps in config.bandwidths.items()
    }
    cluster_sizes = [len(state.cluster_cache[c]) for c in sorted(state.cluster_cache)] if algorithm.clustered else []
    run = RunReport(
        algorithm=algorithm.value,
        seed=seed,
        weight_mode=WeightMode(config.weight_mode).value,
        tiers=topology.tiers,
        rounds=records,
        final=final_eval(state.global_params, data.test, config.threshold),
        ledger=ledger_totals(all_msgs),
        latency=latency,
        cluster_sizes=cluster_sizes,
    )
    return run, raw


def thread_count() -> int:
    """Worker cap from ``FEDCLUS_THREADS``; 0 or unset means one per CPU."""
    raw = os.environ.get("FEDCLUS_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def run_cells(config: ExperimentConfig, cells: Sequence[tuple[str, int]], keep_messages: bool = False):
    """Run (algorithm, seed) cells, concurrently when more than one worker is allowed.

    Data is prepared once per seed and shared read-only across algorithms.
    """
    seeds = sorted({s for _, s in cells}, key=list(config.seeds).index)
    datasets = {s: prepare_data(config, s) for s in seeds}

    def one(cell):
        algo, seed = cell
        return run_single(config, algo, seed, datasets[seed], keep_messages=keep_messages)

    workers = min(thread_count(), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, cells))
    return [one(c) for c in cells]


def run_experiment(config: ExperimentConfig, timestamp: bool = True) -> ExperimentReport:
    """Every algorithm x seed cell on identical data, plus cross-seed summaries."""
    cells = [(a, s) for s in config.seeds for a in config.algorithms]
    runs = [r for r, _ in run_cells(config, cells)]
    summary, deltas = summarize(runs)
    created = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else ""
    return ExperimentReport(config.to_dict(), runs, summary, deltas, created)
