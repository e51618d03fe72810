"""Paired replications of the restoration policies over a load sweep."""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from eon_fdsp.config import RunConfig
from eon_fdsp.metrics import PolicyRow, RunRecord, aggregate
from eon_fdsp.rsa import PathCache, PliRsa
from eon_fdsp.simulation import FailureSpec, Simulation
from eon_fdsp.topology import LinkState, Topology, load_topology
from eon_fdsp.traffic import TrafficConfig, generate


def replication_streams(seed: int, replication: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Independent (traffic, failure) seed sequences for one replication.

    Every load and policy of a replication sees the same streams.
    """
    root = np.random.SeedSequence(entropy=seed, spawn_key=(replication,))
    traffic, failures = root.spawn(2)
    return traffic, failures


@functools.lru_cache(maxsize=4)
def _topology_template(source: str, slot_count: int) -> Topology:
    return load_topology(source, slot_count=slot_count)


def _fresh_topology(config: RunConfig) -> Topology:
    # reparsing keeps every run's grids and failure flags independent
    template = _topology_template(config.topology, config.slot_count)
    return Topology(
        template.nodes,
        [LinkState(link.id, link.endpoints, link.length_km) for link in template.links],
        slot_count=config.slot_count,
    )


@dataclass(frozen=True)
class PairedRun:
    load: float
    replication: int
    records: tuple[RunRecord, ...]
    pre_failure_digests: tuple[str | None, ...]


def run_pair(config: RunConfig, load: float, replication: int) -> PairedRun:
    """All configured policies on one traffic and failure realization."""
    traffic_ss, failure_ss = replication_streams(config.seed, replication)
    tcfg = TrafficConfig(
        load_erlang=load,
        request_count=config.requests_per_run,
        mean_holding_s=config.mean_holding_s,
        priority_weights=tuple(config.priority_weights),
        bit_rates=tuple(config.bit_rates),
        seed=traffic_ss,
    )
    records = []
    digests = []
    requests = None
    for policy in config.policies:
        topo = _fresh_topology(config)
        if requests is None:
            requests = generate(tcfg, topo.node_count)
        rsa = PliRsa(
            config.reach_table(), config.k, config.slot_width_ghz, config.guard_slots,
            cache=PathCache.shared(topo, config.k),
        )
        sim = Simulation(
            topo, requests, policy,
            FailureSpec(at_request=config.failure_at, count=config.failure_count),
            rng=np.random.default_rng(failure_ss),
            rsa=rsa,
        )
        records.append(RunRecord(load, policy, replication, sim.run()))
        digests.append(sim.pre_failure_digest)
    return PairedRun(load, replication, tuple(records), tuple(digests))


def _run_task(args):
    config, load, replication = args
    return run_pair(config, load, replication)


@dataclass
class ReplicationSet:
    pairs: list[PairedRun]

    @property
    def records(self) -> list[RunRecord]:
        return [r for pair in self.pairs for r in pair.records]

    def by_policy(self, policy: str) -> list[RunRecord]:
        return [r for r in self.records if r.policy == policy]

    def table(self) -> list[PolicyRow]:
        return aggregate(self.records)


def run_replications(
    config: RunConfig,
    replications: int | None = None,
    loads: Sequence[float] | None = None,
    workers: int | None = None,
) -> ReplicationSet:
    """Run every (load, replication) pair, in parallel when ``workers`` > 1.

    Results do not depend on the worker count: each pair is seeded from
    ``config.seed`` and its replication index alone.
    """
    n = config.replications if replications is None else replications
    if n < 1:
        raise ValueError("need at least one replication")
    loads = config.loads if loads is None else loads
    tasks = [(config, load, rep) for load in loads for rep in range(n)]
    workers = config.worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        pairs = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(_run_task, tasks, chunksize=1))
    return ReplicationSet(pairs)


def iter_rows(rows: Iterable[PolicyRow], policy: str) -> list[PolicyRow]:
    return sorted((r for r in rows if r.policy == policy), key=lambda r: r.load)

