"""Discrete-event simulation of dynamic provisioning with link failures.

Arrivals are provisioned on arrival and release their spectrum on departure.
Just before request number ``failure_at`` arrives, the configured links fail:
every service crossing them loses its lightpath, the disrupted batch is
ordered by the restoration policy and re-provisioned one service at a time
on the surviving network. Services that cannot be restored are dropped.
"""

from __future__ import annotations

import hashlib
import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from eon_fdsp.prioritizer import POLICIES, DisruptedService, Normalization, rank_fdsp
from eon_fdsp.rsa import Allocation, PathCache, PliRsa
from eon_fdsp.topology import Topology, sample_failures
from eon_fdsp.traffic import ServiceRequest

logger = logging.getLogger(__name__)

PRIORITIES = (1, 2, 3)


class SimulationError(RuntimeError):
    """An internal invariant broke; the run cannot be trusted."""


def _per_class(value=0.0):
    return field(default_factory=lambda: {p: value for p in PRIORITIES})


@dataclass
class RunMetrics:
    """Accumulators for one run, indexed by priority class 1..3."""

    disrupted_bitrate: dict[int, float] = _per_class()
    restored_bitrate: dict[int, float] = _per_class()
    blocked_restoration_bitrate: dict[int, float] = _per_class()
    disrupted_remaining_s: dict[int, float] = _per_class()
    recovered_remaining_s: dict[int, float] = _per_class()
    disrupted_count: dict[int, int] = _per_class(0)
    restored_count: dict[int, int] = _per_class(0)
    arrivals_offered: int = 0
    arrivals_blocked: int = 0
    arrivals_offered_bitrate: float = 0.0
    arrivals_blocked_bitrate: float = 0.0
    failed_links: tuple[int, ...] = ()
    failure_time_s: float | None = None
    # wall-clock seconds spent ordering each disruption batch; excluded from equality
    prioritization_s: list[float] = field(default_factory=list, compare=False)

    def check_conservation(self) -> None:
        for p in PRIORITIES:
            if self.disrupted_bitrate[p] != self.restored_bitrate[p] + self.blocked_restoration_bitrate[p]:
                raise SimulationError(f"bit-rate conservation broken for priority {p}")


@dataclass
class ActiveService:
    request: ServiceRequest
    allocation: Allocation

    @property
    def departure_s(self) -> float:
        return self.request.departure_s


@dataclass(frozen=True)
class FailureSpec:
    """Failure injected before request index ``at_request`` arrives.

    Either explicit ``links`` or ``count`` links drawn with the run's
    failure stream.
    """

    at_request: int = 3000
    count: int = 4
    links: tuple[int, ...] | None = None


class Simulation:
    def __init__(
        self,
        topology: Topology,
        requests: Sequence[ServiceRequest],
        policy: str | Callable = "fdsp",
        failure: FailureSpec | None = FailureSpec(),
        rng: np.random.Generator | None = None,
        rsa: PliRsa | None = None,
        normalization: Normalization = Normalization(),
        validate: bool = False,
    ):
        self.topology = topology
        self.requests = list(requests)
        self.rank = POLICIES[policy] if isinstance(policy, str) else policy
        self.failure = failure
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.rsa = rsa or PliRsa(cache=PathCache.shared(topology, 5))
        self.normalization = normalization
        self.validate = validate
        self.active: dict[int, ActiveService] = {}
        self.metrics = RunMetrics()
        self.now = 0.0
        self._departures: list[tuple[float, int]] = []
        self.pre_failure_digest: str | None = None
        if failure is not None and failure.at_request > len(self.requests):
            raise ValueError("failure index lies beyond the request stream")

    def run(self) -> RunMetrics:
        fail_at = self.failure.at_request if self.failure is not None else None
        for index, request in enumerate(self.requests):
            self._drain_departures(request.arrival_s)
            if index == fail_at:
                self._inject_failure(request.arrival_s)
            self._arrive(request)
        if fail_at is not None and fail_at == len(self.requests):
            self._drain_departures(self.now)
            self._inject_failure(self.now)
        self._drain_departures(float("inf"))
        if self.active or not self.topology.spectrum.is_empty():
            raise SimulationError("spectrum leaked: grids not empty after the last departure")
        self.metrics.check_conservation()
        return self.metrics

    def _advance(self, t: float) -> None:
        if t < self.now:
            raise SimulationError(f"clock moved backwards from {self.now} to {t}")
        self.now = t

    def _drain_departures(self, until: float) -> None:
        heap = self._departures
        while heap and heap[0][0] <= until:
            t, sid = heapq.heappop(heap)
            self._advance(t)
            svc = self.active.pop(sid, None)
            if svc is not None:
                self.topology.spectrum.release(sid)
                self._after_event()

    def _arrive(self, request: ServiceRequest) -> None:
        self._advance(request.arrival_s)
        m = self.metrics
        m.arrivals_offered += 1
        m.arrivals_offered_bitrate += request.bit_rate
        alloc = self.rsa.provision(self.topology, request)
        if alloc is None:
            m.arrivals_blocked += 1
            m.arrivals_blocked_bitrate += request.bit_rate
        else:
            self.active[request.id] = ActiveService(request, alloc)
            heapq.heappush(self._departures, (request.departure_s, request.id))
        self._after_event()

    def _inject_failure(self, t: float) -> None:
        self._advance(t)
        failure = self.failure
        if failure.links is not None:
            links = list(failure.links)
        else:
            links = sample_failures(self.topology, failure.count, self.rng)
        self.pre_failure_digest = grid_digest(self.topology)
        self.handle_failure(links)

    def detect(self, link_ids: Sequence[int]) -> list[DisruptedService]:
        """Disruption batch in detection order: by failed link, then arrival."""
        pool = self.topology.spectrum
        batch: list[DisruptedService] = []
        seen: set[int] = set()
        for lid in link_ids:
            hit = sorted(pool.services_on([lid]), key=lambda s: (self.active[s].request.arrival_s, s))
            for sid in hit:
                if sid in seen:
                    continue
                seen.add(sid)
                req = self.active[sid].request
                batch.append(DisruptedService(sid, req.bit_rate, req.priority, req.departure_s - self.now, len(batch)))
        return batch

    def handle_failure(self, link_ids: Sequence[int]) -> list[DisruptedService]:
        """Fail ``link_ids`` and restore the services that crossed them."""
        topo = self.topology
        m = self.metrics
        topo.fail_links(link_ids)
        m.failed_links = tuple(link_ids)
        m.failure_time_s = self.now
        batch = self.detect(link_ids)
        for svc in batch:
            m.disrupted_bitrate[svc.priority] += svc.bit_rate
            m.disrupted_remaining_s[svc.priority] += svc.remaining_s
            m.disrupted_count[svc.priority] += 1
            topo.spectrum.release(svc.service_id)
        if not batch:
            return batch
        t0 = time.perf_counter()
        if self.rank is rank_fdsp:
            order = rank_fdsp(batch, self.normalization)
        else:
            order = self.rank(batch)
        m.prioritization_s.append(time.perf_counter() - t0)
        by_id = {s.service_id: s for s in batch}
        for sid in order:
            svc = by_id[sid]
            req = self.active[sid].request
            alloc = self.rsa.provision(topo, req)
            if alloc is None:
                m.blocked_restoration_bitrate[svc.priority] += svc.bit_rate
                del self.active[sid]
            else:
                m.restored_bitrate[svc.priority] += svc.bit_rate
                m.recovered_remaining_s[svc.priority] += svc.remaining_s
                m.restored_count[svc.priority] += 1
                self.active[sid] = ActiveService(req, alloc)
        logger.debug(
            "failure at %.1f s on links %s: %d disrupted, %d restored",
            self.now, list(link_ids), len(batch), sum(m.restored_count.values()),
        )
        m.check_conservation()
        failed = set(link_ids)
        for svc in self.active.values():
            if failed.intersection(svc.allocation.links):
                raise SimulationError(f"service {svc.request.id} still crosses a failed link")
        self._after_event()
        return batch

    def _after_event(self) -> None:
        if not self.validate:
            return
        self.topology.spectrum.check()
        reach = self.rsa.reach_table
        for sid, svc in self.active.items():
            alloc = svc.allocation
            if reach[svc.request.bit_rate, alloc.modulation.name] < alloc.path.length_km:
                raise SimulationError(f"service {sid} exceeds the reach of {alloc.modulation.name}")
            if any(not self.topology.links[i].operational for i in alloc.links):
                raise SimulationError(f"service {sid} uses a failed link")
            if self.topology.spectrum.holdings(sid) != (alloc.links, alloc.block):
                raise SimulationError(f"service {sid} disagrees with the spectrum index")


def grid_digest(topology: Topology) -> str:
    return hashlib.sha256(topology.spectrum.owner.tobytes()).hexdigest()


def run(
    topology: Topology,
    requests: Sequence[ServiceRequest],
    policy: str = "fdsp",
    failure: FailureSpec | None = FailureSpec(),
    rng: np.random.Generator | None = None,
    **kwargs,
) -> RunMetrics:
    """Simulate one request stream under one restoration policy."""
    return Simulation(topology, requests, policy, failure, rng, **kwargs).run()
