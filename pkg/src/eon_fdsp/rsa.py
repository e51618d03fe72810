"""Impairment-aware routing and spectrum assignment.

Paths come from Yen's K-shortest loop-free paths over operational links,
ordered by (length, hop count, link-id sequence). For each candidate the
densest modulation format whose transmission reach covers the path is chosen,
the slot requirement follows from its spectral efficiency, and the spectrum is
taken by first fit. The first path that yields a block wins.
"""

from __future__ import annotations

import heapq
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

from eon_fdsp.spectrum import SlotBlock

if TYPE_CHECKING:
    from eon_fdsp.topology import Topology
    from eon_fdsp.traffic import ServiceRequest


@dataclass(frozen=True)
class ModulationFormat:
    name: str
    se_per_pol: float
    polarizations: int = 2

    @property
    def spectral_efficiency(self) -> float:
        return self.se_per_pol * self.polarizations


PM_QPSK = ModulationFormat("PM-QPSK", 2)
PM_16QAM = ModulationFormat("PM-16QAM", 3)
PM_64QAM = ModulationFormat("PM-64QAM", 6)
DEFAULT_FORMATS = (PM_QPSK, PM_16QAM, PM_64QAM)

# Maximum optical transmission reach in km, keyed by (Gbps, format name).
DEFAULT_REACH_KM = {
    (100, "PM-QPSK"): 5190, (100, "PM-16QAM"): 2324, (100, "PM-64QAM"): 876,
    (200, "PM-QPSK"): 2595, (200, "PM-16QAM"): 1162, (200, "PM-64QAM"): 438,
    (400, "PM-QPSK"): 1298, (400, "PM-16QAM"): 581, (400, "PM-64QAM"): 219,
}


class ReachTable:
    """Reach per (bit rate, modulation format).

    ``formats`` must be ordered by increasing spectral efficiency; reach has
    to shrink both with the bit rate and with the format order.
    """

    def __init__(
        self,
        reach_km: Mapping[tuple[int, str], float] | None = None,
        formats: Sequence[ModulationFormat] = DEFAULT_FORMATS,
    ):
        self.formats = tuple(formats)
        self.reach_km = dict(DEFAULT_REACH_KM if reach_km is None else reach_km)
        names = [f.name for f in self.formats]
        if len(set(names)) != len(names):
            raise ValueError("duplicate modulation format names")
        if any(a.se_per_pol >= b.se_per_pol for a, b in zip(self.formats, self.formats[1:])):
            raise ValueError("formats must be ordered by strictly increasing spectral efficiency")
        self.bit_rates = tuple(sorted({rate for rate, _ in self.reach_km}))
        for rate in self.bit_rates:
            row = []
            for f in self.formats:
                if (rate, f.name) not in self.reach_km:
                    raise ValueError(f"reach table lacks ({rate}, {f.name})")
                row.append(self.reach_km[rate, f.name])
            if any(a <= b for a, b in zip(row, row[1:])):
                raise ValueError(f"reach must decrease with format order at {rate} Gbps")
        for f in self.formats:
            col = [self.reach_km[rate, f.name] for rate in self.bit_rates]
            if any(a <= b for a, b in zip(col, col[1:])):
                raise ValueError(f"reach must decrease with bit rate for {f.name}")

    def __getitem__(self, key: tuple[int, str]) -> float:
        return self.reach_km[key]

    def format(self, name: str) -> ModulationFormat:
        for f in self.formats:
            if f.name == name:
                return f
        raise KeyError(name)


def select_modulation(reach_table: ReachTable, bit_rate: int, length_km: float) -> ModulationFormat | None:
    """Highest-efficiency format whose reach covers ``length_km``, else None."""
    if bit_rate not in reach_table.bit_rates:
        raise ValueError(f"no reach data for {bit_rate} Gbps")
    for fmt in reversed(reach_table.formats):
        if reach_table.reach_km[bit_rate, fmt.name] >= length_km:
            return fmt
    return None


def slots_required(
    bit_rate: float, fmt: ModulationFormat, slot_width_ghz: float = 12.5, guard_slots: int = 1
) -> int:
    """Data slots for ``bit_rate`` at the format's efficiency, plus the guard band."""
    data = bit_rate / (slot_width_ghz * fmt.spectral_efficiency)
    # keep exact quotients such as 100 / 50 from rounding up
    return math.ceil(data - 1e-9) + guard_slots


@dataclass(frozen=True)
class CandidatePath:
    nodes: tuple[int, ...]
    links: tuple[int, ...]
    length_km: float

    @property
    def hop_count(self) -> int:
        return len(self.links)

    @property
    def sort_key(self) -> tuple:
        return (self.length_km, len(self.links), self.links)


@dataclass(frozen=True)
class Allocation:
    """A provisioned lightpath."""

    service_id: int
    path: CandidatePath
    modulation: ModulationFormat
    block: SlotBlock
    bit_rate: int

    @property
    def links(self) -> tuple[int, ...]:
        return self.path.links


def _path_length(topology: Topology, links: Sequence[int]) -> float:
    total = 0.0
    for lid in links:
        total += topology.links[lid].length_km
    return total


def _dijkstra(topology, src, dst, banned_nodes, banned_links):
    """Best path under (length, hops, link sequence) avoiding banned elements."""
    links = topology.links
    adjacency = topology.adjacency
    best = {src: (0.0, 0, ())}
    heap = [(0.0, 0, (), src, (src,))]
    done = set()
    while heap:
        length, hops, lseq, u, nseq = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            return nseq, lseq
        done.add(u)
        for v, lid in adjacency[u]:
            if v in done or v in banned_nodes or lid in banned_links:
                continue
            link = links[lid]
            if not link.operational:
                continue
            key = (length + link.length_km, hops + 1, lseq + (lid,))
            old = best.get(v)
            if old is None or key < old:
                best[v] = key
                heapq.heappush(heap, (key[0], key[1], key[2], v, nseq + (v,)))
    return None


class YenPaths:
    """Lazy Yen enumeration of up to ``k`` loop-free paths for one node pair.

    Paths are produced on demand, so callers that stop at the first usable
    path pay for one shortest-path search only. The topology passed to
    :meth:`get` must have the same operational links on every call.
    """

    def __init__(self, src: int, dst: int, k: int):
        if src == dst:
            raise ValueError("source and destination must differ")
        if k < 1:
            raise ValueError("k must be positive")
        self.src, self.dst, self.k = src, dst, k
        self.found: list[CandidatePath] = []
        self.complete = False
        self._candidates: list[tuple[tuple, CandidatePath]] = []
        self._queued: set[tuple[int, ...]] = set()

    def get(self, topology: Topology, index: int) -> CandidatePath | None:
        while len(self.found) <= index and not self.complete:
            self._advance(topology)
        return self.found[index] if index < len(self.found) else None

    def iterate(self, topology: Topology):
        i = 0
        while True:
            path = self.get(topology, i)
            if path is None:
                return
            yield path
            i += 1

    def _advance(self, topology: Topology) -> None:
        found, dst = self.found, self.dst
        if not found:
            first = _dijkstra(topology, self.src, dst, frozenset(), frozenset())
            if first is None:
                self.complete = True
                return
            found.append(CandidatePath(first[0], first[1], _path_length(topology, first[1])))
            self._queued.add(first[1])
        else:
            prev = found[-1]
            for i in range(len(prev.links)):
                root_nodes = prev.nodes[: i + 1]
                banned_links = {p.links[i] for p in found if p.nodes[: i + 1] == root_nodes}
                spur = _dijkstra(topology, prev.nodes[i], dst, frozenset(root_nodes[:-1]), banned_links)
                if spur is None:
                    continue
                lseq = prev.links[:i] + spur[1]
                if lseq in self._queued:
                    continue
                self._queued.add(lseq)
                path = CandidatePath(root_nodes[:-1] + spur[0], lseq, _path_length(topology, lseq))
                heapq.heappush(self._candidates, (path.sort_key, path))
            if not self._candidates:
                self.complete = True
                return
            found.append(heapq.heappop(self._candidates)[1])
        if len(found) >= self.k:
            self.complete = True
            self._candidates = []


def k_shortest_paths(topology: Topology, src: int, dst: int, k: int) -> list[CandidatePath]:
    """Up to ``k`` loop-free paths over operational links, shortest first.

    Ties in length are broken by fewer hops, then by the lexicographically
    smaller link-id sequence.
    """
    return list(YenPaths(src, dst, k).iterate(topology))


class PathCache:
    """Memoized lazy K-shortest paths keyed by the set of failed links.

    Removing links only removes paths, so when none of the intact-network
    paths of a pair touches a failed link they remain the answer and are
    reused as they are.
    """

    _shared: dict[tuple, PathCache] = {}

    def __init__(self, k: int, max_failure_sets: int = 8):
        self.k = k
        self._base: dict[tuple[int, int], YenPaths] = {}
        self._failed: OrderedDict[frozenset, dict] = OrderedDict()
        self.max_failure_sets = max_failure_sets

    @classmethod
    def shared(cls, topology: Topology, k: int) -> PathCache:
        """Process-wide cache for topologies with the same structure."""
        key = (topology.structure_key(), k)
        cache = cls._shared.get(key)
        if cache is None:
            cache = cls._shared[key] = cls(k)
        return cache

    def _state(self, topology: Topology, src: int, dst: int) -> YenPaths:
        failed = topology.failed_ids()
        pair = (src, dst)
        if not failed:
            state = self._base.get(pair)
            if state is None:
                state = self._base[pair] = YenPaths(src, dst, self.k)
            return state
        table = self._failed.get(failed)
        if table is None:
            table = self._failed[failed] = {}
            while len(self._failed) > self.max_failure_sets:
                self._failed.popitem(last=False)
        state = table.get(pair)
        if state is None:
            base = self._base.get(pair)
            if base is not None and base.complete and not any(lid in failed for p in base.found for lid in p.links):
                state = base
            else:
                state = YenPaths(src, dst, self.k)
            table[pair] = state
        return state

    def iter_paths(self, topology: Topology, src: int, dst: int):
        return self._state(topology, src, dst).iterate(topology)

    def paths(self, topology: Topology, src: int, dst: int) -> list[CandidatePath]:
        return list(self.iter_paths(topology, src, dst))


class PliRsa:
    """Provisioning policy: KSP order, reach-feasible densest format, first fit."""

    def __init__(
        self,
        reach_table: ReachTable | None = None,
        k: int = 5,
        slot_width_ghz: float = 12.5,
        guard_slots: int = 1,
        cache: PathCache | None = None,
    ):
        if cache is not None and cache.k != k:
            raise ValueError("path cache was built for a different k")
        self.reach_table = reach_table or ReachTable()
        self.k = k
        self.slot_width_ghz = slot_width_ghz
        self.guard_slots = guard_slots
        self.cache = cache

    def candidate_paths(self, topology: Topology, src: int, dst: int):
        """Candidate paths in trial order, computed as they are consumed."""
        if self.cache is not None:
            return self.cache.iter_paths(topology, src, dst)
        return YenPaths(src, dst, self.k).iterate(topology)

    def plan(self, topology: Topology, request: ServiceRequest):
        """Return ``(path, format, block)`` for the first feasible path, or None."""
        pool = topology.spectrum
        for path in self.candidate_paths(topology, request.src, request.dst):
            fmt = select_modulation(self.reach_table, request.bit_rate, path.length_km)
            if fmt is None:
                continue
            width = slots_required(request.bit_rate, fmt, self.slot_width_ghz, self.guard_slots)
            links = [topology.links[i] for i in path.links]
            block = pool.first_fit(links, width)
            if block is not None:
                return path, fmt, block
        return None

    def provision(self, topology: Topology, request: ServiceRequest) -> Allocation | None:
        """Allocate spectrum for ``request``; None means the request is blocked."""
        found = self.plan(topology, request)
        if found is None:
            return None
        path, fmt, block = found
        topology.spectrum.allocate([topology.links[i] for i in path.links], block, request.id)
        return Allocation(request.id, path, fmt, block, request.bit_rate)


def provision(topology: Topology, request: ServiceRequest, k: int = 5, **kwargs) -> Allocation | None:
    return PliRsa(k=k, **kwargs).provision(topology, request)
