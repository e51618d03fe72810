"""Network topology: nodes, fiber links, failure state.

Topology files are plain text with two sections::

    [nodes]
    # id name latitude longitude
    0 Aachen 50.76 6.04
    ...
    [links]
    # id nodeA nodeB [length_km]
    0 0 29
    1 0 48 73.8

Anything after ``#`` is a comment. Node ids must form the dense range
``0..N-1`` and link ids ``0..L-1``. Names may not contain whitespace. When a
link has no explicit length, the great-circle distance between its endpoint
coordinates is used (Earth radius 6371 km).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from eon_fdsp.spectrum import SpectrumGrid, SpectrumPool

EARTH_RADIUS_KM = 6371.0


class TopologyError(ValueError):
    """Raised for malformed topology documents or invalid failure requests."""


@dataclass
class Node:
    id: int
    name: str = ""
    latitude: float | None = None
    longitude: float | None = None


@dataclass
class LinkState:
    """One undirected fiber link with its spectrum grid."""

    id: int
    endpoints: tuple[int, int]
    length_km: float
    operational: bool = True
    grid: SpectrumGrid | None = field(default=None, repr=False)

    def other(self, node: int) -> int:
        a, b = self.endpoints
        return b if node == a else a


def great_circle_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Haversine distance in kilometers."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


class Topology:
    """Undirected simple graph of :class:`LinkState` objects.

    The spectrum pool is created here so every link shares one slot count.
    """

    def __init__(self, nodes: Sequence[Node], links: Sequence[LinkState], slot_count: int = 256):
        self.nodes = list(nodes)
        self.links = list(links)
        self.spectrum = SpectrumPool(len(self.links), slot_count)
        self.adjacency: list[list[tuple[int, int]]] = [[] for _ in self.nodes]
        for link in self.links:
            link.grid = self.spectrum.grids[link.id]
            a, b = link.endpoints
            self.adjacency[a].append((b, link.id))
            self.adjacency[b].append((a, link.id))
        # adjacency order is part of the deterministic search contract
        for adj in self.adjacency:
            adj.sort(key=lambda item: item[1])
        self._pair_index = {frozenset(link.endpoints): link.id for link in self.links}
        self.lengths = np.array([link.length_km for link in self.links], dtype=float)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def slot_count(self) -> int:
        return self.spectrum.slot_count

    def link_between(self, a: int, b: int) -> LinkState | None:
        idx = self._pair_index.get(frozenset((a, b)))
        return None if idx is None else self.links[idx]

    def operational_ids(self) -> list[int]:
        return [link.id for link in self.links if link.operational]

    def failed_ids(self) -> frozenset[int]:
        return frozenset(link.id for link in self.links if not link.operational)

    def structure_key(self) -> tuple:
        """Hashable description of the graph (endpoints and lengths only)."""
        return tuple((link.endpoints, link.length_km) for link in self.links)

    def is_connected(self, operational_only: bool = False) -> bool:
        if not self.nodes:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, lid in self.adjacency[u]:
                if operational_only and not self.links[lid].operational:
                    continue
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.nodes)

    def fail_links(self, link_ids: Sequence[int]) -> list[int]:
        """Mark links as failed. See :func:`fail_links`."""
        return fail_links(self, link_ids)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_topology(text: str, slot_count: int = 256) -> Topology:
    """Parse a topology document held in a string."""
    section = None
    nodes: dict[int, Node] = {}
    raw_links: list[tuple[int, int, int, float | None, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("nodes", "links"):
                raise TopologyError(f"line {lineno}: unknown section [{section}]")
            continue
        parts = line.split()
        try:
            if section == "nodes":
                if len(parts) not in (2, 4):
                    raise TopologyError(f"line {lineno}: expected 'id name [latitude longitude]'")
                nid = int(parts[0])
                lat = lon = None
                if len(parts) == 4:
                    lat, lon = float(parts[2]), float(parts[3])
                if nid in nodes:
                    raise TopologyError(f"line {lineno}: duplicate node id {nid}")
                nodes[nid] = Node(nid, parts[1], lat, lon)
            elif section == "links":
                if len(parts) not in (3, 4):
                    raise TopologyError(f"line {lineno}: expected 'id nodeA nodeB [length_km]'")
                length = float(parts[3]) if len(parts) == 4 else None
                raw_links.append((int(parts[0]), int(parts[1]), int(parts[2]), length, lineno))
            else:
                raise TopologyError(f"line {lineno}: content outside a section")
        except ValueError as exc:
            if isinstance(exc, TopologyError):
                raise
            raise TopologyError(f"line {lineno}: {exc}") from None

    if len(nodes) < 2:
        raise TopologyError("a topology needs at least two nodes")
    if sorted(nodes) != list(range(len(nodes))):
        raise TopologyError("node ids must form the dense range 0..N-1")

    links: list[LinkState] = []
    seen_pairs: set[frozenset[int]] = set()
    for lid, a, b, length, lineno in sorted(raw_links):
        if lid != len(links):
            raise TopologyError(f"line {lineno}: link ids must form the dense range 0..L-1")
        for n in (a, b):
            if n not in nodes:
                raise TopologyError(f"line {lineno}: link {lid} references unknown node {n}")
        if a == b:
            raise TopologyError(f"line {lineno}: link {lid} is a self-loop")
        pair = frozenset((a, b))
        if pair in seen_pairs:
            raise TopologyError(f"line {lineno}: duplicate link between {a} and {b}")
        seen_pairs.add(pair)
        if length is None:
            na, nb = nodes[a], nodes[b]
            if None in (na.latitude, na.longitude, nb.latitude, nb.longitude):
                raise TopologyError(f"line {lineno}: link {lid} has no length and endpoints lack coordinates")
            length = great_circle_km(na.latitude, na.longitude, nb.latitude, nb.longitude)
        if not length > 0:
            raise TopologyError(f"line {lineno}: link {lid} has non-positive length {length}")
        links.append(LinkState(lid, (a, b), float(length)))

    return Topology([nodes[i] for i in range(len(nodes))], links, slot_count=slot_count)


def load_topology(source: str | Path, slot_count: int = 256) -> Topology:
    """Load a topology from a file path, or the name of a bundled topology."""
    path = Path(source)
    if not path.exists() and str(source) in bundled_topologies():
        text = resources.files("eon_fdsp.data").joinpath(f"{source}.txt").read_text()
    else:
        text = path.read_text()
    return parse_topology(text, slot_count=slot_count)


def bundled_topologies() -> list[str]:
    return sorted(
        p.name[:-4] for p in resources.files("eon_fdsp.data").iterdir() if p.name.endswith(".txt")
    )


def fail_links(topology: Topology, link_ids: Sequence[int]) -> list[int]:
    """Mark ``link_ids`` non-operational and return them.

    The whole request is validated before any link changes state.
    """
    ids = list(link_ids)
    if len(set(ids)) != len(ids):
        raise TopologyError(f"duplicate link ids in failure set {ids}")
    for lid in ids:
        if not 0 <= lid < len(topology.links):
            raise TopologyError(f"unknown link id {lid}")
        if not topology.links[lid].operational:
            raise TopologyError(f"link {lid} has already failed")
    for lid in ids:
        topology.links[lid].operational = False
    return ids


def sample_failures(topology: Topology, count: int, rng: np.random.Generator) -> list[int]:
    """Draw ``count`` distinct operational links uniformly without replacement."""
    candidates = topology.operational_ids()
    if count < 0 or count > len(candidates):
        raise TopologyError(f"cannot fail {count} links; {len(candidates)} are operational")
    if count == 0:
        return []
    picked = rng.choice(len(candidates), size=count, replace=False)
    return [candidates[i] for i in picked]
