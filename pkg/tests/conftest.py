import itertools

import pytest

from eon_fdsp.topology import parse_topology

TRIANGLE = """
[nodes]
0 A
1 B
2 C
[links]
0 0 1 100
1 1 2 200
2 0 2 300
"""


def graph_text(n, edges):
    """Topology document for ``edges`` given as (a, b, length) triples."""
    lines = ["[nodes]"] + [f"{i} n{i}" for i in range(n)] + ["[links]"]
    lines += [f"{i} {a} {b} {w}" for i, (a, b, w) in enumerate(edges)]
    return "\n".join(lines)


def make_graph(n, edges, slot_count=256):
    return parse_topology(graph_text(n, edges), slot_count=slot_count)


def simple_paths(topology, src, dst):
    """Every loop-free path as (length, hops, link ids), by exhaustive DFS."""
    out = []

    def dfs(node, visited, links):
        if node == dst:
            length = 0.0
            for lid in links:
                length += topology.links[lid].length_km
            out.append((length, len(links), tuple(links)))
            return
        for v, lid in topology.adjacency[node]:
            if v in visited or not topology.links[lid].operational:
                continue
            dfs(v, visited | {v}, links + [lid])

    dfs(src, {src}, [])
    return sorted(out)


def random_graph(rng, n, p=0.5, max_weight=5):
    """Connected random graph with small integer lengths so that ties occur."""
    edges = [(i, int(rng.integers(0, i)), int(rng.integers(1, max_weight + 1))) for i in range(1, n)]
    have = {frozenset(e[:2]) for e in edges}
    for a, b in itertools.combinations(range(n), 2):
        if frozenset((a, b)) not in have and rng.random() < p:
            edges.append((a, b, int(rng.integers(1, max_weight + 1))))
    return make_graph(n, edges)


@pytest.fixture
def triangle():
    return parse_topology(TRIANGLE)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
