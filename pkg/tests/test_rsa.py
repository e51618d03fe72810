import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eon_fdsp.rsa import (
    DEFAULT_REACH_KM,
    PM_16QAM,
    PM_64QAM,
    PM_QPSK,
    PathCache,
    PliRsa,
    ReachTable,
    k_shortest_paths,
    select_modulation,
    slots_required,
)
from eon_fdsp.spectrum import SlotBlock
from eon_fdsp.topology import fail_links, load_topology
from eon_fdsp.traffic import ServiceRequest

from conftest import make_graph, random_graph, simple_paths

TABLE = ReachTable()


def req(sid, src, dst, rate=100, priority=2, arrival=0.0, holding=100.0):
    return ServiceRequest(sid, src, dst, rate, priority, arrival, holding)


@pytest.mark.parametrize(
    "rate, length, expected",
    [(100, 900, PM_16QAM), (400, 1300, None), (200, 400, PM_64QAM), (100, 5190, PM_QPSK), (400, 10, PM_64QAM)],
)
def test_select_modulation(rate, length, expected):
    assert select_modulation(TABLE, rate, length) == expected


def test_select_modulation_unknown_rate():
    with pytest.raises(ValueError):
        select_modulation(TABLE, 300, 10)


@given(st.sampled_from([100, 200, 400]), st.floats(0, 6000), st.floats(0, 6000))
def test_select_modulation_monotone(rate, a, b):
    short, long_ = sorted((a, b))
    fmt = select_modulation(TABLE, rate, long_)
    if fmt is not None:
        assert TABLE[rate, fmt.name] >= short
        assert select_modulation(TABLE, rate, short).se_per_pol >= fmt.se_per_pol


@pytest.mark.parametrize(
    "rate, fmt, slots",
    # ceil(rate / (12.5 GHz * 2 pol * se)) + 1 guard slot, by hand
    [(100, PM_QPSK, 3), (400, PM_64QAM, 4), (100, PM_64QAM, 2), (200, PM_QPSK, 5), (400, PM_QPSK, 9), (400, PM_16QAM, 7)],
)
def test_slots_required(rate, fmt, slots):
    assert slots_required(rate, fmt) == slots


def test_slots_required_options():
    assert slots_required(100, PM_QPSK, slot_width_ghz=25, guard_slots=0) == 1
    assert slots_required(100, PM_QPSK, guard_slots=2) == 4


def test_reach_table_validation():
    bad = dict(DEFAULT_REACH_KM)
    bad[100, "PM-64QAM"] = 3000
    with pytest.raises(ValueError, match="format order"):
        ReachTable(bad)
    bad = dict(DEFAULT_REACH_KM)
    bad[400, "PM-QPSK"] = 9000
    with pytest.raises(ValueError, match="bit rate"):
        ReachTable(bad)
    with pytest.raises(ValueError, match="lacks"):
        ReachTable({(100, "PM-QPSK"): 10})


def test_ksp_triangle():
    topo = make_graph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 3)])
    paths = k_shortest_paths(topo, 0, 2, 2)
    assert [(p.nodes, p.length_km) for p in paths] == [((0, 1, 2), 2), ((0, 2), 3)]
    assert [p.hop_count for p in paths] == [2, 1]


def test_ksp_disconnected_source(triangle):
    fail_links(triangle, [0, 2])
    assert k_shortest_paths(triangle, 0, 1, 3) == []


def test_ksp_tie_breaks():
    # two 2-km routes: direct two-hop via node 1 (links 0,1) and via node 2 (links 2,3)
    topo = make_graph(4, [(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1), (0, 3, 2)])
    paths = k_shortest_paths(topo, 0, 3, 3)
    # equal length: one hop first, then lexicographic link ids
    assert [p.links for p in paths] == [(4,), (0, 1), (2, 3)]


def test_ksp_bad_arguments(triangle):
    with pytest.raises(ValueError):
        k_shortest_paths(triangle, 0, 0, 2)
    with pytest.raises(ValueError):
        k_shortest_paths(triangle, 0, 1, 0)


def test_ksp_single_matches_dijkstra_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        topo = random_graph(rng, n, p=0.4, max_weight=20)
        g = nx.Graph()
        for link in topo.links:
            g.add_edge(*link.endpoints, weight=link.length_km)
        src, dst = (int(x) for x in rng.choice(n, 2, replace=False))
        got = k_shortest_paths(topo, src, dst, 1)[0]
        assert got.length_km == pytest.approx(nx.dijkstra_path_length(g, src, dst))


@pytest.mark.parametrize("seed", range(5))
def test_ksp_matches_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    topo = random_graph(rng, 7, p=0.5)
    for src in range(7):
        for dst in range(7):
            if src == dst:
                continue
            expected = simple_paths(topo, src, dst)[:4]
            got = [(p.length_km, p.hop_count, p.links) for p in k_shortest_paths(topo, src, dst, 4)]
            assert got == expected


def test_ksp_paths_loop_free_and_lengths_consistent():
    topo = load_topology("germany50")
    for dst in (7, 21, 44):
        for p in k_shortest_paths(topo, 3, dst, 5):
            assert len(set(p.nodes)) == len(p.nodes)
            assert p.length_km == pytest.approx(sum(topo.links[i].length_km for i in p.links))
            for (a, b), lid in zip(zip(p.nodes, p.nodes[1:]), p.links):
                assert set(topo.links[lid].endpoints) == {a, b}


def test_path_cache_reuses_and_invalidates():
    topo = load_topology("germany50")
    cache = PathCache(k=5)
    base = cache.paths(topo, 0, 12)
    assert cache.paths(topo, 0, 12) == base
    assert cache._state(topo, 0, 12) is cache._state(topo, 0, 12)
    unrelated = next(i for i in range(88) if all(i not in p.links for p in base))
    fail_links(topo, [unrelated])
    assert cache.paths(topo, 0, 12) == base
    fail_links(topo, [base[0].links[0]])
    fresh = cache.paths(topo, 0, 12)
    assert fresh == k_shortest_paths(topo, 0, 12, 5)
    assert all(base[0].links[0] not in p.links for p in fresh)


def test_lazy_paths_match_eager_prefix():
    topo = load_topology("germany50")
    cache = PathCache(k=5)
    first = next(cache.iter_paths(topo, 4, 40))
    assert first == k_shortest_paths(topo, 4, 40, 1)[0]
    assert len(cache._state(topo, 4, 40).found) == 1
    assert cache.paths(topo, 4, 40) == k_shortest_paths(topo, 4, 40, 5)


def test_provision_empty_network():
    topo = load_topology("germany50")
    alloc = PliRsa().provision(topo, req(1, 0, 30, 200))
    assert alloc.path == k_shortest_paths(topo, 0, 30, 1)[0]
    assert alloc.block.start == 0
    assert topo.spectrum.holdings(1) == (alloc.links, alloc.block)


def test_provision_falls_back_to_second_path():
    # square 0-1-2-3-0 with a diagonal-free layout; path 1 is 0-1 (direct)
    topo = make_graph(4, [(0, 1, 100), (1, 2, 100), (2, 3, 100), (3, 0, 100)], slot_count=8)
    topo.spectrum.allocate([topo.links[0]], SlotBlock(0, 8), 99)
    alloc = PliRsa(k=2).provision(topo, req(1, 0, 1))
    # exhaustive search: only the 3-hop detour has free spectrum
    assert alloc.path.links == (3, 2, 1)
    assert alloc.block == SlotBlock(0, 2)


def test_provision_blocked_by_reach():
    topo = make_graph(3, [(0, 1, 1000), (1, 2, 1000), (0, 2, 2500)])
    assert PliRsa(k=3).provision(topo, req(1, 0, 2, rate=400)) is None
    assert topo.spectrum.is_empty()


def test_provision_picks_format_per_path():
    topo = make_graph(2, [(0, 1, 500)])
    alloc = PliRsa().provision(topo, req(1, 0, 1, rate=400))
    assert alloc.modulation == PM_16QAM
    assert alloc.block.width == slots_required(400, PM_16QAM)


def brute_provision(topo, request, k):
    """Outcome by scanning loop-free paths in order with a naive slot search."""
    for length, _, links in simple_paths(topo, request.src, request.dst)[:k]:
        fmt = None
        for name, se in (("PM-64QAM", 6), ("PM-16QAM", 3), ("PM-QPSK", 2)):
            if DEFAULT_REACH_KM[request.bit_rate, name] >= length:
                fmt, eff = name, se
                break
        if fmt is None:
            continue
        width = math.ceil(request.bit_rate / (12.5 * 2 * eff) - 1e-9) + 1
        for start in range(topo.slot_count - width + 1):
            if all(topo.spectrum.owner[lid, s] == -1 for lid in links for s in range(start, start + width)):
                return links, start
    return None


@pytest.mark.parametrize("seed", range(6))
def test_provision_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 9))
    topo = random_graph(rng, n, p=0.35, max_weight=900)
    for link in topo.links:
        link.grid.owner[:] = -1
    topo = make_graph(n, [(*l.endpoints, l.length_km) for l in topo.links], slot_count=24)
    rsa = PliRsa(k=3)
    for sid in range(150):
        src, dst = (int(x) for x in rng.choice(n, 2, replace=False))
        r = req(sid, src, dst, rate=int(rng.choice([100, 200, 400])))
        expected = brute_provision(topo, r, 3)
        got = rsa.provision(topo, r)
        if expected is None:
            assert got is None
        else:
            assert (got.links, got.block.start) == expected
        if rng.random() < 0.3 and sid > 0:
            topo.spectrum.release(int(rng.integers(sid)))
    topo.spectrum.check()
