"""Germany-50, its link lengths, and the K shortest paths between two cities."""

import numpy as np

from eon_fdsp import load_topology
from eon_fdsp.rsa import ReachTable, k_shortest_paths, select_modulation

topo = load_topology("germany50")
print(f"{topo.node_count} nodes, {len(topo.links)} links")

lengths = np.array([link.length_km for link in topo.links])
print(f"link length km: min {lengths.min():.1f}  median {np.median(lengths):.1f}  max {lengths.max():.1f}")

# five candidate routes between the first and the last node, shortest first
src, dst = 0, topo.node_count - 1
table = ReachTable()
for path in k_shortest_paths(topo, src, dst, 5):
    names = " - ".join(topo.nodes[n].name for n in path.nodes)
    fmt = select_modulation(table, 400, path.length_km)
    print(f"{path.length_km:7.1f} km  {path.hop_count} hops  400G as {fmt.name if fmt else 'unreachable'}")
    print(f"          {names}")
