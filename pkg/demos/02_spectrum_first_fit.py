"""First-fit spectrum assignment on a small ring, slot by slot."""

from eon_fdsp.rsa import PliRsa
from eon_fdsp.topology import parse_topology
from eon_fdsp.traffic import ServiceRequest

ring = parse_topology(
    """
    [nodes]
    0 A
    1 B
    2 C
    3 D
    [links]
    0 0 1 300
    1 1 2 300
    2 2 3 300
    3 3 0 300
    """,
    slot_count=24,
)
rsa = PliRsa(k=2)


def show():
    for link, grid in zip(ring.links, ring.spectrum.grids):
        a, b = (ring.nodes[n].name for n in link.endpoints)
        cells = "".join("." if o < 0 else chr(ord("a") + o % 26) for o in grid.owner)
        print(f"  {a}-{b} {cells}")


# each request is (src, dst, Gbps); the guard slot is part of every block
for sid, (src, dst, rate) in enumerate([(0, 2, 400), (1, 3, 200), (0, 1, 100), (2, 0, 400)]):
    alloc = rsa.provision(ring, ServiceRequest(sid, src, dst, rate, 2, float(sid), 100.0))
    if alloc is None:
        print(f"request {sid}: blocked")
        continue
    print(f"request {sid}: {rate}G over links {alloc.links} with {alloc.modulation.name}, "
          f"slots {alloc.block.start}..{alloc.block.stop - 1}")
    show()

# releasing frees the block on every link of the path
ring.spectrum.release(0)
print("after releasing request 0:")
show()
