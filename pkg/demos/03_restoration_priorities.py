"""How FDSP and FDFS order the same batch of disrupted services."""

import numpy as np

from eon_fdsp.prioritizer import DisruptedService, normalize, rank_fdfs, rank_fdsp, score, solve_weights

rng = np.random.default_rng(3)
batch = [
    DisruptedService(
        service_id=i,
        bit_rate=int(rng.choice([100, 200, 400])),
        priority=int(rng.integers(1, 4)),
        remaining_s=float(rng.exponential(3600)),
        detection_rank=i,
    )
    for i in range(8)
]

rows = normalize(batch)
w = solve_weights(rows)
print(f"weights: bit rate {w.w_b:.2f}  time {w.w_t:.2f}  priority {w.w_p:.2f}")
print("column totals (b, t, p):", np.round(rows.sum(axis=0), 3))

scores = score(rows, w)
print("\n id  Gbps  prio  remaining_s  score")
for s, v in zip(batch, scores):
    print(f"{s.service_id:3d} {s.bit_rate:5d} {s.priority:5d} {s.remaining_s:12.0f}  {v:.3f}")

print("\nFDFS order:", rank_fdfs(batch))
print("FDSP order:", rank_fdsp(batch))

# a batch of large low-priority services: bit rate now outweighs priority
bulk = [DisruptedService(i, 400, 1 + (i == 3), 600.0 * (i + 1), i) for i in range(5)]
w = solve_weights(normalize(bulk))
print(f"\nbulk batch weights: bit rate {w.w_b:.2f}  time {w.w_t:.2f}  priority {w.w_p:.2f}")
print("bulk FDSP order:", rank_fdsp(bulk))
