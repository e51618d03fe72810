"""A small paired sweep on Germany-50 comparing FDSP with FDFS.

Runs ten replications at two loads (about half a minute on one core).
"""

from eon_fdsp.config import RunConfig
from eon_fdsp.experiments import run_replications
from eon_fdsp.metrics import compare_policies

cfg = RunConfig(loads=(400, 1000), replications=10, requests_per_run=3000, failure_at=1800, seed=11).validate()
rs = run_replications(cfg, workers=1)

for row in rs.table():
    bb = "  ".join(f"P{p} {row.bb[p]:.3f}" for p in (1, 2, 3))
    print(f"{row.policy} {row.load:6.0f} E  restoration BBP  {bb}  arrival BP {row.arrival_bp:.4f}")

print()
for c in compare_policies(rs.by_policy("fdsp"), rs.by_policy("fdfs")):
    red = "n/a" if c.delta_bbp_percent is None else f"{c.delta_bbp_percent:+.1f}%"
    print(f"{c.load:6.0f} E  P{c.priority}: BBP reduction {red}  "
          f"paired RHT diff {c.rht_diff:+.3f} (se {c.rht_diff_se:.3f})")
