"""Restoration blocking, recovered holding time and policy comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from eon_fdsp.simulation import PRIORITIES, RunMetrics


def restoration_bbp(m: RunMetrics, priority: int) -> float:
    """Blocked over disrupted bit rate for one class; 0 when nothing was disrupted."""
    disrupted = m.disrupted_bitrate[priority]
    if disrupted == 0:
        return 0.0
    return m.blocked_restoration_bitrate[priority] / disrupted


def restoration_ratio(m: RunMetrics, priority: int) -> float:
    """Restored over disrupted bit rate; the complement of :func:`restoration_bbp`."""
    return 1.0 - restoration_bbp(m, priority)


def rht_ratio(m: RunMetrics, priority: int) -> float:
    """Recovered over disrupted remaining holding time; 0 when nothing was disrupted."""
    disrupted = m.disrupted_remaining_s[priority]
    if disrupted == 0:
        return 0.0
    return m.recovered_remaining_s[priority] / disrupted


def arrival_blocking(m: RunMetrics) -> float:
    return m.arrivals_blocked / m.arrivals_offered if m.arrivals_offered else 0.0


def mean_se(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error (0 for a single value)."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class RunRecord:
    """Result of one (load, policy, replication) run."""

    load: float
    policy: str
    replication: int
    metrics: RunMetrics


@dataclass
class PolicyRow:
    """Replication means for one (load, policy)."""

    load: float
    policy: str
    reps: int
    bb: dict[int, float]
    rr: dict[int, float]
    ht: dict[int, float]
    arrival_bp: float
    bb_se: dict[int, float] = field(default_factory=dict)
    ht_se: dict[int, float] = field(default_factory=dict)
    # replications in which the class saw no disruption (ratios 0 by convention)
    no_disruption: dict[int, int] = field(default_factory=dict)


def aggregate(records: Iterable[RunRecord]) -> list[PolicyRow]:
    """Per (load, policy) means over replications, sorted by policy then load."""
    groups: dict[tuple[str, float], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.policy, r.load), []).append(r)
    rows = []
    for (policy, load), recs in sorted(groups.items()):
        recs.sort(key=lambda r: r.replication)
        ms = [r.metrics for r in recs]
        row = PolicyRow(load, policy, len(recs), {}, {}, {}, mean_se([arrival_blocking(m) for m in ms])[0])
        for p in PRIORITIES:
            row.bb[p], row.bb_se[p] = mean_se([restoration_bbp(m, p) for m in ms])
            row.rr[p] = mean_se([restoration_ratio(m, p) for m in ms])[0]
            row.ht[p], row.ht_se[p] = mean_se([rht_ratio(m, p) for m in ms])
            row.no_disruption[p] = sum(m.disrupted_bitrate[p] == 0 for m in ms)
        rows.append(row)
    return rows


def percent_reduction(fdsp: float, fdfs: float) -> float | None:
    """100 * (fdfs - fdsp) / fdfs, or None when fdfs is 0."""
    return None if fdfs == 0 else 100.0 * (fdfs - fdsp) / fdfs


def percent_change(fdsp: float, fdfs: float) -> float | None:
    """100 * (fdsp - fdfs) / fdfs, or None when fdfs is 0."""
    return None if fdfs == 0 else 100.0 * (fdsp - fdfs) / fdfs


@dataclass
class ClassComparison:
    load: float
    priority: int
    reps: int
    bbp_fdsp: float
    bbp_fdfs: float
    rht_fdsp: float
    rht_fdfs: float
    bbp_diff: float
    bbp_diff_se: float
    rht_diff: float
    rht_diff_se: float
    delta_bbp_percent: float | None
    delta_rht_percent: float | None
    no_disruption: int


class PairingError(ValueError):
    pass


def compare_policies(fdsp: Sequence[RunRecord], fdfs: Sequence[RunRecord]) -> list[ClassComparison]:
    """Paired comparison keyed by (load, replication).

    ``bbp_diff`` and ``rht_diff`` are mean paired differences fdsp - fdfs.
    ``delta_bbp_percent`` is the relative BBP reduction of FDSP and
    ``delta_rht_percent`` the relative RHT change, both against FDFS.
    """
    left = {(r.load, r.replication): r.metrics for r in fdsp}
    right = {(r.load, r.replication): r.metrics for r in fdfs}
    if len(left) != len(fdsp) or len(right) != len(fdfs):
        raise PairingError("duplicate (load, replication) keys")
    if left.keys() != right.keys():
        raise PairingError("FDSP and FDFS runs are not paired by (load, replication)")
    out = []
    for load in sorted({load for load, _ in left}):
        keys = sorted(k for k in left if k[0] == load)
        for p in PRIORITIES:
            b1 = np.array([restoration_bbp(left[k], p) for k in keys])
            b2 = np.array([restoration_bbp(right[k], p) for k in keys])
            h1 = np.array([rht_ratio(left[k], p) for k in keys])
            h2 = np.array([rht_ratio(right[k], p) for k in keys])
            bd, bd_se = mean_se(b1 - b2)
            hd, hd_se = mean_se(h1 - h2)
            out.append(
                ClassComparison(
                    load, p, len(keys),
                    float(b1.mean()), float(b2.mean()), float(h1.mean()), float(h2.mean()),
                    bd, bd_se, hd, hd_se,
                    percent_reduction(b1.mean(), b2.mean()),
                    percent_change(h1.mean(), h2.mean()),
                    sum(left[k].disrupted_bitrate[p] == 0 for k in keys),
                )
            )
    return out


def sign_consistency(
    fdsp: Sequence[RunRecord], fdfs: Sequence[RunRecord], load: float, priority: int, expect: int
) -> tuple[float, int]:
    """Share of disrupted replications whose BBP difference does not contradict ``expect``.

    ``expect`` is -1 when FDSP should block less than FDFS and +1 when it
    should block more. Equal values count as consistent. Returns the share and
    the number of replications in which the class was disrupted.
    """
    left = {r.replication: r.metrics for r in fdsp if r.load == load}
    right = {r.replication: r.metrics for r in fdfs if r.load == load}
    good = n = 0
    for rep in sorted(left.keys() & right.keys()):
        if left[rep].disrupted_bitrate[priority] == 0:
            continue
        n += 1
        diff = restoration_bbp(left[rep], priority) - restoration_bbp(right[rep], priority)
        if diff * expect >= 0:
            good += 1
    return (good / n if n else math.nan), n
