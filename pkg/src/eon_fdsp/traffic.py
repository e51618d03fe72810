"""Dynamic traffic: Poisson arrivals, exponential holding times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PRIORITY_NAMES = {1: "mMTC", 2: "eMBB", 3: "URLLC"}


@dataclass(frozen=True)
class ServiceRequest:
    id: int
    src: int
    dst: int
    bit_rate: int
    priority: int
    arrival_s: float
    holding_s: float

    @property
    def departure_s(self) -> float:
        return self.arrival_s + self.holding_s


@dataclass(frozen=True)
class TrafficConfig:
    load_erlang: float
    request_count: int = 5000
    mean_holding_s: float = 3600.0
    priority_weights: tuple[float, float, float] = (25, 40, 35)
    bit_rates: tuple[int, ...] = (100, 200, 400)
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if not self.load_erlang > 0:
            raise ValueError("load_erlang must be positive")
        if not self.mean_holding_s > 0:
            raise ValueError("mean_holding_s must be positive")
        if self.request_count < 0:
            raise ValueError("request_count must be non-negative")
        if len(self.priority_weights) != 3 or any(w <= 0 for w in self.priority_weights):
            raise ValueError("priority_weights needs three positive entries")
        if not self.bit_rates:
            raise ValueError("bit_rates must not be empty")

    @property
    def mean_interarrival_s(self) -> float:
        return self.mean_holding_s / self.load_erlang


def generate(config: TrafficConfig, node_count: int) -> list[ServiceRequest]:
    """Draw ``config.request_count`` requests; identical for identical seeds.

    Endpoints are uniform over ordered pairs of distinct nodes, bit rates
    uniform over ``config.bit_rates`` and priorities 1..3 follow
    ``config.priority_weights``.
    """
    if node_count < 2:
        raise ValueError("need at least two nodes")
    n = config.request_count
    rng = np.random.default_rng(config.seed)
    gaps = rng.exponential(config.mean_interarrival_s, n)
    holding = rng.exponential(config.mean_holding_s, n)
    src = rng.integers(0, node_count, n)
    # offset into the other node_count - 1 nodes keeps pairs uniform and distinct
    dst = (src + rng.integers(1, node_count, n)) % node_count
    rates = rng.choice(np.asarray(config.bit_rates), n)
    weights = np.asarray(config.priority_weights, dtype=float)
    priority = rng.choice(np.array([1, 2, 3]), n, p=weights / weights.sum())
    # strictly positive gaps and holding times; exponential draws of exactly 0 are possible in principle
    gaps = np.maximum(gaps, np.finfo(float).tiny)
    holding = np.maximum(holding, np.finfo(float).tiny)
    arrival = np.cumsum(gaps)
    return [
        ServiceRequest(i, int(src[i]), int(dst[i]), int(rates[i]), int(priority[i]), float(arrival[i]), float(holding[i]))
        for i in range(n)
    ]
