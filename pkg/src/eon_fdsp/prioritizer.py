"""Ordering of disrupted services for restoration.

FDSP scores each disrupted service by a weighted sum of its normalized bit
rate, remaining holding time and priority. The weights maximize the batch
total subject to::

    w_b + w_t + w_p = 1,  w_p >= w_b + w_t,  w_b >= w_t,  w >= 0

That feasible set is a triangle with vertices (w_b, w_t, w_p) = (0, 0, 1),
(1/2, 0, 1/2) and (1/4, 1/4, 1/2). A linear objective peaks at a vertex, so the
program is solved by evaluating the three corners.

FDFS keeps the order in which disruption was detected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DisruptedService:
    service_id: int
    bit_rate: float
    priority: int
    remaining_s: float
    detection_rank: int

    def __post_init__(self):
        if not self.remaining_s > 0:
            raise ValueError(f"service {self.service_id}: remaining_s must be positive")


@dataclass(frozen=True)
class WeightVector:
    w_b: float
    w_t: float
    w_p: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w_b, self.w_t, self.w_p])

    def is_feasible(self, tol: float = 1e-12) -> bool:
        return (
            abs(self.w_b + self.w_t + self.w_p - 1.0) <= tol
            and self.w_p >= self.w_b + self.w_t - tol
            and self.w_b >= self.w_t - tol
            and min(self.w_b, self.w_t, self.w_p) >= -tol
        )


# Tie order matters: earlier vertices win equal objectives.
VERTICES = (
    WeightVector(0.0, 0.0, 1.0),
    WeightVector(0.5, 0.0, 0.5),
    WeightVector(0.25, 0.25, 0.5),
)
_VERTEX_MATRIX = np.array([v.as_array() for v in VERTICES])


@dataclass(frozen=True)
class Normalization:
    """Divisors turning raw attributes into [0, 1] scores.

    ``remaining_s`` is divided by the batch maximum.
    """

    max_bit_rate: float = 400.0
    max_priority: float = 3.0


def normalize(batch: Sequence[DisruptedService], norm: Normalization = Normalization()) -> np.ndarray:
    """Rows of (b, t, p) for the batch, shape ``(len(batch), 3)``."""
    if not batch:
        raise ValueError("empty disruption batch")
    raw = np.array([(s.bit_rate, s.remaining_s, s.priority) for s in batch], dtype=float)
    out = np.empty_like(raw)
    out[:, 0] = raw[:, 0] / norm.max_bit_rate
    out[:, 1] = raw[:, 1] / raw[:, 1].max()
    out[:, 2] = raw[:, 2] / norm.max_priority
    return out


def solve_weights(triples: np.ndarray) -> WeightVector:
    """Exact optimum of the weight program for normalized ``(b, t, p)`` rows."""
    triples = np.asarray(triples, dtype=float)
    if triples.ndim != 2 or triples.shape[0] == 0 or triples.shape[1] != 3:
        raise ValueError("expected a non-empty (n, 3) array of normalized triples")
    totals = triples.sum(axis=0)
    objectives = _VERTEX_MATRIX @ totals
    best = 0
    # strict comparison keeps the earlier vertex on ties; the 1e-12 slack absorbs
    # rounding in cases like B == T where V2 and V3 are algebraically equal
    for i in (1, 2):
        if objectives[i] > objectives[best] + 1e-12 * max(1.0, abs(objectives[best])):
            best = i
    return VERTICES[best]


def score(triples: np.ndarray, weights: WeightVector) -> np.ndarray:
    return np.asarray(triples, dtype=float) @ weights.as_array()


def rank_fdsp(batch: Sequence[DisruptedService], norm: Normalization = Normalization()) -> list[int]:
    """Service ids by descending weighted score; ties go to earlier detection."""
    triples = normalize(batch, norm)
    weights = solve_weights(triples)
    scores = score(triples, weights)
    if logger.isEnabledFor(logging.DEBUG):
        b, t, p = triples.sum(axis=0)
        logger.debug("B=%.6g T=%.6g P=%.6g weights=%s scores=%s", b, t, p, weights, np.round(scores, 6))
    ranks = np.array([s.detection_rank for s in batch])
    order = np.lexsort((ranks, -scores))
    return [batch[i].service_id for i in order]


def rank_fdfs(batch: Sequence[DisruptedService]) -> list[int]:
    """Service ids in detection order."""
    if not batch:
        raise ValueError("empty disruption batch")
    return [s.service_id for s in sorted(batch, key=lambda s: s.detection_rank)]


POLICIES = {"fdsp": rank_fdsp, "fdfs": rank_fdfs}
