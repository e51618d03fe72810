"""Per-link slot occupancy and first-fit search over paths.

Every link of a topology owns one row of a shared ``(links, slots)`` integer
matrix. A slot holds the id of the service that owns it, or ``FREE`` (-1).
Guard slots are owned exactly like data slots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from eon_fdsp.topology import LinkState

logger = logging.getLogger(__name__)

FREE = -1


class SpectrumError(RuntimeError):
    """Raised on occupancy conflicts or searches over failed links."""


@dataclass(frozen=True)
class SlotBlock:
    """Slots ``[start, start + width)``; ``width`` includes the guard band."""

    start: int
    width: int

    def __post_init__(self):
        if self.start < 0 or self.width < 1:
            raise ValueError(f"invalid slot block start={self.start} width={self.width}")

    @property
    def stop(self) -> int:
        return self.start + self.width


class SpectrumGrid:
    """View on the slot owners of one link."""

    __slots__ = ("owner",)

    def __init__(self, owner: np.ndarray):
        self.owner = owner

    @property
    def slot_count(self) -> int:
        return self.owner.shape[0]

    @property
    def occupied(self) -> np.ndarray:
        return self.owner != FREE

    def is_free(self, block: SlotBlock) -> bool:
        return bool(np.all(self.owner[block.start:block.stop] == FREE))

    def bits(self) -> str:
        return "".join("1" if o else "0" for o in self.occupied)


def first_free_run(busy: np.ndarray, width: int) -> int | None:
    """Smallest index starting ``width`` consecutive False entries in ``busy``."""
    n = busy.shape[0]
    if width > n:
        return None
    free = np.empty(n + 1, dtype=np.int32)
    free[0] = 0
    np.cumsum(~busy, out=free[1:])
    hits = np.flatnonzero(free[width:] - free[:-width] == width)
    return int(hits[0]) if hits.size else None


class SpectrumPool:
    """Slot occupancy for all links of one topology.

    Keeps an index from service id to its (links, block) so that release does
    not need to scan the grid.
    """

    def __init__(self, link_count: int, slot_count: int = 256):
        if slot_count < 1:
            raise ValueError("slot_count must be positive")
        self.slot_count = slot_count
        self.owner = np.full((link_count, slot_count), FREE, dtype=np.int64)
        self.grids = [SpectrumGrid(self.owner[i]) for i in range(link_count)]
        self._held: dict[int, tuple[tuple[int, ...], SlotBlock]] = {}

    @staticmethod
    def _ids(links: Sequence[LinkState]) -> list[int]:
        ids = []
        for link in links:
            if not link.operational:
                raise SpectrumError(f"link {link.id} is not operational")
            ids.append(link.id)
        return ids

    def path_busy(self, links: Sequence[LinkState]) -> np.ndarray:
        ids = self._ids(links)
        return np.any(self.owner[ids] != FREE, axis=0)

    def first_fit(self, links: Sequence[LinkState], width: int) -> SlotBlock | None:
        """Lowest-indexed block of ``width`` slots free on every link of the path."""
        if width > self.slot_count:
            raise ValueError(f"width {width} exceeds the {self.slot_count}-slot grid")
        start = first_free_run(self.path_busy(links), width)
        return None if start is None else SlotBlock(start, width)

    def allocate(self, links: Sequence[LinkState], block: SlotBlock, service_id: int) -> None:
        """Give ``block`` on every link of the path to ``service_id``.

        Raises :class:`SpectrumError` and leaves the grid untouched when any
        slot is already taken.
        """
        ids = self._ids(links)
        if service_id in self._held:
            raise SpectrumError(f"service {service_id} already holds spectrum")
        if service_id < 0:
            raise ValueError("service ids must be non-negative")
        if block.stop > self.slot_count:
            raise SpectrumError(f"block {block} exceeds the grid")
        if len(set(ids)) != len(ids):
            raise SpectrumError("path repeats a link")
        window = self.owner[ids, block.start:block.stop]
        if np.any(window != FREE):
            raise SpectrumError(f"block {block} overlaps existing occupation for service {service_id}")
        self.owner[ids, block.start:block.stop] = service_id
        self._held[service_id] = (tuple(ids), block)

    def release(self, service_id: int) -> int:
        """Free every slot owned by ``service_id``; returns the number freed."""
        entry = self._held.pop(service_id, None)
        if entry is None:
            return 0
        ids, block = entry
        ids = list(ids)
        self.owner[ids, block.start:block.stop] = FREE
        return len(ids) * block.width

    def holdings(self, service_id: int) -> tuple[tuple[int, ...], SlotBlock] | None:
        return self._held.get(service_id)

    def services_on(self, link_ids: Iterable[int]) -> set[int]:
        rows = self.owner[list(link_ids)]
        return {int(s) for s in np.unique(rows) if s != FREE}

    def is_empty(self) -> bool:
        return not self._held and bool(np.all(self.owner == FREE))

    def check(self) -> None:
        """Assert exclusivity, continuity and contiguity against the index."""
        expected = np.full_like(self.owner, FREE)
        for sid, (ids, block) in self._held.items():
            window = expected[list(ids), block.start:block.stop]
            if np.any(window != FREE):
                raise SpectrumError(f"service {sid} overlaps another service")
            expected[list(ids), block.start:block.stop] = sid
        if not np.array_equal(expected, self.owner):
            bad = np.argwhere(expected != self.owner)[0]
            raise SpectrumError(f"grid disagrees with allocation index at link {bad[0]}, slot {bad[1]}")

    def dump(self, level: int = logging.DEBUG) -> None:
        if logger.isEnabledFor(level):
            for i, grid in enumerate(self.grids):
                logger.log(level, "link %3d %s", i, grid.bits())
