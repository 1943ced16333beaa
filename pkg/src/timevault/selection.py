"""Randomized committee selection over a registry snapshot.

Picks are made one at a time. Pick number i (1-based) hashes the 32-byte
randomness together with i to get a start position, then scans forward with
wraparound until it finds a candidate that is available and not already
chosen. Selection is deterministic given the randomness and the snapshot,
so anyone can replay it to audit a published committee.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

from .crypto import keccak256
from .errors import SelectionError

# index_fn(randomness, pick_number) -> start position in [0, size)
IndexFn = Callable[[bytes, int], int]


def default_index_fn(size: int) -> IndexFn:
    if size <= 0:
        raise SelectionError("empty registry")

    def index_fn(randomness: bytes, pick: int) -> int:
        digest = keccak256(randomness + pick.to_bytes(8, "big"))
        return int.from_bytes(digest, "big") % size

    return index_fn


def select_committee(
    size: int,
    count: int,
    randomness: bytes,
    available: Callable[[int], bool],
    index_fn: Optional[IndexFn] = None,
) -> list[int]:
    """Return `count` distinct registry positions chosen by `randomness`.

    `available` is consulted against the snapshot; wraparound scanning means
    an unavailable start position slides to the next free one.
    """
    if count <= 0:
        raise SelectionError("committee size must be positive")
    if index_fn is None:
        index_fn = default_index_fn(size)
    picked: list[int] = []
    taken = set()
    for pick in range(1, count + 1):
        start = index_fn(randomness, pick)
        if not 0 <= start < size:
            raise SelectionError(f"index function produced {start} outside registry")
        pos = start
        for _ in range(size):
            if pos not in taken and available(pos):
                break
            pos = (pos + 1) % size
        else:
            raise SelectionError("insufficient available executors")
        picked.append(pos)
        taken.add(pos)
    return picked


def committee_addresses(
    order: Sequence[bytes],
    count: int,
    randomness: bytes,
    available: Callable[[bytes], bool],
    index_fn: Optional[IndexFn] = None,
) -> list[bytes]:
    """Address-level convenience wrapper over `select_committee`."""
    positions = select_committee(
        len(order), count, randomness,
        available=lambda pos: available(order[pos]),
        index_fn=index_fn,
    )
    return [order[pos] for pos in positions]
