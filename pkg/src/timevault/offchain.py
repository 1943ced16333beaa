"""Size-accounted off-chain message passing.

Coordination between the scheduling user, followers, and executors happens
off the ledger. What travels on the wire is a 32-byte content handle per
recipient; bulk content is fetched from a shared store addressed by that
handle. The audit therefore charges 32 bytes per delivery, grouped by
protocol phase. Transport privacy is abstracted away; handing a handle to a
party models handing them the content.
"""
from __future__ import annotations

from dataclasses import dataclass

from .crypto import keccak256
from .errors import TimevaultError

HANDLE_BYTES = 32

PHASE_SCHEDULE = "schedule_delivery"   # leader bundle to each committee member
PHASE_POOL = "pool_delivery"           # follower payload to each committee member
PHASE_BROADCAST = "key_broadcast"      # executor share keys to committee peers
PHASE_OTHER = "other"

_PHASES = (PHASE_SCHEDULE, PHASE_POOL, PHASE_BROADCAST, PHASE_OTHER)


@dataclass(frozen=True)
class Delivery:
    phase: str
    sender: bytes
    recipient: bytes
    handle: bytes


class OffchainChannel:
    """Content-addressed store plus a ledger of who was handed what."""

    def __init__(self) -> None:
        self._blobs: dict[bytes, bytes] = {}
        self.deliveries: list[Delivery] = []

    # -- content -----------------------------------------------------------

    def put(self, blob: bytes) -> bytes:
        handle = keccak256(blob)
        self._blobs[handle] = blob
        return handle

    def get(self, handle: bytes) -> bytes:
        try:
            return self._blobs[handle]
        except KeyError:
            raise TimevaultError(f"unknown content handle {handle.hex()}") from None

    # -- transmissions -----------------------------------------------------

    def send(self, phase: str, sender: bytes, recipient: bytes,
             blob: bytes) -> bytes:
        handle = self.put(blob)
        self.send_handle(phase, sender, recipient, handle)
        return handle

    def send_handle(self, phase: str, sender: bytes, recipient: bytes,
                    handle: bytes) -> None:
        if phase not in _PHASES:
            raise TimevaultError(f"unknown delivery phase {phase!r}")
        if handle not in self._blobs:
            raise TimevaultError("cannot deliver a handle with no stored content")
        self.deliveries.append(Delivery(phase, sender, recipient, handle))

    # -- audit -------------------------------------------------------------

    def bytes_by_phase(self) -> dict[str, int]:
        counts = {phase: 0 for phase in _PHASES}
        for delivery in self.deliveries:
            counts[delivery.phase] += HANDLE_BYTES
        return counts

    def total_bytes(self) -> int:
        return HANDLE_BYTES * len(self.deliveries)
