"""Threshold secret sharing over a prime field.

The default field is the curve group order so service secret keys can be
shared directly. A small prime (257) is also exported for exhaustive tests.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import curve
from ..errors import (DuplicateShareIndex, InsufficientShares, InvalidThreshold,
                      SerializationError)

DEFAULT_PRIME = curve.N
TEST_PRIME = 257

SHARE_BYTES = 34  # 2-byte big-endian index || 32-byte big-endian value


@dataclass(frozen=True)
class Share:
    index: int  # evaluation point, >= 1
    value: int


def ss_split(secret: int, t: int, n: int, rng: random.Random,
             prime: int = DEFAULT_PRIME) -> list[Share]:
    """Split ``secret`` into n shares, any t of which restore it."""
    if t < 1 or n < t or n >= prime:
        raise InvalidThreshold(f"bad (t, n) = ({t}, {n}) for field of size {prime}")
    if not 0 <= secret < prime:
        raise InvalidThreshold("secret outside the field")
    coeffs = [secret] + [rng.randrange(prime) for _ in range(t - 1)]
    shares = []
    for index in range(1, n + 1):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * index + c) % prime
        shares.append(Share(index, acc))
    return shares


def ss_restore(shares: list[Share], t: int, prime: int = DEFAULT_PRIME) -> int:
    """Restore the secret from the first t of the given shares (Lagrange at 0)."""
    if len(shares) < t:
        raise InsufficientShares(f"need {t} shares, got {len(shares)}")
    use = shares[:t]
    seen = set()
    for s in use:
        if s.index in seen:
            raise DuplicateShareIndex(f"share index {s.index} repeated")
        seen.add(s.index)
    acc = 0
    for i, si in enumerate(use):
        num, den = 1, 1
        for j, sj in enumerate(use):
            if i == j:
                continue
            num = (num * sj.index) % prime
            den = (den * (sj.index - si.index)) % prime
        acc = (acc + si.value * num * pow(den, -1, prime)) % prime
    return acc


def share_to_bytes(share: Share) -> bytes:
    return share.index.to_bytes(2, "big") + share.value.to_bytes(32, "big")


def share_from_bytes(data: bytes) -> Share:
    if len(data) != SHARE_BYTES:
        raise SerializationError(f"share must be {SHARE_BYTES} bytes, got {len(data)}")
    return Share(int.from_bytes(data[:2], "big"), int.from_bytes(data[2:], "big"))
