"""Keypairs and address derivation."""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import curve
from .keccak import keccak256

# role tags; purely informational, all keys share the same curve
KIND_ACCOUNT = "account"
KIND_SERVICE = "service"
KIND_USER = "user"


@dataclass(frozen=True)
class KeyPair:
    kind: str
    sk: int
    pk: bytes  # compressed, 33 bytes

    def point(self) -> curve.Point:
        return curve.decompress(self.pk)


def generate_keypair(rng: random.Random, kind: str = KIND_ACCOUNT) -> KeyPair:
    sk = rng.randrange(1, curve.N)
    return KeyPair(kind=kind, sk=sk, pk=curve.compress(curve.scalar_base_mult(sk)))


def sk_to_pk(sk: int) -> bytes:
    if not 1 <= sk < curve.N:
        raise ValueError("secret key out of range")
    return curve.compress(curve.scalar_base_mult(sk))


def pk_to_address(pk: bytes) -> bytes:
    """20-byte account address: trailing bytes of the hash of the uncompressed key."""
    x, y = curve.decompress(pk)
    return keccak256(x.to_bytes(32, "big") + y.to_bytes(32, "big"))[12:]
