"""Layered share encryption.

A share is wrapped under a list of public keys with ``pks[0]`` innermost, so
removing layers requires the matching secret keys in reverse order
(outermost first). A failed layer is reported by index, which lets a caller
attribute the bad key.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .cipher import decrypt, encrypt
from .shamir import Share, share_from_bytes, share_to_bytes
from ..errors import DecryptionFailure, InsufficientKeys, SerializationError

MAX_LAYERS = 255


@dataclass(frozen=True)
class Onion:
    index: int  # share index carried inside
    layers: int
    ciphertext: bytes


def onion_wrap(share: Share, pks: list[bytes], rng: random.Random) -> Onion:
    """Wrap ``share`` under every key in ``pks``, first entry innermost."""
    if not pks:
        raise InsufficientKeys("need at least one layer key")
    if len(pks) > MAX_LAYERS:
        raise InsufficientKeys(f"at most {MAX_LAYERS} layers")
    body = share_to_bytes(share)
    for pk in pks:
        body = encrypt(pk, body, rng)
    return Onion(index=share.index, layers=len(pks), ciphertext=body)


def onion_peel(onion: Onion, sks: list[int]) -> Share:
    """Unwrap with secret keys in peel order: ``sks[0]`` opens the outermost layer."""
    if len(sks) < onion.layers:
        raise InsufficientKeys(f"onion has {onion.layers} layers, got {len(sks)} keys")
    body = onion.ciphertext
    for depth in range(onion.layers):
        try:
            body = decrypt(sks[depth], body)
        except DecryptionFailure as exc:
            raise DecryptionFailure(f"layer {depth} failed: {exc}", layer=depth) from exc
    share = share_from_bytes(body)
    if share.index != onion.index:
        raise DecryptionFailure("share index does not match onion label")
    return share


def onion_to_bytes(onion: Onion) -> bytes:
    return (onion.index.to_bytes(2, "big") + bytes([onion.layers])
            + onion.ciphertext)


def onion_from_bytes(data: bytes) -> Onion:
    if len(data) < 3:
        raise SerializationError("onion too short")
    return Onion(int.from_bytes(data[:2], "big"), data[2], data[3:])
