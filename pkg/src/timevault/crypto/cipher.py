"""Authenticated public-key encryption.

Hybrid construction: an ephemeral curve key agrees a shared secret, a
hash-derived keystream encrypts, and a 16-byte hash tag authenticates both
the ephemeral key and the ciphertext. Wrong keys and tampering both surface
as :class:`DecryptionFailure` rather than garbage plaintext.
"""
from __future__ import annotations

import hmac
import random

from . import curve
from .keccak import keccak256
from ..errors import DecryptionFailure

_TAG_BYTES = 16
OVERHEAD = 33 + _TAG_BYTES  # ephemeral key + tag


def _keystream(key: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += keccak256(key + counter.to_bytes(4, "big"))
        counter += 1
    return bytes(out[:length])


def _derive(shared_point: curve.Point) -> tuple[bytes, bytes]:
    shared = keccak256(curve.compress(shared_point))
    return keccak256(shared + b"enc"), keccak256(shared + b"mac")


def encrypt(pk: bytes, plaintext: bytes, rng: random.Random) -> bytes:
    """Encrypt to the holder of ``pk``; layout: ephemeral(33) || tag(16) || body."""
    recipient = curve.decompress(pk)
    eph = rng.randrange(1, curve.N)
    eph_pub = curve.compress(curve.scalar_base_mult(eph))
    enc_key, mac_key = _derive(curve.scalar_mult(eph, recipient))
    body = bytes(a ^ b for a, b in zip(plaintext, _keystream(enc_key, len(plaintext))))
    tag = keccak256(mac_key + eph_pub + body)[:_TAG_BYTES]
    return eph_pub + tag + body


def decrypt(sk: int, ciphertext: bytes) -> bytes:
    if len(ciphertext) < OVERHEAD:
        raise DecryptionFailure("ciphertext shorter than header")
    eph_pub, tag, body = (ciphertext[:33], ciphertext[33:OVERHEAD],
                          ciphertext[OVERHEAD:])
    try:
        eph_point = curve.decompress(eph_pub)
    except ValueError as exc:
        raise DecryptionFailure(f"bad ephemeral key: {exc}") from exc
    enc_key, mac_key = _derive(curve.scalar_mult(sk, eph_point))
    expect = keccak256(mac_key + eph_pub + body)[:_TAG_BYTES]
    if not hmac.compare_digest(tag, expect):
        raise DecryptionFailure("authentication tag mismatch")
    return bytes(a ^ b for a, b in zip(body, _keystream(enc_key, len(body))))
