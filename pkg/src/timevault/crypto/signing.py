"""Signatures with signer recovery.

``sign`` produces a (v, r, s) triplet over a 32-byte digest; ``verify``
recovers the signer's address from the signature alone, so callers compare
the result against an expected address instead of passing a public key.
Nonces are derived from (sk, digest), making signatures reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import curve
from .keccak import keccak256
from .keys import pk_to_address
from ..errors import MalformedSignature

SIGNATURE_BYTES = 65  # r(32) || s(32) || v(1)


@dataclass(frozen=True)
class Signature:
    v: int  # 27 or 28
    r: int
    s: int

    def to_bytes(self) -> bytes:
        return self.r.to_bytes(32, "big") + self.s.to_bytes(32, "big") + bytes([self.v])


def signature_from_bytes(data: bytes) -> Signature:
    if len(data) != SIGNATURE_BYTES:
        raise MalformedSignature(f"signature must be {SIGNATURE_BYTES} bytes")
    return Signature(data[64], int.from_bytes(data[:32], "big"),
                     int.from_bytes(data[32:64], "big"))


def sign(sk: int, digest: bytes) -> Signature:
    if len(digest) != 32:
        raise MalformedSignature("digest must be 32 bytes")
    z = int.from_bytes(digest, "big") % curve.N
    sk_bytes = sk.to_bytes(32, "big")
    counter = 0
    while True:
        k = int.from_bytes(
            keccak256(b"nonce" + sk_bytes + digest + counter.to_bytes(4, "big")), "big") % curve.N
        counter += 1
        if k == 0:
            continue
        R = curve.scalar_base_mult(k)
        assert R is not None
        if R[0] >= curve.N:  # would need an extended recovery id; re-draw instead
            continue
        r = R[0]
        if r == 0:
            continue
        s = (pow(k, -1, curve.N) * (z + r * sk)) % curve.N
        if s == 0:
            continue
        recid = R[1] & 1
        if s > curve.N // 2:  # canonical low-s form
            s = curve.N - s
            recid ^= 1
        return Signature(27 + recid, r, s)


def recover_pk(digest: bytes, sig: Signature) -> bytes:
    """Recover the compressed public key that produced ``sig`` over ``digest``."""
    if len(digest) != 32:
        raise MalformedSignature("digest must be 32 bytes")
    if sig.v not in (27, 28) or not (1 <= sig.r < curve.N) or not (1 <= sig.s < curve.N):
        raise MalformedSignature("signature components out of range")
    R = curve.lift_x(sig.r, sig.v - 27)
    if R is None:
        raise MalformedSignature("r does not name a curve point")
    z = int.from_bytes(digest, "big") % curve.N
    r_inv = pow(sig.r, -1, curve.N)
    u1 = (-z * r_inv) % curve.N
    u2 = (sig.s * r_inv) % curve.N
    Q = curve.point_add(curve.scalar_base_mult(u1), curve.scalar_mult(u2, R))
    if Q is None:
        raise MalformedSignature("recovered the point at infinity")
    return curve.compress(Q)


def verify(digest: bytes, sig: Signature | bytes) -> bytes:
    """Address of the signer recovered from ``sig`` (object or 65-byte form)."""
    if isinstance(sig, (bytes, bytearray)):
        sig = signature_from_bytes(bytes(sig))
    return pk_to_address(recover_pk(digest, sig))
