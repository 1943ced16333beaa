"""Verifiable random function over the curve.

Discrete-log equality proof in the usual Chaum-Pedersen shape: the prover
raises a message-derived point to its secret key and proves the exponent
matches its public key. Output is a 32-byte hash of the raised point, so
anyone can check the value under the prover's public key alone.
"""
from __future__ import annotations

from . import curve
from .keccak import keccak256
from ..errors import InvalidProof

PROOF_BYTES = 33 + 32 + 32  # gamma || c || s


def _hash_to_curve(pk: bytes, msg: bytes) -> curve.Point:
    for ctr in range(256):
        digest = keccak256(b"h2c" + pk + msg + bytes([ctr]))
        point = curve.lift_x(int.from_bytes(digest, "big") % curve.P, 0)
        if point is not None:
            return point
    raise InvalidProof("hash-to-curve failed")  # probability ~2^-256


def _challenge(pk: bytes, h: bytes, gamma: bytes, u: bytes, v: bytes) -> int:
    return int.from_bytes(keccak256(b"chal" + pk + h + gamma + u + v), "big") % curve.N


def _output(gamma: bytes) -> bytes:
    return keccak256(b"out" + gamma)


def vrf_eval(sk: int, msg: bytes) -> tuple[bytes, bytes]:
    """Return (value, proof); value is uniform per (sk, msg) and reproducible."""
    pk = curve.compress(curve.scalar_base_mult(sk))
    H = _hash_to_curve(pk, msg)
    h_bytes = curve.compress(H)
    gamma = curve.compress(curve.scalar_mult(sk, H))
    counter = 0
    while True:
        k = int.from_bytes(
            keccak256(b"vnonce" + sk.to_bytes(32, "big") + h_bytes
                      + counter.to_bytes(4, "big")), "big") % curve.N
        if k != 0:
            break
        counter += 1
    u = curve.compress(curve.scalar_base_mult(k))
    v = curve.compress(curve.scalar_mult(k, H))
    c = _challenge(pk, h_bytes, gamma, u, v)
    s = (k + c * sk) % curve.N
    proof = gamma + c.to_bytes(32, "big") + s.to_bytes(32, "big")
    return _output(gamma), proof


def vrf_verify(pk: bytes, msg: bytes, proof: bytes) -> bytes:
    """Check ``proof`` under ``pk`` and return the proven value, else raise."""
    if len(proof) != PROOF_BYTES:
        raise InvalidProof("bad proof length")
    gamma_bytes, c_bytes, s_bytes = proof[:33], proof[33:65], proof[65:]
    c = int.from_bytes(c_bytes, "big")
    s = int.from_bytes(s_bytes, "big")
    if not (0 < s < curve.N) or not (0 <= c < curve.N):
        raise InvalidProof("proof scalar out of range")
    try:
        gamma = curve.decompress(gamma_bytes)
        q = curve.decompress(pk)
    except ValueError as exc:
        raise InvalidProof(f"bad point encoding: {exc}") from exc
    H = _hash_to_curve(pk, msg)
    h_bytes = curve.compress(H)
    # U = s*G - c*Q ; V = s*H - c*Gamma
    u = curve.point_add(curve.scalar_base_mult(s),
                        curve.point_neg(curve.scalar_mult(c, q)))
    v = curve.point_add(curve.scalar_mult(s, H),
                        curve.point_neg(curve.scalar_mult(c, gamma)))
    if u is None or v is None:
        raise InvalidProof("degenerate proof")
    if _challenge(pk, h_bytes, gamma_bytes, curve.compress(u), curve.compress(v)) != c:
        raise InvalidProof("challenge mismatch")
    return _output(gamma_bytes)
