"""Verifiable randomness: prove/verify round trips and forgery rejection."""
from __future__ import annotations

import random

import pytest

from timevault.crypto import generate_keypair, vrf_eval, vrf_verify
from timevault.crypto.vrf import PROOF_BYTES
from timevault.errors import InvalidProof


def test_eval_verify_roundtrip():
    rng = random.Random(40)
    for _ in range(60):
        kp = generate_keypair(rng)
        msg = rng.randbytes(rng.randrange(1, 64))
        value, proof = vrf_eval(kp.sk, msg)
        assert len(value) == 32
        assert len(proof) == PROOF_BYTES == 97
        assert vrf_verify(kp.pk, msg, proof) == value


def test_value_depends_only_on_key_and_message():
    rng = random.Random(41)
    kp = generate_keypair(rng)
    v1, p1 = vrf_eval(kp.sk, b"fixed")
    v2, p2 = vrf_eval(kp.sk, b"fixed")
    assert (v1, p1) == (v2, p2)
    v3, _ = vrf_eval(kp.sk, b"other")
    assert v3 != v1


def test_distinct_keys_distinct_values():
    rng = random.Random(42)
    a, b = generate_keypair(rng), generate_keypair(rng)
    assert vrf_eval(a.sk, b"m")[0] != vrf_eval(b.sk, b"m")[0]


def test_wrong_public_key_rejected():
    rng = random.Random(43)
    kp, other = generate_keypair(rng), generate_keypair(rng)
    _, proof = vrf_eval(kp.sk, b"claim")
    with pytest.raises(InvalidProof):
        vrf_verify(other.pk, b"claim", proof)


def test_wrong_message_rejected():
    rng = random.Random(44)
    kp = generate_keypair(rng)
    _, proof = vrf_eval(kp.sk, b"original")
    with pytest.raises(InvalidProof):
        vrf_verify(kp.pk, b"altered", proof)


def test_tampered_proof_rejected():
    rng = random.Random(45)
    kp = generate_keypair(rng)
    _, proof = vrf_eval(kp.sk, b"m")
    for pos in (0, 20, 33, 64, 65, 96):
        bad = bytearray(proof)
        bad[pos] ^= 0x02
        with pytest.raises(InvalidProof):
            vrf_verify(kp.pk, b"m", bytes(bad))
    with pytest.raises(InvalidProof):
        vrf_verify(kp.pk, b"m", proof[:-1])
