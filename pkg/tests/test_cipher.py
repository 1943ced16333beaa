"""Public-key cipher: round trips, tamper rejection, frozen overhead."""
from __future__ import annotations

import random

import pytest

from timevault.crypto import decrypt, encrypt, generate_keypair
from timevault.crypto.cipher import OVERHEAD
from timevault.errors import DecryptionFailure


def test_roundtrip_many():
    rng = random.Random(100)
    for _ in range(100):
        kp = generate_keypair(rng)
        msg = rng.randbytes(rng.randrange(0, 120))
        assert decrypt(kp.sk, encrypt(kp.pk, msg, rng)) == msg


def test_empty_plaintext():
    rng = random.Random(1)
    kp = generate_keypair(rng)
    ct = encrypt(kp.pk, b"", rng)
    assert len(ct) == OVERHEAD
    assert decrypt(kp.sk, ct) == b""


def test_overhead_is_fixed():
    rng = random.Random(2)
    kp = generate_keypair(rng)
    for n in (0, 1, 34, 99):
        assert len(encrypt(kp.pk, b"m" * n, rng)) == n + OVERHEAD
    assert OVERHEAD == 49


def test_wrong_key_fails_clean():
    rng = random.Random(3)
    kp, other = generate_keypair(rng), generate_keypair(rng)
    ct = encrypt(kp.pk, b"payload", rng)
    with pytest.raises(DecryptionFailure):
        decrypt(other.sk, ct)


def test_tampering_detected_everywhere():
    rng = random.Random(4)
    kp = generate_keypair(rng)
    ct = bytearray(encrypt(kp.pk, b"twelve bytes", rng))
    for pos in range(len(ct)):
        ct[pos] ^= 0x40
        with pytest.raises(DecryptionFailure):
            decrypt(kp.sk, bytes(ct))
        ct[pos] ^= 0x40
    assert decrypt(kp.sk, bytes(ct)) == b"twelve bytes"


def test_truncated_ciphertext():
    rng = random.Random(5)
    kp = generate_keypair(rng)
    ct = encrypt(kp.pk, b"x", rng)
    with pytest.raises(DecryptionFailure):
        decrypt(kp.sk, ct[:OVERHEAD - 1])


def test_fresh_randomness_changes_ciphertext():
    rng = random.Random(6)
    kp = generate_keypair(rng)
    first = encrypt(kp.pk, b"same message", rng)
    second = encrypt(kp.pk, b"same message", rng)
    assert first != second
    assert decrypt(kp.sk, first) == decrypt(kp.sk, second)
