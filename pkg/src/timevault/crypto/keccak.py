"""Keccak-256 (original pad-0x01 variant, not NIST SHA-3).

Two evaluation paths share the same round logic expressed twice: a scalar
sponge for protocol use and a numpy-vectorised single-block batch used by the
Monte-Carlo tooling, which hashes millions of short messages. The batch path
is tested against the scalar path, and the scalar path against the published
test vectors.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_RATE = 136  # bytes; capacity 512 bits

_RC = [
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
]

# rho rotation offsets, flat index i = x + 5*y
_ROT = [
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
]

# pi destination for flat source index i = x + 5*y: dest = y + 5*((2x + 3y) % 5)
_PI = [0] * 25
for _x in range(5):
    for _y in range(5):
        _PI[_x + 5 * _y] = _y + 5 * ((2 * _x + 3 * _y) % 5)


def _build_permute():
    # Fully unrolled permutation over 25 local lane variables; roughly 5x
    # faster than a table-driven loop, which matters because the simulator
    # hashes on every transaction, digest, and committee pick.
    lines = ["def _permute(a):"]
    lines.append("    " + ",".join(f"a{i}" for i in range(25)) + " = a")
    for rc in _RC:
        for x in range(5):
            lines.append(f"    c{x} = a{x}^a{x + 5}^a{x + 10}^a{x + 15}^a{x + 20}")
        for x in range(5):
            p, n = (x - 1) % 5, (x + 1) % 5
            lines.append(f"    d{x} = c{p} ^ (((c{n} << 1) | (c{n} >> 63)) & {_MASK})")
        for i in range(25):
            r = _ROT[i]
            if r == 0:
                lines.append(f"    b{_PI[i]} = a{i} ^ d{i % 5}")
            else:
                lines.append(f"    t = a{i} ^ d{i % 5}")
                lines.append(f"    b{_PI[i]} = ((t << {r}) | (t >> {64 - r})) & {_MASK}")
        for y in range(0, 25, 5):
            for x in range(5):
                lines.append(
                    f"    a{y + x} = b{y + x} ^ (~b{y + (x + 1) % 5} & b{y + (x + 2) % 5})"
                )
        lines.append(f"    a0 ^= {rc}")
    lines.append("    a[:] = " + ",".join(f"a{i}" for i in range(25)))
    ns: dict = {}
    exec("\n".join(lines), ns)
    return ns["_permute"]


_permute = _build_permute()


def keccak256(data: bytes) -> bytes:
    """Keccak-256 digest of ``data`` (32 bytes)."""
    pad_len = _RATE - (len(data) % _RATE)
    if pad_len == 1:
        padded = data + b"\x81"
    else:
        padded = data + b"\x01" + b"\x00" * (pad_len - 2) + b"\x80"
    state = [0] * 25
    for off in range(0, len(padded), _RATE):
        block = padded[off:off + _RATE]
        for lane in range(17):
            state[lane] ^= int.from_bytes(block[lane * 8:lane * 8 + 8], "little")
        _permute(state)
    out = bytearray()
    for lane in range(4):
        out += state[lane].to_bytes(8, "little")
    return bytes(out)


def _np_rot(v: np.ndarray, r: int) -> np.ndarray:
    if r == 0:
        return v
    return (v << np.uint64(r)) | (v >> np.uint64(64 - r))


def keccak256_batch(messages: np.ndarray) -> np.ndarray:
    """Vectorised Keccak-256 over many equal-length short messages.

    ``messages`` is a (count, length) uint8 array with length <= 135 so each
    message absorbs in a single block. Returns a (count, 32) uint8 array equal
    row-by-row to :func:`keccak256` of the same bytes.
    """
    if messages.ndim != 2 or messages.dtype != np.uint8:
        raise ValueError("messages must be a 2-D uint8 array")
    count, length = messages.shape
    if length > _RATE - 1:
        raise ValueError("batch path supports single-block messages only")
    padded = np.zeros((count, _RATE), dtype=np.uint8)
    padded[:, :length] = messages
    padded[:, length] = 0x01
    padded[:, _RATE - 1] |= 0x80
    lanes = padded.view("<u8")  # (count, 17)
    state = [np.zeros(count, dtype=np.uint64) for _ in range(25)]
    for lane in range(17):
        state[lane] = lanes[:, lane].copy()
    for rc in _RC:
        c = [state[x] ^ state[x + 5] ^ state[x + 10] ^ state[x + 15] ^ state[x + 20]
             for x in range(5)]
        d = [c[(x - 1) % 5] ^ _np_rot(c[(x + 1) % 5], 1) for x in range(5)]
        b: list[np.ndarray] = [None] * 25  # type: ignore[list-item]
        for i in range(25):
            b[_PI[i]] = _np_rot(state[i] ^ d[i % 5], _ROT[i])
        for y in range(0, 25, 5):
            row = b[y:y + 5]
            for x in range(5):
                state[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5])
        state[0] = state[0] ^ np.uint64(rc)
    out = np.empty((count, 32), dtype=np.uint8)
    for lane in range(4):
        out[:, lane * 8:lane * 8 + 8] = state[lane][:, None].view(np.uint8).reshape(count, 8)
    return out
