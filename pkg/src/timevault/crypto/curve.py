"""Compact secp256k1 arithmetic.

Affine points are ``(x, y)`` tuples with ``None`` for the point at infinity.
Internally Jacobian coordinates avoid per-step inversions; the generator uses
a 4-bit windowed table (batch-normalised to affine once at import) so key
generation stays cheap in bulk simulations.
"""
from __future__ import annotations

P = 2**256 - 2**32 - 977
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

Point = tuple[int, int] | None


def is_on_curve(point: Point) -> bool:
    if point is None:
        return True
    x, y = point
    return 0 <= x < P and 0 <= y < P and (y * y - (x * x * x + 7)) % P == 0


# ---------------------------------------------------------------- jacobian

def _jac_double(X1: int, Y1: int, Z1: int) -> tuple[int, int, int]:
    if Y1 == 0:
        return 0, 1, 0
    A = (X1 * X1) % P
    B = (Y1 * Y1) % P
    C = (B * B) % P
    D = (2 * ((X1 + B) * (X1 + B) - A - C)) % P
    E = (3 * A) % P
    F = (E * E) % P
    X3 = (F - 2 * D) % P
    Y3 = (E * (D - X3) - 8 * C) % P
    Z3 = (2 * Y1 * Z1) % P
    return X3, Y3, Z3


def _jac_add_mixed(X1: int, Y1: int, Z1: int, x2: int, y2: int) -> tuple[int, int, int]:
    # second operand affine (Z2 = 1)
    if Z1 == 0:
        return x2, y2, 1
    Z1Z1 = (Z1 * Z1) % P
    U2 = (x2 * Z1Z1) % P
    S2 = (y2 * Z1 * Z1Z1) % P
    if U2 == X1:
        if S2 != Y1:
            return 0, 1, 0
        return _jac_double(X1, Y1, Z1)
    H = (U2 - X1) % P
    HH = (H * H) % P
    I = (4 * HH) % P
    J = (H * I) % P
    r = (2 * (S2 - Y1)) % P
    V = (X1 * I) % P
    X3 = (r * r - J - 2 * V) % P
    Y3 = (r * (V - X3) - 2 * Y1 * J) % P
    Z3 = ((Z1 + H) * (Z1 + H) - Z1Z1 - HH) % P
    return X3, Y3, Z3


def _jac_to_affine(X: int, Y: int, Z: int) -> Point:
    if Z == 0:
        return None
    zinv = pow(Z, -1, P)
    zinv2 = (zinv * zinv) % P
    return (X * zinv2) % P, (Y * zinv2 * zinv) % P


def point_add(p: Point, q: Point) -> Point:
    if p is None:
        return q
    if q is None:
        return p
    if p[0] == q[0] and (p[1] + q[1]) % P == 0:
        return None
    if p == q:
        return _jac_to_affine(*_jac_double(p[0], p[1], 1))
    return _jac_to_affine(*_jac_add_mixed(p[0], p[1], 1, q[0], q[1]))


def point_neg(p: Point) -> Point:
    if p is None:
        return None
    return p[0], (-p[1]) % P


def scalar_mult(k: int, point: Point) -> Point:
    """k * point for an arbitrary point."""
    k %= N
    if k == 0 or point is None:
        return None
    px, py = point
    X, Y, Z = 0, 1, 0
    for bit in bin(k)[2:]:
        X, Y, Z = _jac_double(X, Y, Z)
        if bit == "1":
            X, Y, Z = _jac_add_mixed(X, Y, Z, px, py)
    return _jac_to_affine(X, Y, Z)


def _build_base_table() -> list[list[tuple[int, int]]]:
    # table[w][m-1] = (m << 4w) * G in affine, m in 1..15

    rows: list[list[tuple[int, int, int]]] = []
    base = (GX, GY, 1)
    for _ in range(64):
        row = [base]
        for _ in range(14):
            X, Y, Z = row[-1]
            # add jacobian base via general add: convert base once per row
            row.append(_jac_add_jac(X, Y, Z, *base))
        rows.append(row)
        for _ in range(4):
            base = _jac_double(*base)
    # batch-normalise all entries with a single inversion
    zs = [pt[2] for row in rows for pt in row]
    prefix = [1]
    for z in zs:
        prefix.append((prefix[-1] * z) % P)
    inv_total = pow(prefix[-1], -1, P)
    invs = [0] * len(zs)
    for i in range(len(zs) - 1, -1, -1):
        invs[i] = (prefix[i] * inv_total) % P
        inv_total = (inv_total * zs[i]) % P
    out: list[list[tuple[int, int]]] = []
    idx = 0
    for row in rows:
        arow = []
        for X, Y, Z in row:
            zi = invs[idx]
            idx += 1
            zi2 = (zi * zi) % P
            arow.append(((X * zi2) % P, (Y * zi2 * zi) % P))
        out.append(arow)
    return out


def _jac_add_jac(X1: int, Y1: int, Z1: int, X2: int, Y2: int, Z2: int) -> tuple[int, int, int]:
    if Z1 == 0:
        return X2, Y2, Z2
    if Z2 == 0:
        return X1, Y1, Z1
    Z1Z1 = (Z1 * Z1) % P
    Z2Z2 = (Z2 * Z2) % P
    U1 = (X1 * Z2Z2) % P
    U2 = (X2 * Z1Z1) % P
    S1 = (Y1 * Z2 * Z2Z2) % P
    S2 = (Y2 * Z1 * Z1Z1) % P
    if U1 == U2:
        if S1 != S2:
            return 0, 1, 0
        return _jac_double(X1, Y1, Z1)
    H = (U2 - U1) % P
    I = (4 * H * H) % P
    J = (H * I) % P
    r = (2 * (S2 - S1)) % P
    V = (U1 * I) % P
    X3 = (r * r - J - 2 * V) % P
    Y3 = (r * (V - X3) - 2 * S1 * J) % P
    Z3 = (((Z1 + Z2) * (Z1 + Z2) - Z1Z1 - Z2Z2) * H) % P
    return X3, Y3, Z3


_BASE_TABLE = _build_base_table()


def scalar_base_mult(k: int) -> Point:
    """k * G via the windowed table."""
    k %= N
    if k == 0:
        return None
    X, Y, Z = 0, 1, 0
    w = 0
    while k:
        m = k & 0xF
        if m:
            px, py = _BASE_TABLE[w][m - 1]
            X, Y, Z = _jac_add_mixed(X, Y, Z, px, py)
        k >>= 4
        w += 1
    return _jac_to_affine(X, Y, Z)


# ------------------------------------------------------------- encodings

def compress(point: Point) -> bytes:
    if point is None:
        raise ValueError("cannot compress the point at infinity")
    x, y = point
    return bytes([2 + (y & 1)]) + x.to_bytes(32, "big")


def lift_x(x: int, parity: int) -> Point:
    """Return the curve point with this x and y-parity, or None if x is not on the curve."""
    if not 0 <= x < P:
        return None
    y2 = (pow(x, 3, P) + 7) % P
    y = pow(y2, (P + 1) // 4, P)
    if (y * y) % P != y2:
        return None
    if y & 1 != parity & 1:
        y = P - y
    return x, y


def decompress(data: bytes) -> Point:
    if len(data) != 33 or data[0] not in (2, 3):
        raise ValueError("bad compressed point encoding")
    point = lift_x(int.from_bytes(data[1:], "big"), data[0] - 2)
    if point is None:
        raise ValueError("x not on curve")
    return point
