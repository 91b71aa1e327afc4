"""Number-theoretic transform and slot encoding/decoding matrices.

The forward transform evaluates a ring element at the n odd powers of a
primitive 2n-th root of unity.  Slots are ordered by the rotation-helper
sequence J(h) = 5^h mod 2n for the first half and J*(h) = -5^h mod 2n
for the second, matching the row order of the decoding matrix W*; slot
rotation semantics depend on exactly this order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modular import BadModulus, find_primitive_2nth_root, mod_inverse
from .ring import RingPoly, RingParams


class TableMismatch(ValueError):
    """Tables were built for a different ring."""


def j_sequences(n: int) -> tuple[list[int], list[int]]:
    """J(h) = 5^h mod 2n and J*(h) = -5^h mod 2n for h < n/2."""
    two_n = 2 * n
    js, jstars = [], []
    v = 1
    for _ in range(n // 2):
        js.append(v)
        jstars.append((two_n - v) % two_n)
        v = v * 5 % two_n
    return js, jstars


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        out[i] = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
    return out


@dataclass(frozen=True)
class NttTables:
    """Precomputed data for the negacyclic NTT of degree n over prime q."""

    n: int
    q: int
    omega: int                 # primitive 2n-th root psi, psi^n = -1
    psi_powers: tuple          # psi^j for j < n
    psi_inv_powers: tuple
    n_inv: int
    slot_index: tuple          # slot s holds evaluation at omega^exponent
    slot_exponents: tuple      # the J-ordered odd exponents
    _brev: tuple

    @classmethod
    def build(cls, n: int, q: int, omega: int | None = None) -> "NttTables":
        if omega is None:
            omega = find_primitive_2nth_root(q, n)
        if pow(omega, n, q) != q - 1:
            raise BadModulus(f"{omega}^{n} != -1 mod {q}")
        psi_powers = [1] * n
        for j in range(1, n):
            psi_powers[j] = psi_powers[j - 1] * omega % q
        omega_inv = mod_inverse(omega, q)
        psi_inv = [1] * n
        for j in range(1, n):
            psi_inv[j] = psi_inv[j - 1] * omega_inv % q
        js, jstars = j_sequences(n)
        exponents = js + jstars
        # Natural order index i holds evaluation at omega^(2i+1).
        slot_index = tuple((e - 1) // 2 for e in exponents)
        return cls(n=n, q=q, omega=omega,
                   psi_powers=tuple(psi_powers),
                   psi_inv_powers=tuple(psi_inv),
                   n_inv=mod_inverse(n, q),
                   slot_index=slot_index,
                   slot_exponents=tuple(exponents),
                   _brev=tuple(_bit_reverse_permutation(n)))


def _cyclic_ntt(values: np.ndarray, tables: NttTables, inverse: bool) -> np.ndarray:
    """In-place-style radix-2 Cooley-Tukey over omega = psi^2."""
    n, q = tables.n, tables.q
    a = values[np.array(tables._brev, dtype=np.int64)].copy()
    length = 2
    while length <= n:
        half = length // 2
        # twiddle = (psi^2)^(n/length * j), j < half
        step = 2 * (n // length)
        src = tables.psi_inv_powers if inverse else tables.psi_powers
        tw = np.array([_pow_from_table(src, step * j, q) for j in range(half)],
                      dtype=object)
        blocks = a.reshape(n // length, length)
        lo = blocks[:, :half]
        hi = blocks[:, half:]
        t = (hi * tw[None, :]) % q
        blocks[:, half:] = (lo - t) % q
        blocks[:, :half] = (lo + t) % q
        a = blocks.reshape(n)
        length *= 2
    return a


def _pow_from_table(powers: tuple, exponent: int, q: int) -> int:
    n = len(powers)
    exponent %= 2 * n
    if exponent < n:
        return powers[exponent]
    return (q - powers[exponent - n]) % q


def ntt_forward(f: RingPoly, tables: NttTables) -> RingPoly:
    """Coefficient form -> evaluation form.

    Slot s holds f(omega^J(s)) for s < n/2 and f(omega^J*(s - n/2))
    above; O(n log n) butterflies.
    """
    _check_tables(f, tables)
    if f.form != "coef":
        raise TableMismatch("input already in evaluation form")
    q = tables.q
    psi = np.array(tables.psi_powers, dtype=object)
    twisted = (f.coeffs * psi) % q
    natural = _cyclic_ntt(twisted, tables, inverse=False)
    slots = natural[np.array(tables.slot_index, dtype=np.int64)]
    return RingPoly(f.params, slots, form="eval")


def ntt_inverse(v: RingPoly, tables: NttTables) -> RingPoly:
    """Evaluation form -> coefficient form (exact inverse of ntt_forward)."""
    _check_tables(v, tables)
    if v.form != "eval":
        raise TableMismatch("input not in evaluation form")
    q, n = tables.q, tables.n
    natural = np.empty(n, dtype=object)
    natural[np.array(tables.slot_index, dtype=np.int64)] = v.coeffs
    untwisted = _cyclic_ntt(natural, tables, inverse=True)
    psi_inv = np.array(tables.psi_inv_powers, dtype=object)
    coeffs = (untwisted * psi_inv * tables.n_inv) % q
    return RingPoly(v.params, coeffs, form="coef")


def pointwise(a: RingPoly, b: RingPoly) -> RingPoly:
    """Slot-wise product of two evaluation-form elements."""
    if a.params != b.params or a.form != "eval" or b.form != "eval":
        raise TableMismatch("pointwise needs two evaluation-form operands")
    out = (a.coeffs * b.coeffs) % a.params.modulus
    return RingPoly(a.params, out, form="eval")


def _check_tables(f: RingPoly, tables: NttTables):
    if f.params.n != tables.n or f.params.modulus != tables.q:
        raise TableMismatch(
            f"tables for (n={tables.n}, q={tables.q}) vs ring "
            f"(n={f.params.n}, q={f.params.modulus})")


@dataclass(frozen=True)
class EncodingMatrices:
    """Slot encoding matrix W and decoding matrix W* with J tables.

    Encoding: m = n^-1 * W @ reverse(v); decoding: v = W* @ m.
    Over a ring field the entries are ints mod t; over the complex field
    they are complex128 with omega = exp(i*pi/n).  The reverse identity
    W* @ W == n * I^R holds exactly over the ring and to ~1e-9 over C.
    """

    n: int
    field: str                 # "ring" or "complex"
    t: int | None
    omega: object
    W_hat: np.ndarray
    W_hat_star: np.ndarray
    J: tuple
    J_star: tuple

    def encode_vector(self, v) -> np.ndarray:
        """m = n^-1 * W @ I_R @ v."""
        v = np.asarray(v, dtype=self.W_hat.dtype if self.field == "ring" else complex)
        rev = v[::-1]
        if self.field == "ring":
            m = (self.W_hat @ rev) * mod_inverse(self.n, self.t)
            return m % self.t
        return (self.W_hat @ rev) / self.n

    def decode_vector(self, m) -> np.ndarray:
        """v = W* @ m."""
        m = np.asarray(m, dtype=self.W_hat.dtype if self.field == "ring" else complex)
        if self.field == "ring":
            return (self.W_hat_star @ m) % self.t
        return self.W_hat_star @ m


def build_matrices(n: int, field: str, t_or_none: int | None = None,
                   omega: object | None = None) -> EncodingMatrices:
    """Construct W and W* for slot encoding.

    Ring field requires a prime t with t = 1 (mod 2n).  Column c of W
    holds powers of omega^J(n/2-1-c) (first half) or omega^J*(n-1-c)
    (second half); row r of W* holds powers of omega^J(r) / omega^J*(r-n/2).
    """
    js, jstars = j_sequences(n)
    half = n // 2
    col_exp = [js[half - 1 - c] for c in range(half)] + \
              [jstars[n - 1 - c] for c in range(half, n)]
    row_exp = js + jstars
    if field == "ring":
        t = t_or_none
        if t is None or (t - 1) % (2 * n) != 0:
            raise BadModulus(f"need prime t = 1 mod {2*n}, got {t}")
        if omega is None:
            omega = find_primitive_2nth_root(t, n)
        W = np.empty((n, n), dtype=object)
        Wstar = np.empty((n, n), dtype=object)
        for c, e in enumerate(col_exp):
            root = pow(int(omega), e, t)
            val = 1
            for r in range(n):
                W[r, c] = val
                val = val * root % t
        for r, e in enumerate(row_exp):
            root = pow(int(omega), e, t)
            val = 1
            for c in range(n):
                Wstar[r, c] = val
                val = val * root % t
        return EncodingMatrices(n=n, field="ring", t=t, omega=int(omega),
                                W_hat=W, W_hat_star=Wstar,
                                J=tuple(js), J_star=tuple(jstars))
    if field == "complex":
        w = np.exp(1j * np.pi / n) if omega is None else omega
        powers = np.arange(n)
        W = np.empty((n, n), dtype=complex)
        Wstar = np.empty((n, n), dtype=complex)
        for c, e in enumerate(col_exp):
            W[:, c] = w ** (e * powers % (2 * n))
        for r, e in enumerate(row_exp):
            Wstar[r, :] = w ** (e * powers % (2 * n))
        return EncodingMatrices(n=n, field="complex", t=None, omega=w,
                                W_hat=W, W_hat_star=Wstar,
                                J=tuple(js), J_star=tuple(jstars))
    raise ValueError(f"unknown field {field!r}")


def reverse_identity(n: int) -> np.ndarray:
    """I^R: ones on the anti-diagonal."""
    return np.eye(n, dtype=np.int64)[::-1]
