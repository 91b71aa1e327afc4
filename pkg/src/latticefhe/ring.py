"""Negacyclic polynomial ring Z_q[X]/(X^n + 1).

Coefficient vectors are numpy object arrays of Python ints, stored
canonically in [0, q).  Multiplication dispatches to the NTT when the
modulus supports one, otherwise to schoolbook convolution.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .modular import ModContext, centered_reduce


class ParamMismatch(ValueError):
    """Operands live in different rings or forms."""


class BadExponent(ValueError):
    """Automorphism exponent must be odd (coprime to 2n)."""


@dataclass(frozen=True)
class RingParams:
    """Ring degree n (a power of two) and coefficient modulus."""

    n: int
    q: ModContext

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got {self.n}")
        if isinstance(self.q, int):
            object.__setattr__(self, "q", ModContext(self.q))

    @property
    def modulus(self) -> int:
        return self.q.q


def _as_object_array(coeffs, n: int) -> np.ndarray:
    arr = np.empty(n, dtype=object)
    for i, c in enumerate(coeffs):
        arr[i] = int(c)
    return arr


class RingPoly:
    """Immutable ring element; ``form`` is "coef" or "eval".

    Evaluation form stores the NTT slot values (in the ring's slot
    ordering) instead of coefficients.
    """

    __slots__ = ("params", "coeffs", "form")

    def __init__(self, params: RingParams, coeffs, form: str = "coef"):
        q = params.modulus
        arr = _as_object_array(coeffs, params.n) % q
        self.params = params
        self.coeffs = arr
        self.form = form

    @classmethod
    def zero(cls, params: RingParams) -> "RingPoly":
        return cls(params, [0] * params.n)

    @classmethod
    def constant(cls, params: RingParams, c: int) -> "RingPoly":
        coeffs = [0] * params.n
        coeffs[0] = c
        return cls(params, coeffs)

    @classmethod
    def monomial(cls, params: RingParams, degree: int, c: int = 1) -> "RingPoly":
        coeffs = [0] * params.n
        coeffs[degree] = c
        return cls(params, coeffs)

    def centered(self) -> list[int]:
        q = self.params.modulus
        return [centered_reduce(int(c), q) for c in self.coeffs]

    def max_abs(self) -> int:
        return max((abs(c) for c in self.centered()), default=0)

    def __eq__(self, other):
        return (isinstance(other, RingPoly)
                and self.params == other.params
                and self.form == other.form
                and all(a == b for a, b in zip(self.coeffs, other.coeffs)))

    def __repr__(self):
        return f"RingPoly(n={self.params.n}, q={self.params.modulus}, {list(self.coeffs)!r})"


@dataclass(frozen=True)
class NoiseSampler:
    """Rounded continuous Gaussian with hard rejection beyond ``bound``."""

    sigma: float
    bound: int = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.bound is None:
            object.__setattr__(self, "bound", int(math.ceil(6 * self.sigma)))


def _check_same(a: RingPoly, b: RingPoly):
    if a.params != b.params or a.form != b.form:
        raise ParamMismatch(f"{a.params}/{a.form} vs {b.params}/{b.form}")


def poly_add(a: RingPoly, b: RingPoly) -> RingPoly:
    _check_same(a, b)
    out = (a.coeffs + b.coeffs) % a.params.modulus
    return RingPoly(a.params, out, a.form)


def poly_sub(a: RingPoly, b: RingPoly) -> RingPoly:
    _check_same(a, b)
    out = (a.coeffs - b.coeffs) % a.params.modulus
    return RingPoly(a.params, out, a.form)


def poly_neg(a: RingPoly) -> RingPoly:
    return RingPoly(a.params, (-a.coeffs) % a.params.modulus, a.form)


def poly_scalar_mul(a: RingPoly, c: int) -> RingPoly:
    return RingPoly(a.params, (a.coeffs * int(c)) % a.params.modulus, a.form)


def reduce_negacyclic(coeffs, n: int, q: int) -> np.ndarray:
    """Fold an arbitrary-length coefficient vector by X^n = -1, mod q."""
    out = np.zeros(n, dtype=object)
    sign = 1
    for start in range(0, len(coeffs), n):
        chunk = coeffs[start:start + n]
        out[: len(chunk)] = out[: len(chunk)] + sign * np.asarray(chunk, dtype=object)
        sign = -sign
    return out % q


def _mul_schoolbook(a: RingPoly, b: RingPoly) -> RingPoly:
    n, q = a.params.n, a.params.modulus
    if n == 1:
        return RingPoly(a.params, [int(a.coeffs[0]) * int(b.coeffs[0]) % q])
    # int64 convolution is exact while |conv coeff| < 2^63.
    amax, bmax = a.max_abs(), b.max_abs()
    if amax and bmax and n * amax * bmax < 2**62:
        ac = np.array(a.centered(), dtype=np.int64)
        bc = np.array(b.centered(), dtype=np.int64)
        conv = np.convolve(ac, bc)
        folded = conv[:n].astype(object)
        folded[: n - 1] -= conv[n:].astype(object)
        return RingPoly(a.params, folded % q)
    conv = np.convolve(a.coeffs, b.coeffs)
    return RingPoly(a.params, reduce_negacyclic(conv, n, q))


def _mul_ntt(a: RingPoly, b: RingPoly, tables) -> RingPoly:
    from .transform import ntt_forward, ntt_inverse, pointwise
    fa = ntt_forward(a, tables)
    fb = ntt_forward(b, tables)
    return ntt_inverse(pointwise(fa, fb), tables)


def poly_negacyclic_mul(a: RingPoly, b: RingPoly) -> RingPoly:
    """Product reduced by X^n = -1 and mod q.

    Uses the NTT when q is an NTT prime for this ring degree, else
    schoolbook convolution.
    """
    if a.params != b.params:
        raise ParamMismatch(f"{a.params} vs {b.params}")
    tables = a.params.q.ntt_tables(a.params.n)
    if tables is not None and a.params.n >= 4:
        return _mul_ntt(a, b, tables)
    return _mul_schoolbook(a, b)


def rotate_coeffs(f: RingPoly, h: int) -> RingPoly:
    """f * X^(-h): coefficients rotate left by h, negating across X^n.

    h is taken mod 2n; negative h rotates right.
    """
    n, q = f.params.n, f.params.modulus
    h = h % (2 * n)
    out = np.empty(n, dtype=object)
    for i in range(n):
        e = (i + h) % (2 * n)
        if e < n:
            out[i] = f.coeffs[e]
        else:
            out[i] = (-f.coeffs[e - n]) % q
    return RingPoly(f.params, out)


def mul_xpow(f: RingPoly, e: int) -> RingPoly:
    """f * X^e (rotation right by e); e taken mod 2n."""
    return rotate_coeffs(f, -e)


def apply_automorphism(f: RingPoly, k: int) -> RingPoly:
    """The ring automorphism X -> X^k for odd k: result(X) = f(X^k)."""
    n, q = f.params.n, f.params.modulus
    if k % 2 == 0:
        raise BadExponent(f"automorphism exponent must be odd, got {k}")
    k = k % (2 * n)
    out = np.zeros(n, dtype=object)
    for j in range(n):
        e = (j * k) % (2 * n)
        if e < n:
            out[e] = f.coeffs[j]
        else:
            out[e - n] = (-f.coeffs[j]) % q
    return RingPoly(f.params, out)


def _rng_from_seed(seed: bytes) -> np.random.Generator:
    if not seed:
        raise ValueError("seed must be nonempty")
    digest = hashlib.sha256(seed).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "big")))


def sample_poly(kind: str, params: RingParams,
                sampler: NoiseSampler | None = None,
                seed: bytes = b"", rng: np.random.Generator | None = None) -> RingPoly:
    """Deterministic sampling of ring elements.

    kind is "uniform", "ternary", "binary", or "gaussian".  Exactly one
    of seed / rng must be given; a seed builds a fresh generator, an rng
    continues an existing stream.
    """
    if rng is None:
        rng = _rng_from_seed(seed)
    n, q = params.n, params.modulus
    if kind == "uniform":
        hi = min(q, 2**63 - 1)
        if q < 2**63:
            vals = rng.integers(0, q, size=n, dtype=np.int64)
        else:
            # Stitch 32-bit limbs for arbitrary-width moduli.
            limbs = (q.bit_length() + 31) // 32
            raw = rng.integers(0, 2**32, size=(n, limbs), dtype=np.uint64)
            vals = [int(sum(int(r) << (32 * i) for i, r in enumerate(row))) % q
                    for row in raw]
        return RingPoly(params, vals)
    if kind == "ternary":
        vals = rng.integers(-1, 2, size=n, dtype=np.int64)
        return RingPoly(params, vals)
    if kind == "binary":
        vals = rng.integers(0, 2, size=n, dtype=np.int64)
        return RingPoly(params, vals)
    if kind == "gaussian":
        if sampler is None:
            raise ValueError("gaussian sampling needs a NoiseSampler")
        if sampler.sigma == 0:
            return RingPoly.zero(params)
        out = np.zeros(n, dtype=np.int64)
        pending = np.arange(n)
        while pending.size:
            draw = np.rint(rng.normal(0.0, sampler.sigma, size=pending.size))
            ok = np.abs(draw) <= sampler.bound
            out[pending[ok]] = draw[ok].astype(np.int64)
            pending = pending[~ok]
        return RingPoly(params, out)
    raise ValueError(f"unknown sample kind {kind!r}")
