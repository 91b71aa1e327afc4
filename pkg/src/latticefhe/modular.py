"""Arbitrary-precision modular arithmetic, primes, and roots of unity.

All residues are stored canonically in [0, q); the centered (signed)
view is applied at comparison and rounding boundaries.  The rounding
convention everywhere is round-half-up: ``round(x) = floor(x + 1/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass


class NotInvertible(ValueError):
    """gcd(a, q) != 1, so a has no inverse mod q."""


class BadModulus(ValueError):
    """Modulus does not meet the congruence required by the operation."""


class NotFound(RuntimeError):
    """Bounded search exhausted without a hit."""


def centered_reduce(x: int, q: int) -> int:
    """Reduce x mod q into the centered range.

    Even q maps to [-q/2, q/2 - 1]; odd q maps to [-(q-1)/2, (q-1)/2].
    """
    if q < 2:
        raise BadModulus(f"modulus must be >= 2, got {q}")
    r = x % q
    if r >= (q + 1) // 2:
        r -= q
    return r


def canonical_reduce(x: int, q: int) -> int:
    """Reduce x mod q into [0, q)."""
    return x % q


def round_half_up_ratio(num: int, den: int) -> int:
    """round(num/den) with ties toward +inf, exact integer arithmetic.

    den must be positive.
    """
    return (2 * num + den) // (2 * den)


def mod_inverse(a: int, q: int) -> int:
    """Inverse of a mod q; raises NotInvertible when gcd(a, q) != 1."""
    try:
        return pow(a, -1, q)
    except ValueError as exc:
        raise NotInvertible(f"{a} has no inverse mod {q}") from exc


# Deterministic Miller-Rabin witness set, valid for all n < 2^64.
_MR_SMALL_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# Fixed witness list for n >= 2^64 (probabilistic but deterministic runs).
_MR_BIG_WITNESSES = _MR_SMALL_WITNESSES + tuple(
    p for p in (41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
                101, 103, 107, 109, 113)
)


def is_prime(n: int) -> bool:
    """Miller-Rabin primality test.

    Deterministic below 2^64; above that, a fixed 30-witness test.
    """
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    witnesses = _MR_SMALL_WITNESSES if n < 2**64 else _MR_BIG_WITNESSES
    for a in witnesses:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def multiplicative_order(a: int, q: int, bound: int | None = None) -> int:
    """Order of a in (Z/qZ)*, by trial exponentiation up to bound (or q)."""
    limit = bound if bound is not None else q
    x = a % q
    acc = x
    for k in range(1, limit + 1):
        if acc == 1:
            return k
        acc = acc * x % q
    raise NotFound(f"order of {a} mod {q} not found within {limit}")


def find_primitive_2nth_root(t: int, n: int) -> int:
    """A primitive 2n-th root of unity omega mod prime t.

    omega satisfies omega^n = -1 (mod t) and has multiplicative order
    exactly 2n.  Requires t prime with t = 1 (mod 2n); n a power of two.
    """
    if n < 1 or n & (n - 1):
        raise BadModulus(f"n must be a power of two, got {n}")
    if (t - 1) % (2 * n) != 0:
        raise BadModulus(f"{t} is not 1 mod {2 * n}")
    exponent = (t - 1) // (2 * n)
    for g in range(2, t):
        omega = pow(g, exponent, t)
        # 2n is a power of two, so order == 2n iff omega^n == -1.
        if pow(omega, n, t) == t - 1:
            return omega
    raise NotFound(f"no primitive {2 * n}-th root mod {t}")


@dataclass(frozen=True)
class PrimeSpec:
    """Search target: a prime of exactly bit_length bits with
    prime = congruence[0] (mod congruence[1])."""

    bit_length: int
    congruence: tuple[int, int] = (1, 2)


def gen_ntt_prime(spec: PrimeSpec) -> int:
    """Smallest prime of spec.bit_length bits meeting spec.congruence.

    Raises NotFound when the bit range holds no such prime.
    """
    r, m = spec.congruence
    lo = 1 << (spec.bit_length - 1)
    hi = 1 << spec.bit_length
    if m > hi:
        raise BadModulus(f"congruence modulus {m} exceeds 2^{spec.bit_length}")
    start = lo + ((r - lo) % m)
    for cand in range(start, hi, m):
        if is_prime(cand):
            return cand
    raise NotFound(f"no {spec.bit_length}-bit prime = {r} mod {m}")


def primes_near(target: int, congruence: tuple[int, int], count: int,
                max_offset: int | None = None) -> list[int]:
    """count primes = r (mod m) closest to target, nearest first."""
    r, m = congruence
    base = target + ((r - target) % m)
    found: list[int] = []
    limit = max_offset if max_offset is not None else target
    k = 0
    while len(found) < count and k * m <= limit:
        for cand in ((base + k * m, base - k * m) if k else (base,)):
            if cand > 2 and is_prime(cand) and cand not in found:
                found.append(cand)
                if len(found) == count:
                    break
        k += 1
    if len(found) < count:
        raise NotFound(f"only {len(found)} primes = {r} mod {m} near {target}")
    return found


class ModContext:
    """A modulus plus cached NTT tables.

    The modulus is a plain integer; when it is prime and 1 mod 2n the
    context can hand out NTT tables for ring degree n.  Immutable in
    spirit: the only mutation is the internal table cache.
    """

    __slots__ = ("q", "_tables")

    def __init__(self, q: int):
        if q < 2:
            raise BadModulus(f"modulus must be >= 2, got {q}")
        self.q = int(q)
        self._tables: dict[int, object] = {}

    def centered(self, x: int) -> int:
        return centered_reduce(x, self.q)

    def canonical(self, x: int) -> int:
        return x % self.q

    def ntt_tables(self, n: int):
        """NttTables for degree n, or None when q cannot support them."""
        if n not in self._tables:
            tables = None
            if n >= 2 and (self.q - 1) % (2 * n) == 0 and is_prime(self.q):
                from .transform import NttTables
                tables = NttTables.build(n, self.q)
            self._tables[n] = tables
        return self._tables[n]

    def __eq__(self, other):
        return isinstance(other, ModContext) and other.q == self.q

    def __hash__(self):
        return hash(("ModContext", self.q))

    def __repr__(self):
        return f"ModContext(q={self.q})"
