"""Residue-number-system engine: CRT codec and fast base conversions.

All residues use the centered (signed) representation; the correctness
of the Montgomery-corrected and exact conversions depends on it.

Conversion noise summary (x held over base q = q_1..q_k, target b):

* ``fast_bconv``      -> x + u*q (mod b), integer |u| <= k/2 + 1
* ``small_mont``      -> x + u'*q (mod b), u' in {-1, 0, 1}
* ``fast_bconv_ex``   -> exactly |x|_q, provided the input is small
* ``mod_drop_rns``    -> exact, by residue truncation
* ``mod_switch_rns``  -> round(chi/b) with error below l/2 + 2
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modular import centered_reduce, mod_inverse
from .ring import RingParams, RingPoly
from . import glwe as glwe_mod


class BaseOverlap(ValueError):
    """Source and target bases share a modulus."""


class NotSubBase(ValueError):
    """Requested moduli are not a sub-base of the input base."""


class LengthMismatch(ValueError):
    """Residue count does not match the base."""


class KeyCountMismatch(ValueError):
    """One key ciphertext is needed per residue modulus."""


class InputTooLarge(ValueError):
    """fast_bconv_ex requires |x| well under the modulus (b_alpha bound)."""


class BadAuxModulus(ValueError):
    """Auxiliary modulus is too small or not coprime."""


class GammaTooSmall(ValueError):
    """Decryption correction modulus cannot absorb the error terms."""


@dataclass(frozen=True)
class RnsBase:
    """Pairwise-coprime moduli with CRT precomputations.

    y_i = q/q_i and z_i = y_i^{-1} mod q_i, so x = sum |x_i z_i|_{q_i} y_i.
    """

    moduli: tuple
    product: int
    y: tuple
    z: tuple

    @classmethod
    def of(cls, moduli) -> "RnsBase":
        moduli = tuple(int(m) for m in moduli)
        for i, a in enumerate(moduli):
            for b in moduli[i + 1:]:
                if math.gcd(a, b) != 1:
                    raise ValueError(f"moduli {a} and {b} are not coprime")
        q = math.prod(moduli)
        y = tuple(q // m for m in moduli)
        z = tuple(mod_inverse(yi % m, m) for yi, m in zip(y, moduli))
        return cls(moduli=moduli, product=q, y=y, z=z)

    @property
    def k(self) -> int:
        return len(self.moduli)

    def prefix(self, count: int) -> "RnsBase":
        return RnsBase.of(self.moduli[:count])

    def extend(self, extra: "RnsBase") -> "RnsBase":
        if set(self.moduli) & set(extra.moduli):
            raise BaseOverlap("bases share a modulus")
        return RnsBase.of(self.moduli + extra.moduli)


def crt_to_rns(x: int, base: RnsBase) -> tuple:
    """Centered residues of x against every base modulus."""
    return tuple(centered_reduce(x, m) for m in base.moduli)


def rns_to_int(residues, base: RnsBase) -> int:
    """Unique reconstruction mod q from residues (Chinese remainder)."""
    if len(residues) != base.k:
        raise LengthMismatch(f"expected {base.k} residues, got {len(residues)}")
    acc = 0
    for r, m, yi, zi in zip(residues, base.moduli, base.y, base.z):
        acc += centered_reduce(int(r) * zi, m) * yi
    return centered_reduce(acc, base.product)


def fast_bconv(residues, base: RnsBase, target: RnsBase) -> tuple:
    """Approximate base conversion that skips the big mod-q reduction.

    The result represents x + u*q mod the target product, |u| <= k/2 + 1.
    """
    if set(base.moduli) & set(target.moduli):
        raise BaseOverlap("bases share a modulus")
    if len(residues) != base.k:
        raise LengthMismatch(f"expected {base.k} residues, got {len(residues)}")
    terms = [centered_reduce(int(x) * z, m)
             for x, z, m in zip(residues, base.z, base.moduli)]
    out = []
    for bj in target.moduli:
        acc = 0
        for t, yi in zip(terms, base.y):
            acc += t * (yi % bj)
        out.append(centered_reduce(acc, bj))
    return tuple(out)


def small_mont(c_residues, b_base: RnsBase, b_alpha: int, q: int) -> tuple:
    """Montgomery correction after a fast conversion of |b_alpha * x|_q.

    Input residues live over b * b_alpha (the b_alpha residue last); the
    output over b represents x + u'*q with u' in {-1, 0, 1}.
    """
    if math.gcd(b_alpha, q) != 1 or math.gcd(b_alpha, b_base.product) != 1:
        raise BadAuxModulus(f"b_alpha {b_alpha} not coprime to q and b")
    if len(c_residues) != b_base.k + 1:
        raise LengthMismatch("need one residue per b modulus plus b_alpha")
    c_alpha = c_residues[-1]
    c_prime = centered_reduce(int(c_alpha) * mod_inverse(q, b_alpha), b_alpha)
    out = []
    for c_i, b_i in zip(c_residues[:-1], b_base.moduli):
        num = int(c_i) - (q % b_i) * c_prime
        r = centered_reduce(num * mod_inverse(b_alpha, b_i), b_i)
        out.append(r)
    return tuple(out)


def fast_bconv_with_mont(x: int, q_base: RnsBase, b_base: RnsBase,
                         b_alpha: int) -> tuple:
    """fast_bconv of x from q to b, corrected by small_mont.

    Internally converts |b_alpha * x|_q over b*b_alpha, then reduces.
    """
    q = q_base.product
    scaled = crt_to_rns(centered_reduce(b_alpha * x, q), q_base)
    ext = b_base.extend(RnsBase.of([b_alpha]))
    c = fast_bconv(scaled, q_base, ext)
    return small_mont(c, b_base, b_alpha, q)


def fast_bconv_ex(x_residues, b_base: RnsBase, b_alpha: int,
                  target: RnsBase, lam: int | None = None) -> tuple:
    """Exact conversion |x|_q for inputs x with |x| << b*b_alpha/2.

    x arrives over b * b_alpha (b_alpha residue last).  Writing
    |x|_b = x + mu*b with mu in [-lam, lam], correctness requires
    b_alpha >= 2*(l + lam).
    """
    l = b_base.k
    if lam is not None and b_alpha < 2 * (l + lam):
        raise InputTooLarge(f"b_alpha {b_alpha} < 2*(l + lambda) = {2*(l+lam)}")
    if len(x_residues) != l + 1:
        raise LengthMismatch("need one residue per b modulus plus b_alpha")
    x_hat = tuple(x_residues[:-1])                      # ModDrop to b
    x_alpha = int(x_residues[-1])                       # ModDrop to b_alpha
    alpha_base = RnsBase.of([b_alpha])
    conv_alpha = fast_bconv(x_hat, b_base, alpha_base)[0]
    gamma = centered_reduce(
        (conv_alpha - x_alpha) * mod_inverse(b_base.product, b_alpha), b_alpha)
    conv_q = fast_bconv(x_hat, b_base, target)
    out = []
    for c_j, qj in zip(conv_q, target.moduli):
        out.append(centered_reduce(int(c_j) - gamma * (b_base.product % qj), qj))
    return tuple(out)


def mod_raise_rns(residues, base: RnsBase, extension: RnsBase) -> tuple:
    """Extend x from base q to q u b: the q residues are kept verbatim,
    the new ones come from fast_bconv.  chi = x mod q always."""
    extra = fast_bconv(residues, base, extension)
    return tuple(residues) + extra


def mod_drop_rns(residues, base: RnsBase, keep: int) -> tuple:
    """Truncate to the first ``keep`` residues: exact reduction mod the
    sub-base, no noise."""
    if not 0 < keep <= base.k:
        raise NotSubBase(f"cannot keep {keep} of {base.k} residues")
    return tuple(residues[:keep])


def mod_switch_rns(residues, base: RnsBase, keep: int) -> tuple:
    """Divide-and-round from q*b down to q (the first ``keep`` moduli).

    Computes |b^{-1}|_q * (chi - chi_hat) where chi_hat bridges the b
    residues back over q; the result differs from round(chi/b) by less
    than l/2 + 2.
    """
    if not 0 < keep < base.k:
        raise NotSubBase(f"cannot switch {base.k} residues down to {keep}")
    q_base = base.prefix(keep)
    b_moduli = base.moduli[keep:]
    b_base = RnsBase.of(b_moduli)
    b = b_base.product
    chi_b = tuple(residues[keep:])
    chi_hat = fast_bconv(chi_b, b_base, q_base)
    out = []
    for chi_i, hat_i, qi in zip(residues[:keep], chi_hat, q_base.moduli):
        val = (int(chi_i) - int(hat_i)) * mod_inverse(b % qi, qi)
        out.append(centered_reduce(val, qi))
    return tuple(out)


@dataclass(frozen=True)
class RnsPoly:
    """One ring element per base modulus, all sharing degree n."""

    base: RnsBase
    residues: tuple  # RingPoly per modulus

    @classmethod
    def from_poly(cls, f: RingPoly, base: RnsBase) -> "RnsPoly":
        out = []
        for m in base.moduli:
            params = RingParams(f.params.n, m)
            out.append(RingPoly(params, [centered_reduce(int(c), f.params.modulus) % m
                                         for c in f.coeffs]))
        return cls(base, tuple(out))

    def to_poly(self, params: RingParams) -> RingPoly:
        n = params.n
        coeffs = []
        for j in range(n):
            vec = [centered_reduce(int(r.coeffs[j]), m)
                   for r, m in zip(self.residues, self.base.moduli)]
            coeffs.append(rns_to_int(vec, self.base))
        return RingPoly(params, coeffs)


def make_rns_mult_keys(sk, payload_fn, base: RnsBase, seed: bytes) -> tuple:
    """Key ciphertexts for decomp_mult_rns: one GLWE encryption of
    payload * (q/q_i) * |(q/q_i)^{-1}|_{q_i} per residue modulus.

    payload_fn maps the secret key to the ring element being keyed
    (e.g. a key component S_j, or S^2 for relinearization).
    """
    params = sk.params
    q = params.q
    if base.product != q:
        raise KeyCountMismatch("base product must equal the key modulus")
    payload = payload_fn(sk)
    keys = []
    for i, (yi, zi) in enumerate(zip(base.y, base.z)):
        factor = yi * zi % q
        scaled = RingPoly(params.ring, [int(c) * factor for c in payload.coeffs])
        keys.append(glwe_mod.encrypt(scaled, sk, params, seed + b"|rnskey%d" % i))
    return tuple(keys)


def decomp_mult_rns(a: RnsPoly, keys: tuple, params) -> "glwe_mod.GlweCiphertext":
    """RNS-digit multiplication: sum_i A_i * key_i, treating each residue
    as a gadget digit.  Decrypts to A * (keyed payload) plus noise scaled
    by the residue magnitudes."""
    if len(keys) != a.base.k:
        raise KeyCountMismatch(f"{len(keys)} keys for {a.base.k} residues")
    acc = None
    for a_i, key in zip(a.residues, keys):
        lifted = RingPoly(params.ring, a_i.centered())
        term = glwe_mod.mul_plain(key, lifted)
        acc = term if acc is None else glwe_mod.add_ct(acc, term)
    return acc


def bfv_decrypt_rns(phase_residues, base: RnsBase, t: int, gamma: int) -> int:
    """Divide-and-round BFV decryption on one RNS coefficient.

    phase_residues hold ct(s) = Delta*m + e + k*q over the q base;
    gamma is a prime coprime to t and q absorbing the error terms.
    Returns m mod t.
    """
    q = base.product
    if math.gcd(gamma, t) != 1 or math.gcd(gamma, q) != 1:
        raise GammaTooSmall(f"gamma {gamma} must be coprime to t and q")
    scaled = tuple(centered_reduce(int(x) * gamma * t, m)
                   for x, m in zip(phase_residues, base.moduli))
    target = RnsBase.of([gamma, t])
    y_gamma, y_t = fast_bconv(scaled, base, target)
    y_gamma = centered_reduce(y_gamma * mod_inverse((-q) % gamma, gamma), gamma)
    y_t = centered_reduce(y_t * mod_inverse((-q) % t, t), t)
    m = (y_t - y_gamma) * mod_inverse(gamma % t, t)
    return m % t
