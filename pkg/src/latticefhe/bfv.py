"""BFV: exact integer arithmetic on batched slots.

Plaintext vectors mod a prime t (t = 1 mod 2n) encode through the slot
matrices into ring elements, scale by Delta = floor(q/t), and encrypt
under the minus convention B = -A*S + Delta*M + E.  Ciphertext products
mod-raise to Q = q*Delta, tensor, relinearize against RLev(S^2), and
rescale back to q; slot rotation conjugates by X -> X^(5^h) and
key-switches back.

Digit extraction (the arithmetic core of exact-scheme bootstrapping) is
implemented and verified at the plaintext level: lifting polynomials
built by interpolation peel base-p digits off noisy values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modular import ModContext, centered_reduce, mod_inverse, round_half_up_ratio
from .ring import (NoiseSampler, RingParams, RingPoly, poly_add,
                   poly_negacyclic_mul, poly_scalar_mul)
from .transform import EncodingMatrices, build_matrices
from .decomposition import GadgetSpec, decompose_poly
from . import glwe as G


class LengthMismatch(ValueError):
    pass


class MissingGaloisKey(KeyError):
    pass


class UnsafeParameters(ValueError):
    """(q-1)(n+1) must stay below Q for the tensor step."""


RELIN_BASE = 1 << 16


@dataclass
class BfvContext:
    """Key material and evaluation keys for one parameter set.

    The secret key is retained so galois keys can be generated lazily;
    power-of-two rotation steps are precomputed for matrix products.
    """

    params: G.GlweParams
    sk: G.GlweSecretKey
    pk: G.PublicKey
    matrices: EncodingMatrices
    relin: G.GlevCiphertext
    seed: bytes
    galois: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def delta(self) -> int:
        return self.params.delta

    @property
    def big_q(self) -> int:
        return self.q * self.delta

    def galois_key(self, exponent: int) -> tuple:
        exponent %= 2 * self.n
        if exponent not in self.galois:
            gadget = GadgetSpec.powers(RELIN_BASE, self.q)
            self.galois[exponent] = G.make_galois_key(
                self.sk, exponent, gadget, self.seed)
        return self.galois[exponent]


def new_context(n: int, q: int, t: int, sigma: float = 3.2,
                seed: bytes = b"bfv", omega: int | None = None) -> BfvContext:
    if (t - 1) % (2 * n):
        raise UnsafeParameters(f"t = {t} must be 1 mod {2 * n} for batching")
    delta = q // t
    big_q = q * delta
    if (q - 1) * (n + 1) >= big_q:
        raise UnsafeParameters(
            f"(q-1)(n+1) = {(q-1)*(n+1)} >= Q = {big_q}: t too large for n")
    params = G.GlweParams(k=1, ring=RingParams(n, ModContext(q)), t=t,
                          delta=delta, sign_convention="minus",
                          sampler=NoiseSampler(sigma))
    sk, pk = G.keygen(params, seed)
    matrices = build_matrices(n, "ring", t, omega=omega)
    # Relinearization keys live at the raised modulus Q (rescale-last).
    params_q = params.with_modulus(big_q)
    sk_q = G.GlweSecretKey(params_q, tuple(
        RingPoly(params_q.ring, s.centered()) for s in sk.polys))
    s2 = poly_negacyclic_mul(sk_q.polys[0], sk_q.polys[0])
    relin = G.glev_encrypt(s2, sk_q, GadgetSpec.powers(RELIN_BASE, big_q),
                           seed + b"|relin")
    return BfvContext(params=params, sk=sk, pk=pk, matrices=matrices,
                      relin=relin, seed=seed)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def batch_encode(v, ctx: BfvContext) -> tuple[RingPoly, RingPoly]:
    """m = n^-1 * W @ reverse(v) mod t, plus the Delta-scaled copy mod q."""
    if len(v) != ctx.n:
        raise LengthMismatch(f"need {ctx.n} slots, got {len(v)}")
    m = ctx.matrices.encode_vector([int(x) % ctx.t for x in v])
    t_ring = RingParams(ctx.n, ModContext(ctx.t))
    m_poly = RingPoly(t_ring, m)
    scaled = RingPoly(ctx.params.ring, [int(c) * ctx.delta for c in m])
    return m_poly, scaled


def batch_decode(m_poly: RingPoly, ctx: BfvContext) -> list[int]:
    """v = W* @ m over Z_t."""
    vals = ctx.matrices.decode_vector([int(c) % ctx.t for c in m_poly.coeffs])
    return [int(x) for x in vals]


def encode_single(m: int, n: int, t: int) -> RingPoly:
    """Binary expansion of one integer into coefficients (M(2) = m).

    A teaching utility only; batched encoding is the operational path.
    """
    params = RingParams(n, ModContext(t))
    coeffs = [0] * n
    mag, sign = abs(m), 1 if m >= 0 else -1
    for i in range(n):
        if not mag:
            break
        coeffs[i] = (sign * (mag & 1)) % t
        mag >>= 1
    return RingPoly(params, coeffs)


def decode_single(m_poly: RingPoly) -> int:
    t = m_poly.params.modulus
    return sum(centered_reduce(int(c), t) << i
               for i, c in enumerate(m_poly.coeffs))


# ---------------------------------------------------------------------------
# Encryption and arithmetic
# ---------------------------------------------------------------------------

def encrypt_poly(m_poly: RingPoly, ctx: BfvContext, seed: bytes) -> G.GlweCiphertext:
    scaled = RingPoly(ctx.params.ring,
                      [int(c) % ctx.t * ctx.delta for c in m_poly.coeffs])
    return G.encrypt(scaled, ctx.sk, ctx.params, seed)


def decrypt_poly(ct: G.GlweCiphertext, ctx: BfvContext) -> RingPoly:
    _, m = G.decrypt(ct, ctx.sk)
    return m


def encrypt_slots(v, ctx: BfvContext, seed: bytes) -> G.GlweCiphertext:
    _, scaled = batch_encode(v, ctx)
    return G.encrypt(scaled, ctx.sk, ctx.params, seed)


def decrypt_slots(ct: G.GlweCiphertext, ctx: BfvContext) -> list[int]:
    return batch_decode(decrypt_poly(ct, ctx), ctx)


add_ct = G.add_ct
sub_ct = G.sub_ct


def add_plain_slots(ct: G.GlweCiphertext, v, ctx: BfvContext) -> G.GlweCiphertext:
    _, scaled = batch_encode(v, ctx)
    return G.add_plain(ct, scaled)


def mul_plain_slots(ct: G.GlweCiphertext, v, ctx: BfvContext) -> G.GlweCiphertext:
    """Slot-wise product with a cleartext vector (unscaled encoding)."""
    m_poly, _ = batch_encode(v, ctx)
    lam = RingPoly(ctx.params.ring, [int(c) for c in m_poly.coeffs])
    return G.mul_plain(ct, lam)


def _lift_centered(p: RingPoly, ring: RingParams) -> RingPoly:
    return RingPoly(ring, p.centered())


def mul_ct(ct1: G.GlweCiphertext, ct2: G.GlweCiphertext,
           ctx: BfvContext) -> G.GlweCiphertext:
    """Mod-raise to Q, tensor, relinearize, rescale back to q."""
    big_q = ctx.big_q
    params_q = ctx.params.with_modulus(big_q)
    a1 = _lift_centered(ct1.masks[0], params_q.ring)
    b1 = _lift_centered(ct1.body, params_q.ring)
    a2 = _lift_centered(ct2.masks[0], params_q.ring)
    b2 = _lift_centered(ct2.body, params_q.ring)
    d0 = poly_negacyclic_mul(b1, b2)
    d1 = poly_add(poly_negacyclic_mul(b2, a1), poly_negacyclic_mul(b1, a2))
    d2 = poly_negacyclic_mul(a1, a2)
    ct_alpha = G.GlweCiphertext(params_q, (d1,), d0)
    digits = decompose_poly(d2, ctx.relin.gadget)
    ct_beta = G.glev_inner(digits, ctx.relin)
    raised = G.add_ct(ct_alpha, ct_beta)

    def rescale(p: RingPoly) -> RingPoly:
        vals = [round_half_up_ratio(centered_reduce(int(c), big_q), ctx.delta)
                for c in p.coeffs]
        return RingPoly(ctx.params.ring, vals)

    return G.GlweCiphertext(ctx.params, (rescale(raised.masks[0]),),
                            rescale(raised.body))


# ---------------------------------------------------------------------------
# Rotation and linear maps
# ---------------------------------------------------------------------------

def rotate_slots(ct: G.GlweCiphertext, h: int, ctx: BfvContext) -> G.GlweCiphertext:
    """Rotate both slot halves left by h: apply X -> X^J(h), key-switch."""
    h = h % (ctx.n // 2)
    if h == 0:
        return ct
    exponent = pow(5, h, 2 * ctx.n)
    return G.apply_galois(ct, exponent, ctx.galois_key(exponent))


def swap_halves(ct: G.GlweCiphertext, ctx: BfvContext) -> G.GlweCiphertext:
    """Exchange the two slot halves: the J*(0) = -1 automorphism."""
    exponent = 2 * ctx.n - 1
    return G.apply_galois(ct, exponent, ctx.galois_key(exponent))


def mat_vec_mul(matrix, ct: G.GlweCiphertext, ctx: BfvContext) -> G.GlweCiphertext:
    """Homomorphic A @ x for a cleartext m x n matrix A.

    The matrix splits into generalized diagonals over the group
    generated by half-rotations and the half-swap; each group element
    costs one Hadamard product:
    A @ x = sum_g u_g (*) rho_g(x), with u_g[s] = A[s][g(s)].
    """
    n, half, t = ctx.n, ctx.n // 2, ctx.t
    a = np.zeros((n, n), dtype=np.int64)
    mat = np.asarray(matrix)
    a[:mat.shape[0], :mat.shape[1]] = np.asarray(mat) % t
    acc = None
    for swap in (0, 1):
        base = swap_halves(ct, ctx) if swap else ct
        for h in range(half):
            # group element g: slot (r, c) reads (r ^ swap, c + h)
            diag = np.empty(n, dtype=np.int64)
            for s in range(n):
                r, c = divmod(s, half)
                src = ((r ^ swap) * half) + ((c + h) % half)
                diag[s] = a[s][src]
            if not diag.any():
                continue
            rotated = rotate_slots(base, h, ctx)
            term = mul_plain_slots(rotated, diag, ctx)
            acc = term if acc is None else G.add_ct(acc, term)
    if acc is None:
        acc = G.trivial(RingPoly.zero(ctx.params.ring), ctx.params)
    return acc


# ---------------------------------------------------------------------------
# Digit extraction polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DigitExtractSpec:
    p: int
    epsilon: int


@dataclass(frozen=True)
class DigitExtractor:
    """Lifting polynomials F_1..F_{eps-1} and their digit tables.

    f_j interpolates the j-th base-p digit of z0^p (exactly, with
    inverses mod p^eps since the interpolation denominators are coprime
    to p); F_e(z) = z^p - sum_j f_j(z) p^j fixes the low digit and zeros
    digit e.
    """

    spec: DigitExtractSpec
    f_polys: tuple   # f_j coefficient vectors mod p^eps, j = 1..eps-1

    def lift(self, z: int, eps_prime: int, modulus: int) -> int:
        """F_{eps_prime}(z) mod modulus."""
        p = self.spec.p
        acc = pow(z, p, modulus)
        for j in range(1, eps_prime + 1):
            acc -= _poly_eval(self.f_polys[j - 1], z, modulus) * p**j
        return acc % modulus

    def strip_low_digit(self, z: int, cur_eps: int) -> int:
        """G: zero the lowest base-p digit of z mod p^cur_eps, then
        divide by p exactly."""
        p = self.spec.p
        modulus = p**cur_eps
        w = z % modulus
        for eps_prime in range(1, cur_eps):
            w = self.lift(w, eps_prime, modulus)
        return ((z - w) % modulus) // p


def _poly_eval(coeffs, x: int, modulus: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % modulus
    return acc


def _lagrange_interpolate(points, modulus: int) -> list[int]:
    """Coefficients of the deg <= len(points)-1 polynomial through
    ``points`` over Z_modulus (denominators must be invertible)."""
    k = len(points)
    coeffs = [0] * k
    for i, (xi, yi) in enumerate(points):
        # basis polynomial prod_{j != i} (x - xj) / (xi - xj)
        basis = [1]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            new = [0] * (len(basis) + 1)
            for d, c in enumerate(basis):
                new[d] -= c * xj
                new[d + 1] += c
            basis = new
            denom = denom * (xi - xj)
        scale = yi * mod_inverse(denom % modulus, modulus)
        for d, c in enumerate(basis):
            coeffs[d] = (coeffs[d] + scale * c) % modulus
    return coeffs


def build_digit_extraction(spec: DigitExtractSpec) -> DigitExtractor:
    """Interpolate the digit polynomials f_j over p points each."""
    p, eps = spec.p, spec.epsilon
    if eps < 2:
        raise ValueError("epsilon must be at least 2")
    modulus = p**eps
    f_polys = []
    for j in range(1, eps):
        pts = []
        for z0 in range(p):
            digit = (pow(z0, p, p**(j + 1)) // p**j) % p
            pts.append((z0, digit))
        f_polys.append(tuple(_lagrange_interpolate(pts, modulus)))
    return DigitExtractor(spec, tuple(f_polys))


def digit_extract_eval(z: int, extractor: DigitExtractor) -> int:
    """Recover m mod p from z = p^(eps-1) m + e, |e| < p^(eps-1)/2.

    Adds half the noise band so signed noise becomes a valid unsigned
    low-digit block, then strips eps-1 digits.
    """
    p, eps = extractor.spec.p, extractor.spec.epsilon
    w = (z + p**(eps - 1) // 2) % p**eps
    for cur in range(eps, 1, -1):
        w = extractor.strip_low_digit(w, cur)
    return w % p
