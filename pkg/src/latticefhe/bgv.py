"""BGV: exact mod-t arithmetic with noise scaled up instead of the message.

Encryption keeps the plaintext in the low digits and lifts fresh noise
by Delta = t: B = -A*S + M + t*E.  Decryption reduces the centered
phase mod t, so every homomorphic noise term must stay a multiple of t;
all key material here is encrypted with t-scaled noise for that reason.

The modulus chain mirrors CKKS (q_l = w_0..w_l) with two extra
congruences: every prime is 1 mod 2n (NTT) and 1 mod t, the latter
making the corrected modulus switch possible.  The switch rounds
components by q_hat/q_l and repairs the mod-t residue with the
H = q_l^{-1} * (q_hat*c - q_l*c') correction terms; omitting them
corrupts decryption almost surely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modular import (ModContext, centered_reduce, mod_inverse,
                      round_half_up_ratio, is_prime)
from .ring import (NoiseSampler, RingParams, RingPoly, poly_add,
                   poly_negacyclic_mul)
from .transform import EncodingMatrices, build_matrices
from .decomposition import GadgetSpec, decompose_poly
from . import glwe as G
from .ckks import ModulusChain, LevelExhausted


class BadTargetModulus(ValueError):
    """Switch target must be 1 mod t, coprime, and below the source."""


KS_BASE = 1 << 8


def make_chain(n: int, t: int, levels: int, w_bits: int) -> ModulusChain:
    """levels+1 primes of ~w_bits bits with w = 1 mod lcm(2n, t)."""
    from .modular import gen_ntt_prime, PrimeSpec
    m = 2 * n * t // math.gcd(2 * n, t)
    primes = []
    bits = w_bits
    while len(primes) < levels + 1:
        spec = PrimeSpec(bits, (1, m))
        try:
            p = gen_ntt_prime(spec)
        except Exception:
            bits += 1
            continue
        while p in primes:
            # next prime in the same residue class
            cand = p + m
            while not is_prime(cand):
                cand += m
            p = cand
        primes.append(p)
    return ModulusChain(tuple(primes))


@dataclass
class BgvContext:
    params_top: G.GlweParams
    chain: ModulusChain
    matrices: EncodingMatrices
    sk: G.GlweSecretKey
    relin: G.GlevCiphertext
    seed: bytes
    galois: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params_top.n

    @property
    def t(self) -> int:
        return self.params_top.t

    @property
    def top_level(self) -> int:
        return self.chain.levels

    def params_at(self, level: int) -> G.GlweParams:
        return self.params_top.with_modulus(self.chain.q_at(level))

    def sk_at(self, level: int) -> G.GlweSecretKey:
        params = self.params_at(level)
        return G.GlweSecretKey(params, tuple(
            RingPoly(params.ring, s.centered()) for s in self.sk.polys))

    def galois_key(self, exponent: int) -> tuple:
        exponent %= 2 * self.n
        if exponent not in self.galois:
            gadget = GadgetSpec.powers(KS_BASE, self.params_top.q)
            self.galois[exponent] = G.make_galois_key(
                self.sk, exponent, gadget, self.seed, noise_scale=self.t)
        return self.galois[exponent]


@dataclass(frozen=True)
class BgvCiphertext:
    ct: G.GlweCiphertext
    level: int


def new_context(n: int, t: int, levels: int, w_bits: int = 26,
                sigma: float = 3.2, seed: bytes = b"bgv") -> BgvContext:
    if not is_prime(t) or (t - 1) % (2 * n):
        raise BadTargetModulus(f"t = {t} must be a prime = 1 mod {2 * n}")
    chain = make_chain(n, t, levels, w_bits)
    q_top = chain.q_at(levels)
    params = G.GlweParams(k=1, ring=RingParams(n, ModContext(q_top)),
                          t=t, delta=t, sign_convention="minus",
                          sampler=NoiseSampler(sigma))
    sk, _ = G.keygen(params, seed)
    matrices = build_matrices(n, "ring", t)
    s2 = poly_negacyclic_mul(sk.polys[0], sk.polys[0])
    relin = G.glev_encrypt(s2, sk, GadgetSpec.powers(KS_BASE, q_top),
                           seed + b"|relin", noise_scale=t)
    return BgvContext(params_top=params, chain=chain, matrices=matrices,
                      sk=sk, relin=relin, seed=seed)


# ---------------------------------------------------------------------------
# Encoding / encryption
# ---------------------------------------------------------------------------

def batch_encode(v, ctx: BgvContext) -> RingPoly:
    m = ctx.matrices.encode_vector([int(x) % ctx.t for x in v])
    return RingPoly(RingParams(ctx.n, ModContext(ctx.t)), m)


def batch_decode(m_poly: RingPoly, ctx: BgvContext) -> list[int]:
    vals = ctx.matrices.decode_vector([int(c) % ctx.t for c in m_poly.coeffs])
    return [int(x) for x in vals]


def bgv_encrypt(v, ctx: BgvContext, seed: bytes,
                level: int | None = None) -> BgvCiphertext:
    """B = -A*S + M + t*E at the requested level (top by default)."""
    level = ctx.top_level if level is None else level
    params = ctx.params_at(level)
    m = batch_encode(v, ctx)
    payload = RingPoly(params.ring, [int(c) for c in m.coeffs])
    ct = G.encrypt(payload, ctx.sk_at(level), params, seed, noise_scale=ctx.t)
    return BgvCiphertext(ct, level)


def bgv_decrypt(ct: BgvCiphertext, ctx: BgvContext) -> list[int]:
    """Centered phase mod q_l, then mod t, then decode."""
    phase = G.decrypt_phase(ct.ct, ctx.sk_at(ct.level))
    q = phase.params.modulus
    t_ring = RingParams(ctx.n, ModContext(ctx.t))
    m = RingPoly(t_ring, [centered_reduce(int(c), q) % ctx.t
                          for c in phase.coeffs])
    return batch_decode(m, ctx)


def add(a: BgvCiphertext, b: BgvCiphertext) -> BgvCiphertext:
    if a.level != b.level:
        raise LevelExhausted("add needs matching levels")
    return BgvCiphertext(G.add_ct(a.ct, b.ct), a.level)


# ---------------------------------------------------------------------------
# Modulus management
# ---------------------------------------------------------------------------

def bgv_mod_switch(ct: BgvCiphertext, ctx: BgvContext,
                   q_hat: int | None = None,
                   skip_correction: bool = False) -> BgvCiphertext:
    """Switch q_l -> q_hat with the mod-t repair terms.

    q_hat defaults to the next chain level down but may be any modulus
    with q_hat = 1 mod t, q_hat < q_l.  ``skip_correction`` exists only
    to demonstrate (in tests) that the repair is load-bearing.
    """
    q = ctx.chain.q_at(ct.level)
    new_level = ct.level - 1
    if q_hat is None:
        if ct.level < 1:
            raise LevelExhausted("no level left to switch to")
        q_hat = ctx.chain.q_at(new_level)
        params_new = ctx.params_at(new_level)
    else:
        if q_hat >= q or q_hat % ctx.t != 1 or math.gcd(q_hat, ctx.t) != 1:
            raise BadTargetModulus(f"q_hat = {q_hat} invalid below q = {q}")
        params_new = ctx.params_top.with_modulus(q_hat)
        new_level = ct.level  # off-chain target keeps the level tag
    t = ctx.t
    q_inv_t = mod_inverse(q % t, t)

    def switch(p: RingPoly) -> RingPoly:
        out = []
        for c in p.coeffs:
            ci = centered_reduce(int(c), q)
            rounded = round_half_up_ratio(ci * q_hat, q)
            if skip_correction:
                out.append(rounded)
                continue
            eps = q_hat * ci - q * rounded
            h = centered_reduce(eps * q_inv_t, t)
            out.append(rounded + h)
        return RingPoly(params_new.ring, out)

    switched = G.GlweCiphertext(params_new,
                                tuple(switch(a) for a in ct.ct.masks),
                                switch(ct.ct.body))
    return BgvCiphertext(switched, new_level)


def bgv_mod_drop(ct: BgvCiphertext, ctx: BgvContext) -> BgvCiphertext:
    """Plain reduction mod q_(l-1): exact, noise scale untouched."""
    if ct.level < 1:
        raise LevelExhausted("no level left to drop to")
    lowered = G.reduce_ct_mod(ct.ct, ctx.chain.q_at(ct.level - 1))
    return BgvCiphertext(lowered, ct.level - 1)


# ---------------------------------------------------------------------------
# Multiplication and rotation
# ---------------------------------------------------------------------------

def bgv_mul_ct(a: BgvCiphertext, b: BgvCiphertext, ctx: BgvContext,
               rescale: bool = True) -> BgvCiphertext:
    """Tensor + relinearize; optional modulus switch suppresses the
    Delta^2-scaled noise back to Delta."""
    if a.level != b.level:
        raise LevelExhausted("mul needs matching levels")
    params = ctx.params_at(a.level)
    a1, b1 = a.ct.masks[0], a.ct.body
    a2, b2 = b.ct.masks[0], b.ct.body
    d0 = poly_negacyclic_mul(b1, b2)
    d1 = poly_add(poly_negacyclic_mul(b2, a1), poly_negacyclic_mul(b1, a2))
    d2 = poly_negacyclic_mul(a1, a2)
    ct_alpha = G.GlweCiphertext(params, (d1,), d0)
    q = params.q
    local = GadgetSpec.powers(KS_BASE, q)
    digits = decompose_poly(d2, local)
    reduced = G._reduce_glev_mod(ctx.relin, q)
    inner = None
    for d, lev_ct in zip(digits, reduced.levels):
        term = G.mul_plain(lev_ct, d)
        inner = term if inner is None else G.add_ct(inner, term)
    out = BgvCiphertext(G.add_ct(ct_alpha, inner), a.level)
    if rescale:
        if a.level < 1:
            raise LevelExhausted("no level left for the rescale switch")
        out = bgv_mod_switch(out, ctx)
    return out


def rotate_slots(ct: BgvCiphertext, h: int, ctx: BgvContext) -> BgvCiphertext:
    """Rotate both slot halves left by h, exactly as in BFV."""
    h = h % (ctx.n // 2)
    if h == 0:
        return ct
    exponent = pow(5, h, 2 * ctx.n)
    out = G.apply_galois(ct.ct, exponent, ctx.galois_key(exponent))
    return BgvCiphertext(out, ct.level)


def measure_noise(ct: BgvCiphertext, ctx: BgvContext, v_expect) -> int:
    """Max |phase - M| infinity-norm: the t-scaled noise magnitude."""
    phase = G.decrypt_phase(ct.ct, ctx.sk_at(ct.level))
    m = batch_encode(v_expect, ctx)
    q = phase.params.modulus
    worst = 0
    for c, mc in zip(phase.coeffs, m.coeffs):
        diff = centered_reduce(int(c) - int(mc), q)
        worst = max(worst, abs(diff))
    return worst
