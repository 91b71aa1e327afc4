"""The GLWE cryptosystem family: LWE is n = 1, RLWE is k = 1.

A ciphertext is (A_0..A_{k-1}, B) with B = sign * sum(A_i S_i) + payload + E,
where ``sign`` is +1 ("plus", the TFHE/generic convention) or -1
("minus", the BFV/CKKS/BGV convention).  The payload is whatever the
caller scaled in: Delta*M for plaintext-scaled schemes, M + Delta*E for
BGV.  Decryption recovers the raw phase B - sign * sum(A_i S_i); the
noise is never stored and must be measured from a known plaintext.

Fresh masks are pseudorandomly expanded from a 32-byte seed, so
ciphertexts can serialize seed-compressed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .modular import ModContext, centered_reduce, round_half_up_ratio
from .ring import (NoiseSampler, ParamMismatch, RingParams, RingPoly,
                   poly_add, poly_sub, poly_neg, poly_negacyclic_mul,
                   poly_scalar_mul, sample_poly, _rng_from_seed)
from .decomposition import GadgetSpec, decompose_poly


class KeyMismatch(ValueError):
    """Key material does not match the ciphertext."""


class TargetTooSmall(ValueError):
    """Modulus switch target leaves no room for the plaintext."""


@dataclass(frozen=True)
class GlweParams:
    """k mask polynomials over ring (n, q), plaintext modulus t.

    delta is the payload scaling factor: floor(q/t) for plaintext-scaled
    schemes, t for BGV, caller-chosen for CKKS.  sign_convention is
    "plus" or "minus".  key_dist is "ternary" or "binary".
    """

    k: int
    ring: RingParams
    t: int
    delta: int
    sign_convention: str = "plus"
    sampler: NoiseSampler = NoiseSampler(3.2)
    key_dist: str = "ternary"

    @property
    def sign(self) -> int:
        return 1 if self.sign_convention == "plus" else -1

    @property
    def q(self) -> int:
        return self.ring.modulus

    @property
    def n(self) -> int:
        return self.ring.n

    def with_modulus(self, q: int) -> "GlweParams":
        return replace(self, ring=RingParams(self.ring.n, ModContext(q)))


@dataclass(frozen=True)
class GlweSecretKey:
    params: GlweParams
    polys: tuple  # k RingPolys, ternary or binary coefficients


@dataclass(frozen=True)
class PublicKey:
    """pk1 = sign * <A, S> + E together with pk2 = A."""

    params: GlweParams
    pk1: RingPoly
    pk2: tuple


@dataclass(frozen=True)
class GlweCiphertext:
    params: GlweParams
    masks: tuple   # k RingPolys
    body: RingPoly
    seed: bytes | None = None  # set when masks were seed-expanded

    def __add__(self, other: "GlweCiphertext") -> "GlweCiphertext":
        return add_ct(self, other)

    def __sub__(self, other: "GlweCiphertext") -> "GlweCiphertext":
        return sub_ct(self, other)


@dataclass(frozen=True)
class GlevCiphertext:
    params: GlweParams
    gadget: GadgetSpec
    levels: tuple  # ell GlweCiphertexts, level i at scale gadget[i]


@dataclass(frozen=True)
class GgswCiphertext:
    params: GlweParams
    gadget: GadgetSpec
    rows: tuple    # k+1 GlevCiphertexts; rows i<k hold -S_i*M, row k holds M


def _expand_masks(params: GlweParams, seed: bytes) -> tuple:
    rng = _rng_from_seed(b"mask|" + seed)
    return tuple(sample_poly("uniform", params.ring, rng=rng)
                 for _ in range(params.k))


def keygen(params: GlweParams, seed: bytes) -> tuple[GlweSecretKey, PublicKey]:
    """Secret key plus matching public key; deterministic under seed."""
    rng = _rng_from_seed(b"key|" + seed)
    polys = tuple(sample_poly(params.key_dist, params.ring, rng=rng)
                  for _ in range(params.k))
    sk = GlweSecretKey(params, polys)
    pk_seed = hashlib.sha256(b"pk|" + seed).digest()
    masks = _expand_masks(params, pk_seed)
    rng_e = _rng_from_seed(b"pkE|" + seed)
    e = sample_poly("gaussian", params.ring, params.sampler, rng=rng_e)
    acc = RingPoly.zero(params.ring)
    for a_i, s_i in zip(masks, polys):
        acc = poly_add(acc, poly_negacyclic_mul(a_i, s_i))
    if params.sign < 0:
        acc = poly_neg(acc)
    pk1 = poly_add(acc, e)
    return sk, PublicKey(params, pk1, masks)


def mask_dot_key(masks, sk: GlweSecretKey) -> RingPoly:
    ring = masks[0].params if masks else sk.params.ring
    acc = RingPoly.zero(ring)
    for a_i, s_i in zip(masks, sk.polys):
        if s_i.params != ring:
            # Key coefficients are ternary/binary: the centered lift is
            # exact at any modulus (used after a modulus switch).
            s_i = RingPoly(ring, s_i.centered())
        acc = poly_add(acc, poly_negacyclic_mul(a_i, s_i))
    return acc


def encrypt(payload: RingPoly, sk: GlweSecretKey, params: GlweParams,
            seed: bytes, noise_scale: int = 1) -> GlweCiphertext:
    """Encrypt an already-scaled payload polynomial (mod q).

    noise_scale multiplies the fresh noise; BGV-style material passes
    its plaintext modulus here so every noise term stays 0 mod t.
    """
    masks = _expand_masks(params, seed)
    e = sample_poly("gaussian", params.ring, params.sampler,
                    seed=b"noise|" + seed)
    if noise_scale != 1:
        e = poly_scalar_mul(e, noise_scale)
    body = mask_dot_key(masks, sk)
    if params.sign < 0:
        body = poly_neg(body)
    body = poly_add(poly_add(body, payload), e)
    return GlweCiphertext(params, masks, body, seed=seed)


def trivial(payload: RingPoly, params: GlweParams) -> GlweCiphertext:
    """Noiseless ciphertext with all-zero masks (valid under any key)."""
    zeros = tuple(RingPoly.zero(params.ring) for _ in range(params.k))
    return GlweCiphertext(params, zeros, payload)


def decrypt_phase(ct: GlweCiphertext, sk: GlweSecretKey) -> RingPoly:
    """Raw phase B - sign * sum(A_i S_i); the payload plus noise, mod q."""
    acc = mask_dot_key(ct.masks, sk)
    if ct.params.sign < 0:
        acc = poly_neg(acc)
    return poly_sub(ct.body, acc)


def decrypt(ct: GlweCiphertext, sk: GlweSecretKey) -> tuple[RingPoly, RingPoly]:
    """(raw phase, rounded plaintext mod t).

    The plaintext is round(phase / delta) mod t coefficient-wise, using
    the centered view of the phase.  Exceeding the noise budget is
    undetectable here; tests catch it via known plaintexts.
    """
    phase = decrypt_phase(ct, sk)
    q, t, delta = ct.params.q, ct.params.t, ct.params.delta
    msg = [round_half_up_ratio(centered_reduce(int(c), q), delta) % t
           for c in phase.coeffs]
    t_params = RingParams(ct.params.n, ModContext(t))
    return phase, RingPoly(t_params, msg)


def add_ct(a: GlweCiphertext, b: GlweCiphertext) -> GlweCiphertext:
    if a.params != b.params:
        raise ParamMismatch("ciphertext parameter mismatch")
    masks = tuple(poly_add(x, y) for x, y in zip(a.masks, b.masks))
    return GlweCiphertext(a.params, masks, poly_add(a.body, b.body))


def sub_ct(a: GlweCiphertext, b: GlweCiphertext) -> GlweCiphertext:
    if a.params != b.params:
        raise ParamMismatch("ciphertext parameter mismatch")
    masks = tuple(poly_sub(x, y) for x, y in zip(a.masks, b.masks))
    return GlweCiphertext(a.params, masks, poly_sub(a.body, b.body))


def neg_ct(a: GlweCiphertext) -> GlweCiphertext:
    return GlweCiphertext(a.params, tuple(poly_neg(x) for x in a.masks),
                          poly_neg(a.body))


def add_plain(ct: GlweCiphertext, lam: RingPoly) -> GlweCiphertext:
    """Add an encoded plaintext (at matching scale) to the body only."""
    return GlweCiphertext(ct.params, ct.masks, poly_add(ct.body, lam))


def mul_plain(ct: GlweCiphertext, lam: RingPoly) -> GlweCiphertext:
    """Multiply every component by a plaintext ring element."""
    masks = tuple(poly_negacyclic_mul(a, lam) for a in ct.masks)
    return GlweCiphertext(ct.params, masks, poly_negacyclic_mul(ct.body, lam))


def mul_const(ct: GlweCiphertext, c: int) -> GlweCiphertext:
    masks = tuple(poly_scalar_mul(a, c) for a in ct.masks)
    return GlweCiphertext(ct.params, masks, poly_scalar_mul(ct.body, c))


def mul_xpow(ct: GlweCiphertext, e: int) -> GlweCiphertext:
    """Multiply every component by X^e (noise-free rotation)."""
    from .ring import mul_xpow as poly_mul_xpow
    masks = tuple(poly_mul_xpow(a, e) for a in ct.masks)
    return GlweCiphertext(ct.params, masks, poly_mul_xpow(ct.body, e))


def apply_automorphism_ct(ct: GlweCiphertext, k: int) -> GlweCiphertext:
    """Component-wise X -> X^k; the result decrypts under S(X^k)."""
    from .ring import apply_automorphism
    masks = tuple(apply_automorphism(a, k) for a in ct.masks)
    return GlweCiphertext(ct.params, masks, apply_automorphism(ct.body, k))


def glev_encrypt(m: RingPoly, sk: GlweSecretKey, gadget: GadgetSpec,
                 seed: bytes, noise_scale: int = 1) -> GlevCiphertext:
    """Ladder of GLWE encryptions of g_i * M, one per gadget level."""
    params = sk.params
    levels = []
    for i, g in enumerate(gadget.gadget):
        payload = poly_scalar_mul(m, g)
        levels.append(encrypt(payload, sk, params,
                              seed + b"|lev%d" % i, noise_scale=noise_scale))
    return GlevCiphertext(params, gadget, tuple(levels))


def ggsw_encrypt(m: RingPoly, sk: GlweSecretKey, gadget: GadgetSpec,
                 seed: bytes) -> GgswCiphertext:
    """Rows i < k encrypt -S_i * M; the last row encrypts M."""
    params = sk.params
    rows = []
    for i, s_i in enumerate(sk.polys):
        neg_sm = poly_neg(poly_negacyclic_mul(s_i, m))
        rows.append(glev_encrypt(neg_sm, sk, gadget, seed + b"|row%d" % i))
    rows.append(glev_encrypt(m, sk, gadget, seed + b"|rowB"))
    return GgswCiphertext(params, gadget, tuple(rows))


def glev_inner(digits, glev: GlevCiphertext) -> GlweCiphertext:
    """<digits, GLev>: sum of digit-scaled level ciphertexts."""
    if len(digits) != glev.gadget.ell:
        raise KeyMismatch("digit count does not match gadget level")
    acc = None
    for d, level in zip(digits, glev.levels):
        term = mul_plain(level, d) if isinstance(d, RingPoly) else mul_const(level, d)
        acc = term if acc is None else add_ct(acc, term)
    return acc


def make_keyswitch_key(sk_from: GlweSecretKey, sk_to: GlweSecretKey,
                       gadget: GadgetSpec, seed: bytes,
                       noise_scale: int = 1) -> tuple:
    """Per-component GLev encryptions of S_i (scale 1) under the new key."""
    return tuple(glev_encrypt(s_i, sk_to, gadget, seed + b"|ksk%d" % i,
                              noise_scale=noise_scale)
                 for i, s_i in enumerate(sk_from.polys))


def gadget_keyswitch(ct: GlweCiphertext, ksk: tuple,
                     params_to: GlweParams) -> GlweCiphertext:
    """Re-encrypt under the key that produced ksk.

    out = (0,..,0, B) - sign * sum_i <Decomp(A_i), KSK_i>; the phase is
    preserved up to the digit-weighted key-switch noise.
    """
    if len(ksk) != ct.params.k:
        raise KeyMismatch(f"ksk holds {len(ksk)} components, ct has {ct.params.k}")
    gadget = ksk[0].gadget
    acc = trivial(ct.body, params_to)
    for a_i, glev in zip(ct.masks, ksk):
        digits = decompose_poly(a_i, gadget)
        inner = glev_inner(digits, glev)
        acc = sub_ct(acc, inner) if ct.params.sign > 0 else add_ct(acc, inner)
    return acc


def modulus_switch(ct: GlweCiphertext, q_new: int) -> GlweCiphertext:
    """Scale every component by q_new/q with round-half-up.

    The decryption relation survives with drift bounded by 1 + 0.5k per
    coefficient.  Raises TargetTooSmall when the switched scaling factor
    cannot clear twice that drift.
    """
    params = ct.params
    q = params.q
    if q_new > q:
        raise TargetTooSmall(f"target {q_new} exceeds source {q}")
    delta_new = params.delta * q_new // q
    if q_new < q and delta_new <= 2 * (1 + 0.5 * params.k):
        raise TargetTooSmall(
            f"switched delta {delta_new} under twice the expected drift")
    new_params = replace(params, ring=RingParams(params.n, ModContext(q_new)),
                         delta=max(delta_new, 1))

    def switch_poly(p: RingPoly) -> RingPoly:
        vals = [round_half_up_ratio(centered_reduce(int(c), q) * q_new, q)
                for c in p.coeffs]
        return RingPoly(new_params.ring, vals)

    masks = tuple(switch_poly(a) for a in ct.masks)
    return GlweCiphertext(new_params, masks, switch_poly(ct.body))


def pk_encrypt(payload: RingPoly, pk: PublicKey, params: GlweParams,
               seed: bytes) -> GlweCiphertext:
    """Public-key encryption: B = PK1*U + payload + E1, D = PK2*U + E2."""
    rng = _rng_from_seed(b"pkenc|" + seed)
    u = sample_poly("ternary", params.ring, rng=rng)
    e1 = sample_poly("gaussian", params.ring, params.sampler, rng=rng)
    body = poly_add(poly_add(poly_negacyclic_mul(pk.pk1, u), payload), e1)
    masks = []
    for a_i in pk.pk2:
        e2 = sample_poly("gaussian", params.ring, params.sampler, rng=rng)
        masks.append(poly_add(poly_negacyclic_mul(a_i, u), e2))
    return GlweCiphertext(params, tuple(masks), body)


def measure_noise(ct: GlweCiphertext, sk: GlweSecretKey,
                  payload: RingPoly) -> int:
    """Max-abs centered difference between the phase and a known payload."""
    phase = decrypt_phase(ct, sk)
    diff = poly_sub(phase, payload)
    return diff.max_abs()


# ---------------------------------------------------------------------------
# Leveled-scheme helpers: plain modulus reduction and rotation keys
# ---------------------------------------------------------------------------

def reduce_ct_mod(ct: GlweCiphertext, q_new: int) -> GlweCiphertext:
    """Reinterpret every component mod q_new, where q_new divides q.

    This is the exact ModDrop: the decryption relation survives verbatim.
    """
    if ct.params.q % q_new:
        raise ValueError(f"{q_new} does not divide {ct.params.q}")
    new_params = ct.params.with_modulus(q_new)
    masks = tuple(RingPoly(new_params.ring, a.coeffs) for a in ct.masks)
    body = RingPoly(new_params.ring, ct.body.coeffs)
    return GlweCiphertext(new_params, masks, body)


def _reduce_glev_mod(glev: GlevCiphertext, q_new: int) -> GlevCiphertext:
    levels = tuple(reduce_ct_mod(ct, q_new) for ct in glev.levels)
    return GlevCiphertext(levels[0].params, glev.gadget, levels)


def keyswitch_leveled(ct: GlweCiphertext, ksk: tuple) -> GlweCiphertext:
    """Key switching against keys generated at a (possibly larger) modulus.

    Keys built at q_top with a powers-of-beta gadget reduce cleanly
    mod the ciphertext modulus; only the digit count shrinks.
    """
    q = ct.params.q
    top_gadget = ksk[0].gadget
    if top_gadget.q == q:
        return gadget_keyswitch(ct, ksk, ct.params)
    local = GadgetSpec.powers(top_gadget.beta, q)
    acc = trivial(ct.body, ct.params)
    for a_i, glev in zip(ct.masks, ksk):
        digits = decompose_poly(a_i, local)
        reduced = _reduce_glev_mod(glev, q)
        inner = None
        for d, level in zip(digits, reduced.levels):
            term = mul_plain(level, d)
            inner = term if inner is None else add_ct(inner, term)
        acc = sub_ct(acc, inner) if ct.params.sign > 0 else add_ct(acc, inner)
    return acc


def make_galois_key(sk: GlweSecretKey, k_exp: int, gadget: GadgetSpec,
                    seed: bytes, noise_scale: int = 1) -> tuple:
    """Key-switching key from S(X^k) back to S."""
    from .ring import apply_automorphism
    polys = tuple(apply_automorphism(s_i, k_exp) for s_i in sk.polys)
    sk_from = GlweSecretKey(sk.params, polys)
    return make_keyswitch_key(sk_from, sk, gadget,
                              seed + b"|gal%d" % k_exp, noise_scale=noise_scale)


def apply_galois(ct: GlweCiphertext, k_exp: int, gal_key: tuple) -> GlweCiphertext:
    """X -> X^k on every component, then key-switch back under S."""
    moved = apply_automorphism_ct(ct, k_exp)
    return keyswitch_leveled(moved, gal_key)
