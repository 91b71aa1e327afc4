"""CKKS: approximate arithmetic on complex slots over a modulus chain.

An n/2-slot complex vector extends to its forward-ordered Hermitian
form, passes through the shared slot matrices with omega = exp(i*pi/n),
scales by Delta, and rounds to integer coefficients.  Multiplication
tensors, relinearizes (by gadget decomposition against RLev(S^2) or by
the single evk_g key), and rescales by the level's prime, dropping one
level.  The chain keeps w_0 far above Delta and every other prime as
close to Delta as the prime gaps allow.

Bootstrapping mathematics at the plaintext level: the periodic-sine
evaluator (Taylor-then-square construction) and the CoeffToSlot /
SlotToCoeff block matrices, runnable homomorphically through the
generic linear transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .modular import ModContext, centered_reduce, round_half_up_ratio
from .ring import (NoiseSampler, RingParams, RingPoly, poly_add,
                   poly_negacyclic_mul)
from .transform import EncodingMatrices, build_matrices
from .decomposition import GadgetSpec, decompose_poly
from . import glwe as G
from .modular import primes_near


class LevelExhausted(ValueError):
    """No chain modulus left below this ciphertext."""


class ScaleOverflow(ValueError):
    """Delta * |message| does not fit under q0/2."""


class ScaleMismatch(ValueError):
    """Addition operands carry incompatible scales."""


class BadSubring(ValueError):
    """Sparse packing needs n' dividing n."""


KS_BASE = 1 << 8


@dataclass(frozen=True)
class ModulusChain:
    """w_0..w_L with q_l = prod(w_0..w_l)."""

    primes: tuple

    @property
    def levels(self) -> int:
        return len(self.primes) - 1

    def q_at(self, level: int) -> int:
        return math.prod(self.primes[: level + 1])


def make_chain(n: int, delta: int, levels: int, q0_bits: int) -> ModulusChain:
    """NTT primes: one of ~q0_bits bits, then ``levels`` primes near delta."""
    from .modular import gen_ntt_prime, PrimeSpec
    w0 = gen_ntt_prime(PrimeSpec(q0_bits, (1, 2 * n)))
    rest = primes_near(delta, (1, 2 * n), levels)
    return ModulusChain((w0, *rest))


@dataclass
class CkksContext:
    params_top: G.GlweParams       # ring at q_L
    chain: ModulusChain
    delta: int
    matrices: EncodingMatrices
    sk: G.GlweSecretKey
    relin_method: str              # "decomp" or "evk_g"
    relin: G.GlevCiphertext | None
    evk_g: tuple | None            # (A', B') at modulus g*q_L, plus g
    seed: bytes
    galois: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params_top.n

    @property
    def slots(self) -> int:
        return self.n // 2

    @property
    def top_level(self) -> int:
        return self.chain.levels

    def params_at(self, level: int) -> G.GlweParams:
        return self.params_top.with_modulus(self.chain.q_at(level))

    def galois_key(self, exponent: int) -> tuple:
        """g-raised key-switching key for X -> X^exponent.

        Rotations have no rescale after them to flush key-switch noise,
        so the key is held at modulus g*q_L with the payload scaled by
        g; the switch divides the noise back down by g.
        """
        exponent %= 2 * self.n
        if exponent not in self.galois:
            if self.params_top.sampler.sigma == 0:
                # Noiseless contexts reproduce printed constants exactly:
                # a decomposition ladder with zero-noise keys is error-free,
                # while the g-raised switch keeps its +-1/2 rounding floor.
                gadget = GadgetSpec.powers(KS_BASE, self.params_top.q)
                self.galois[exponent] = ("decomp", G.make_galois_key(
                    self.sk, exponent, gadget, self.seed))
            else:
                from .ring import apply_automorphism
                q_top = self.params_top.q
                g = q_top * q_top
                params_g = self.params_top.with_modulus(g * q_top)
                sk_g = G.GlweSecretKey(params_g, tuple(
                    RingPoly(params_g.ring, s.centered()) for s in self.sk.polys))
                moved = apply_automorphism(
                    RingPoly(params_g.ring, self.sk.polys[0].centered()), exponent)
                payload = RingPoly(params_g.ring,
                                   [int(c) * g for c in moved.coeffs])
                evk = G.encrypt(payload, sk_g, params_g,
                                self.seed + b"|gal%d" % exponent)
                self.galois[exponent] = ("gstyle", (evk, g))
        return self.galois[exponent]


@dataclass(frozen=True)
class CkksCiphertext:
    ct: G.GlweCiphertext
    level: int
    scale: float


def new_context(n: int, delta: int, levels: int, q0_bits: int = 40,
                sigma: float = 3.2, relin_method: str = "decomp",
                seed: bytes = b"ckks") -> CkksContext:
    chain = make_chain(n, delta, levels, q0_bits)
    q_top = chain.q_at(levels)
    params = G.GlweParams(k=1, ring=RingParams(n, ModContext(q_top)),
                          t=2, delta=delta, sign_convention="minus",
                          sampler=NoiseSampler(sigma))
    sk, _ = G.keygen(params, seed)
    matrices = build_matrices(n, "complex")
    s2 = poly_negacyclic_mul(sk.polys[0], sk.polys[0])
    relin = None
    evk = None
    if relin_method == "decomp":
        relin = G.glev_encrypt(s2, sk, GadgetSpec.powers(KS_BASE, q_top),
                               seed + b"|relin")
    elif relin_method == "evk_g":
        g = q_top * q_top
        params_g = params.with_modulus(g * q_top)
        sk_g = G.GlweSecretKey(params_g, tuple(
            RingPoly(params_g.ring, s.centered()) for s in sk.polys))
        s2_g = RingPoly(params_g.ring, s2.centered())
        payload = RingPoly(params_g.ring, [int(c) * g for c in s2_g.coeffs])
        evk_ct = G.encrypt(payload, sk_g, params_g, seed + b"|evkg")
        evk = (evk_ct, g)
    else:
        raise ValueError(f"unknown relinearization method {relin_method!r}")
    return CkksContext(params_top=params, chain=chain, delta=delta,
                       matrices=matrices, sk=sk, relin_method=relin_method,
                       relin=relin, evk_g=evk, seed=seed)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def hermitian_extend(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.size != n // 2:
        raise ValueError(f"need {n // 2} slots, got {v.size}")
    return np.concatenate([v, np.conj(v)])


def ckks_encode(v, delta: float, ctx: CkksContext,
                level: int | None = None) -> RingPoly:
    """round(Delta * (W @ reverse(v') / n)) as ring coefficients."""
    level = ctx.top_level if level is None else level
    full = hermitian_extend(v, ctx.n)
    m = ctx.matrices.encode_vector(full)
    q0 = ctx.chain.primes[0]
    if delta * (np.abs(m).max() + 1e-12) >= q0 / 2:
        raise ScaleOverflow(f"delta*|m| = {delta * np.abs(m).max():.3g} >= q0/2")
    coeffs = [math.floor(delta * x.real + 0.5) for x in m]
    return RingPoly(ctx.params_at(level).ring, coeffs)


def ckks_decode(scaled: RingPoly, delta: float, ctx: CkksContext) -> np.ndarray:
    """First n/2 entries of W* @ (coefficients / Delta)."""
    q = scaled.params.modulus
    m = np.array([centered_reduce(int(c), q) for c in scaled.coeffs],
                 dtype=float) / delta
    return ctx.matrices.decode_vector(m)[: ctx.slots]


def decode_full(scaled: RingPoly, delta: float, ctx: CkksContext) -> np.ndarray:
    """All n evaluation slots, Hermitian mirror included (for symmetry
    checks)."""
    q = scaled.params.modulus
    m = np.array([centered_reduce(int(c), q) for c in scaled.coeffs],
                 dtype=float) / delta
    return ctx.matrices.decode_vector(m)


# ---------------------------------------------------------------------------
# Encryption and arithmetic
# ---------------------------------------------------------------------------

def encrypt(v, ctx: CkksContext, seed: bytes,
            level: int | None = None) -> CkksCiphertext:
    level = ctx.top_level if level is None else level
    scaled = ckks_encode(v, ctx.delta, ctx, level)
    params = ctx.params_at(level)
    sk = _sk_at(ctx, level)
    return CkksCiphertext(G.encrypt(scaled, sk, params, seed), level,
                          float(ctx.delta))


def _sk_at(ctx: CkksContext, level: int) -> G.GlweSecretKey:
    params = ctx.params_at(level)
    return G.GlweSecretKey(params, tuple(
        RingPoly(params.ring, s.centered()) for s in ctx.sk.polys))


def decrypt(ct: CkksCiphertext, ctx: CkksContext) -> np.ndarray:
    sk = _sk_at(ctx, ct.level)
    phase = G.decrypt_phase(ct.ct, sk)
    return ckks_decode(phase, ct.scale, ctx)


def add(a: CkksCiphertext, b: CkksCiphertext) -> CkksCiphertext:
    if a.level != b.level:
        raise LevelExhausted("add needs matching levels")
    if abs(a.scale / b.scale - 1) > 2**-8:
        raise ScaleMismatch(f"scales {a.scale:.6g} vs {b.scale:.6g}")
    return CkksCiphertext(G.add_ct(a.ct, b.ct), a.level, a.scale)


def sub(a: CkksCiphertext, b: CkksCiphertext) -> CkksCiphertext:
    if a.level != b.level:
        raise LevelExhausted("sub needs matching levels")
    return CkksCiphertext(G.sub_ct(a.ct, b.ct), a.level, a.scale)


def rescale(ct: CkksCiphertext, ctx: CkksContext) -> CkksCiphertext:
    """Divide every component by w_l (round), moving down one level."""
    if ct.level < 1:
        raise LevelExhausted("cannot rescale below the chain floor")
    w = ctx.chain.primes[ct.level]
    q = ctx.chain.q_at(ct.level)
    new_params = ctx.params_at(ct.level - 1)

    def down(p: RingPoly) -> RingPoly:
        vals = [round_half_up_ratio(centered_reduce(int(c), q), w)
                for c in p.coeffs]
        return RingPoly(new_params.ring, vals)

    out = G.GlweCiphertext(new_params, tuple(down(a) for a in ct.ct.masks),
                           down(ct.ct.body))
    return CkksCiphertext(out, ct.level - 1, ct.scale / w)


def mod_drop(ct: CkksCiphertext, ctx: CkksContext) -> CkksCiphertext:
    """Reduce components mod q_(l-1); scale and payload untouched."""
    if ct.level < 1:
        raise LevelExhausted("cannot drop below the chain floor")
    lowered = G.reduce_ct_mod(ct.ct, ctx.chain.q_at(ct.level - 1))
    return CkksCiphertext(lowered, ct.level - 1, ct.scale)


def _relinearize(d0: RingPoly, d1: RingPoly, d2: RingPoly, level: int,
                 ctx: CkksContext) -> G.GlweCiphertext:
    params = ctx.params_at(level)
    ct_alpha = G.GlweCiphertext(params, (d1,), d0)
    if ctx.relin_method == "decomp":
        q = params.q
        local = GadgetSpec.powers(KS_BASE, q)
        digits = decompose_poly(d2, local)
        reduced = G._reduce_glev_mod(ctx.relin, q)
        inner = None
        for d, lev_ct in zip(digits, reduced.levels):
            term = G.mul_plain(lev_ct, d)
            inner = term if inner is None else G.add_ct(inner, term)
        return G.add_ct(ct_alpha, inner)
    evk_ct, g = ctx.evk_g
    q = params.q
    big = g * q
    ring_big = RingParams(ctx.n, ModContext(big))
    d2_big = RingPoly(ring_big, d2.centered())
    a_big = RingPoly(ring_big, G.reduce_ct_mod(evk_ct, big).masks[0].coeffs) \
        if evk_ct.params.q != big else evk_ct.masks[0]
    b_big = RingPoly(ring_big, G.reduce_ct_mod(evk_ct, big).body.coeffs) \
        if evk_ct.params.q != big else evk_ct.body
    prod_a = poly_negacyclic_mul(a_big, d2_big)
    prod_b = poly_negacyclic_mul(b_big, d2_big)

    def down(p: RingPoly) -> RingPoly:
        vals = [round_half_up_ratio(centered_reduce(int(c), big), g)
                for c in p.coeffs]
        return RingPoly(params.ring, vals)

    ct_beta = G.GlweCiphertext(params, (down(prod_a),), down(prod_b))
    return G.add_ct(ct_alpha, ct_beta)


def mul_ct(a: CkksCiphertext, b: CkksCiphertext,
           ctx: CkksContext) -> CkksCiphertext:
    """Tensor, relinearize, rescale: one level down, scale ~Delta."""
    if a.level != b.level:
        raise LevelExhausted("mul needs matching levels")
    if a.level < 1:
        raise LevelExhausted("no level left to absorb the rescale")
    a1, b1 = a.ct.masks[0], a.ct.body
    a2, b2 = b.ct.masks[0], b.ct.body
    d0 = poly_negacyclic_mul(b1, b2)
    d1 = poly_add(poly_negacyclic_mul(b2, a1), poly_negacyclic_mul(b1, a2))
    d2 = poly_negacyclic_mul(a1, a2)
    raised = _relinearize(d0, d1, d2, a.level, ctx)
    prod = CkksCiphertext(raised, a.level, a.scale * b.scale)
    return rescale(prod, ctx)


def mul_plain(ct: CkksCiphertext, v, ctx: CkksContext) -> CkksCiphertext:
    """Slot-wise product with a cleartext vector; consumes one level."""
    if ct.level < 1:
        raise LevelExhausted("no level left to absorb the rescale")
    lam = ckks_encode(v, ctx.delta, ctx, ct.level)
    scaled = CkksCiphertext(G.mul_plain(ct.ct, lam), ct.level,
                            ct.scale * ctx.delta)
    return rescale(scaled, ctx)


def _apply_gstyle_galois(ct: G.GlweCiphertext, exponent: int,
                         key: tuple, ctx: CkksContext) -> G.GlweCiphertext:
    """Automorphism then g-raised key switch: out = (round(A' evk_a / g),
    B' + round(A' evk_b / g)), all back mod the ciphertext modulus."""
    evk, g = key
    moved = G.apply_automorphism_ct(ct, exponent)
    q = ct.params.q
    big = g * q
    ring_big = RingParams(ctx.n, ModContext(big))
    a_prime = RingPoly(ring_big, moved.masks[0].centered())
    evk_low = G.reduce_ct_mod(evk, big) if evk.params.q != big else evk
    prod_a = poly_negacyclic_mul(a_prime, RingPoly(ring_big, evk_low.masks[0].coeffs))
    prod_b = poly_negacyclic_mul(a_prime, RingPoly(ring_big, evk_low.body.coeffs))

    def down(p: RingPoly) -> RingPoly:
        vals = [round_half_up_ratio(centered_reduce(int(c), big), g)
                for c in p.coeffs]
        return RingPoly(ct.params.ring, vals)

    body = poly_add(moved.body, down(prod_b))
    return G.GlweCiphertext(ct.params, (down(prod_a),), body)


def _apply_galois(ct: G.GlweCiphertext, exponent: int,
                  ctx: CkksContext) -> G.GlweCiphertext:
    kind, key = ctx.galois_key(exponent)
    if kind == "decomp":
        return G.apply_galois(ct, exponent, key)
    return _apply_gstyle_galois(ct, exponent, key, ctx)


def rotate_slots(ct: CkksCiphertext, h: int, ctx: CkksContext) -> CkksCiphertext:
    """Rotate the n/2 slots left by h (X -> X^J(h) plus key switch)."""
    h = h % ctx.slots
    if h == 0:
        return ct
    exponent = pow(5, h, 2 * ctx.n)
    return CkksCiphertext(_apply_galois(ct.ct, exponent, ctx),
                          ct.level, ct.scale)


def conjugate(ct: CkksCiphertext, ctx: CkksContext) -> CkksCiphertext:
    """Slot-wise complex conjugation (X -> X^-1 plus key switch)."""
    exponent = 2 * ctx.n - 1
    return CkksCiphertext(_apply_galois(ct.ct, exponent, ctx),
                          ct.level, ct.scale)


# ---------------------------------------------------------------------------
# Sparse packing
# ---------------------------------------------------------------------------

def sparse_pack(v, n_prime: int, ctx: CkksContext,
                level: int | None = None) -> RingPoly:
    """Encode n'/2 slots into the Y = X^(n/n') subring.

    The result has nonzero coefficients only at multiples of n/n';
    decoding yields n/n' repetitions of the short slot pattern.
    """
    n = ctx.n
    if n % n_prime or n_prime < 2:
        raise BadSubring(f"n' = {n_prime} must divide n = {n}")
    level = ctx.top_level if level is None else level
    small = build_matrices(n_prime, "complex")
    v = np.asarray(v, dtype=complex)
    if v.size != n_prime // 2:
        raise BadSubring(f"need {n_prime // 2} slots, got {v.size}")
    full = np.concatenate([v, np.conj(v)])
    m_small = small.encode_vector(full)
    stride = n // n_prime
    coeffs = [0] * n
    for j, x in enumerate(m_small):
        coeffs[j * stride] = math.floor(ctx.delta * x.real + 0.5)
    return RingPoly(ctx.params_at(level).ring, coeffs)


# ---------------------------------------------------------------------------
# Bootstrapping mathematics (plaintext level)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SineEvaluator:
    """Real polynomial approximating (q0/2pi) * sin(2pi x / q0).

    Built as a degree-d0 Taylor stub of exp(2pi i x / (2^r q0)), squared
    r times, then combined into the sine via (-i/2)(w - conj(w)).
    """

    q0: float
    r: int
    d0: int
    coeffs: np.ndarray  # real, ascending degree

    def __call__(self, x):
        return np.polyval(self.coeffs[::-1], np.asarray(x, dtype=float))


def eval_exp_coeffs(q0: float, r: int, d0: int) -> SineEvaluator:
    if r < 1 or d0 < 3:
        raise ValueError("need r >= 1 and d0 >= 3")
    base = np.zeros(d0 + 1, dtype=complex)
    factor = 2j * np.pi / (q0 * (1 << r))
    term = 1.0 + 0j
    for d in range(d0 + 1):
        base[d] = term
        term = term * factor / (d + 1)
    w = base
    for _ in range(r):
        w = np.convolve(w, w)
    sine_coeffs = (q0 / (2 * np.pi)) * np.imag(w)
    return SineEvaluator(q0=q0, r=r, d0=d0, coeffs=sine_coeffs)


@dataclass(frozen=True)
class CtsStcMatrices:
    """Half-size blocks of the encoding map E = W I^R / n and the
    decoding map W*.

    CoeffToSlot: s1 = E11 @ conj(x) + E12 @ x, s2 = E21 @ conj(x) + E22 @ x
    where x is the slot vector; s1/s2 then hold the lower/upper halves of
    the coefficient vector.  SlotToCoeff inverts with the first-half rows
    of W*: x = D1 @ s1 + D2 @ s2.
    """

    E11: np.ndarray
    E12: np.ndarray
    E21: np.ndarray
    E22: np.ndarray
    D1: np.ndarray
    D2: np.ndarray

    def coeff_to_slot(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=complex)
        return (self.E11 @ np.conj(x) + self.E12 @ x,
                self.E21 @ np.conj(x) + self.E22 @ x)

    def slot_to_coeff(self, s1, s2) -> np.ndarray:
        return self.D1 @ np.asarray(s1) + self.D2 @ np.asarray(s2)


def cts_stc_matrices(ctx: CkksContext) -> CtsStcMatrices:
    n, half = ctx.n, ctx.n // 2
    rev = np.eye(n)[::-1]
    E = (ctx.matrices.W_hat @ rev) / n   # m = E @ v'  with v' = (x, conj x)
    # v' = (x, conj x): columns of E acting on conj(x) are the first half.
    E11, E12 = E[:half, :half], E[:half, half:]
    E21, E22 = E[half:, :half], E[half:, half:]
    Wstar = ctx.matrices.W_hat_star
    D1, D2 = Wstar[:half, :half], Wstar[:half, half:]
    # E maps (conj x, x)? verify orientation: v' = (x, conj x), reversed
    # inside encode_vector; E here already folds the reversal, so column
    # block order follows v' directly: first block multiplies x.
    return CtsStcMatrices(E11=E12, E12=E11, E21=E22, E22=E21, D1=D1, D2=D2)


# ---------------------------------------------------------------------------
# Generic homomorphic linear transform (diagonal method)
# ---------------------------------------------------------------------------

def linear_transform(ct: CkksCiphertext, matrix, ctx: CkksContext) -> CkksCiphertext:
    """Homomorphic (n/2 x n/2 complex matrix) @ slots; one level.

    Splits the matrix into cyclic diagonals: A @ x = sum_h u_h (*) rot(x, h).
    """
    half = ctx.slots
    mat = np.asarray(matrix, dtype=complex)
    acc = None
    for h in range(half):
        diag = np.array([mat[s][(s + h) % half] for s in range(half)])
        if not np.any(np.abs(diag) > 1e-12):
            continue
        rotated = rotate_slots(ct, h, ctx)
        term = mul_plain(rotated, diag, ctx)
        acc = term if acc is None else add(acc, term)
    if acc is None:
        zero = encrypt(np.zeros(half, dtype=complex), ctx, b"zero", ct.level - 1)
        return zero
    return acc
