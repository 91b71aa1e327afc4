"""TFHE over Z_q: LWE algebra, external products, LUT bootstrapping, gates.

LWE secret keys are binary, and the GLWE accumulator uses a single mask
polynomial (k' = 1) so the blind-rotation selectors are plain RGSW bits.
The lookup table V(X) packs each plaintext value into a run of
2n/t coefficients; only t/2 contiguous plaintext values are usable
because the ring rotates negacyclically.

Two execution paths share the same key material:

* a reference path on exact big-int ring arithmetic (any parameters),
* a vectorized float-FFT path used by ``bootstrap``/``gate_eval`` when
  q is a power of two and n >= 64.  FFT rounding lands well inside the
  noise budget and is measured by the test suite, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modular import ModContext, centered_reduce, round_half_up_ratio
from .ring import NoiseSampler, RingParams, RingPoly, mul_xpow, _rng_from_seed
from .decomposition import GadgetSpec, decompose_poly, decompose_scalar
from . import glwe as G


class IndexOutOfRange(ValueError):
    """Coefficient index outside the ring degree."""


class DomainTooLarge(ValueError):
    """A LUT may cover at most t/2 contiguous plaintext values."""


class UnsupportedGate(ValueError):
    """Unknown gate name."""


# ---------------------------------------------------------------------------
# LWE ciphertexts (vector form)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LweParams:
    k: int
    q: int
    t: int
    sampler: NoiseSampler = NoiseSampler(3.2)

    @property
    def delta(self) -> int:
        return self.q // self.t


@dataclass(frozen=True)
class LweSecretKey:
    params: LweParams
    s: np.ndarray  # binary, int64


@dataclass(frozen=True)
class LweCiphertext:
    params: LweParams
    a: np.ndarray  # int64, canonical mod q
    b: int

    def __add__(self, other):
        _check(self.params, other.params)
        return LweCiphertext(self.params, (self.a + other.a) % self.params.q,
                             (self.b + other.b) % self.params.q)

    def __sub__(self, other):
        _check(self.params, other.params)
        return LweCiphertext(self.params, (self.a - other.a) % self.params.q,
                             (self.b - other.b) % self.params.q)

    def __neg__(self):
        return LweCiphertext(self.params, (-self.a) % self.params.q,
                             (-self.b) % self.params.q)

    def scale(self, c: int) -> "LweCiphertext":
        return LweCiphertext(self.params, (self.a * c) % self.params.q,
                             (self.b * c) % self.params.q)


def _check(p1, p2):
    if p1 != p2:
        raise ValueError("LWE parameter mismatch")


def lwe_keygen(params: LweParams, seed: bytes) -> LweSecretKey:
    rng = _rng_from_seed(b"lwekey|" + seed)
    return LweSecretKey(params, rng.integers(0, 2, size=params.k, dtype=np.int64))


def lwe_encrypt(m_scaled: int, sk: LweSecretKey, seed: bytes) -> LweCiphertext:
    """Encrypt an already-scaled value: b = <a, s> + payload + e."""
    p = sk.params
    rng = _rng_from_seed(b"lweenc|" + seed)
    a = rng.integers(0, p.q, size=p.k, dtype=np.int64)
    e = _gauss_int(rng, p.sampler)
    b = (int(a @ sk.s) + m_scaled + e) % p.q
    return LweCiphertext(p, a, b)


def _gauss_int(rng, sampler: NoiseSampler) -> int:
    if sampler.sigma == 0:
        return 0
    while True:
        e = int(np.rint(rng.normal(0.0, sampler.sigma)))
        if abs(e) <= sampler.bound:
            return e


def lwe_phase(ct: LweCiphertext, sk: LweSecretKey) -> int:
    return centered_reduce(ct.b - int(ct.a @ sk.s), ct.params.q)


def lwe_decrypt(ct: LweCiphertext, sk: LweSecretKey) -> int:
    """round(phase/Delta) mod t, centered."""
    p = ct.params
    m = round_half_up_ratio(lwe_phase(ct, sk), p.delta)
    return centered_reduce(m, p.t)


def lwe_trivial(m_scaled: int, params: LweParams) -> LweCiphertext:
    return LweCiphertext(params, np.zeros(params.k, dtype=np.int64),
                         m_scaled % params.q)


def lwe_modswitch(ct: LweCiphertext, q_new: int) -> LweCiphertext:
    """Component-wise round(c * q_new / q); drift <= 1 + 0.5k."""
    p = ct.params
    scale = lambda c: round_half_up_ratio(centered_reduce(int(c), p.q) * q_new, p.q) % q_new
    a = np.array([scale(c) for c in ct.a], dtype=np.int64)
    new = LweParams(p.k, q_new, p.t, p.sampler)
    return LweCiphertext(new, a, scale(ct.b))


# ---------------------------------------------------------------------------
# Lookup tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lut:
    """LUT polynomial V(X); block j of width 2n/t holds one output."""

    poly: RingPoly
    t: int
    domain_lo: int

    @property
    def block(self) -> int:
        return 2 * self.poly.params.n // self.t


def build_lut(f, params: RingParams, t: int, domain_lo: int = None) -> Lut:
    """V(X) from a table f over t/2 contiguous plaintext inputs.

    f maps each m in [domain_lo, domain_lo + t/2) to an output in Z_t.
    Nonnegative m fill coefficient block Delta_hat*m with f(m); negative
    m wrap negacyclically, landing at block Delta_hat*m + n with flipped
    sign, so that extraction at phase Delta_hat*m + e recovers f(m).
    """
    n = params.n
    block = 2 * n // t
    if domain_lo is None:
        domain_lo = -(t // 4)
    domain = range(domain_lo, domain_lo + t // 2)
    if len(domain) > t // 2:
        raise DomainTooLarge(f"domain spans {len(domain)} > t/2 values")
    coeffs = [0] * n
    q = params.modulus
    for m in domain:
        val = f(m) if callable(f) else f[m - domain_lo]
        for e in range(block):
            idx = block * m + e
            if idx >= 0:
                if idx >= n:
                    raise DomainTooLarge(f"block for m={m} leaves the ring")
                coeffs[idx] = val % q
            else:
                coeffs[idx + n] = (-val) % q
    return Lut(RingPoly(params, coeffs), t, domain_lo)


def sign_lut(params: RingParams, t: int) -> Lut:
    """All-ones V(X): +1 for phases in [0, n), -1 beyond (negacyclic).

    This is the gate LUT; it maps the encoding m >= 0 -> +1, m < 0 -> -1
    over the full plaintext circle.
    """
    return build_lut(lambda m: 1 if m >= 0 else -1, params, t)


def lut_rotation_shadow(lut: Lut, a_hat, b_hat: int, s_bits) -> list[int]:
    """Unencrypted simulation of the blind rotation: V * X^-(b - <a, s>),
    as centered coefficients.  The oracle for every bootstrap test."""
    phase = int(b_hat) - int(np.dot(np.asarray(a_hat), np.asarray(s_bits)))
    from .ring import rotate_coeffs
    rotated = rotate_coeffs(lut.poly, phase)
    return rotated.centered()


# ---------------------------------------------------------------------------
# External product / CMUX on generic GLWE ciphertexts
# ---------------------------------------------------------------------------

def external_product(ct: G.GlweCiphertext, ggsw: G.GgswCiphertext) -> G.GlweCiphertext:
    """GLWE x GGSW -> GLWE of the product plaintext.

    sum_i <Decomp(C_i), GLev row i> over the k masks and the body.
    """
    if ct.params.ring != ggsw.params.ring or ct.params.k != ggsw.params.k:
        raise G.KeyMismatch("external product parameter mismatch")
    gadget = ggsw.gadget
    components = list(ct.masks) + [ct.body]
    acc = None
    for comp, row in zip(components, ggsw.rows):
        digits = decompose_poly(comp, gadget)
        term = G.glev_inner(digits, row)
        acc = term if acc is None else G.add_ct(acc, term)
    return acc


def cmux(sel: G.GgswCiphertext, ct0: G.GlweCiphertext,
         ct1: G.GlweCiphertext) -> G.GlweCiphertext:
    """sel ? ct1 : ct0, with sel a GGSW-encrypted bit."""
    return G.add_ct(external_product(G.sub_ct(ct1, ct0), sel), ct0)


def blind_rotate(lut_ct: G.GlweCiphertext, a_hat, b_hat: int,
                 bsk: "BootstrapKey") -> G.GlweCiphertext:
    """Homomorphically compute V * X^-(b - <a, s>) from a ciphertext
    already modulus-switched to 2n.

    V_0 = V * X^-b, then one CMUX per secret bit multiplies in X^(a_i s_i).
    """
    acc = G.mul_xpow(lut_ct, -int(b_hat))
    for a_i, ggsw in zip(a_hat, bsk.ggsw_bits):
        rotated = G.mul_xpow(acc, int(a_i))
        acc = cmux(ggsw, acc, rotated)
    return acc


def sample_extract(ct: G.GlweCiphertext, h: int,
                   lwe_params: LweParams) -> LweCiphertext:
    """LWE encryption of coefficient h under the flattened GLWE key.

    a'_{n*i+j} = a_{i, h-j} for j <= h and -a_{i, n+h-j} above; adds no
    noise.
    """
    n = ct.params.n
    if not 0 <= h < n:
        raise IndexOutOfRange(f"coefficient {h} outside degree {n}")
    q = ct.params.q
    out = np.zeros(ct.params.k * n, dtype=np.int64)
    for i, mask in enumerate(ct.masks):
        c = mask.coeffs
        for j in range(n):
            if j <= h:
                out[n * i + j] = int(c[h - j]) % q
            else:
                out[n * i + j] = (-int(c[n + h - j])) % q
    b = int(ct.body.coeffs[h]) % q
    return LweCiphertext(lwe_params, out, b)


def extracted_key(glwe_sk: G.GlweSecretKey, lwe_params: LweParams) -> LweSecretKey:
    """The flattened coefficient vector of the GLWE key."""
    flat = np.concatenate([np.array([int(c) for c in p.coeffs], dtype=np.int64)
                           for p in glwe_sk.polys])
    return LweSecretKey(lwe_params, flat)


# ---------------------------------------------------------------------------
# LWE key switching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LweKeySwitchKey:
    """Per-source-coefficient ladders of LWE encryptions of s'_j."""

    gadget: GadgetSpec
    rows: tuple          # rows[j][lev] = LweCiphertext of gadget[lev]*s'_j
    params_to: LweParams


def make_lwe_keyswitch_key(sk_from: LweSecretKey, sk_to: LweSecretKey,
                           gadget: GadgetSpec, seed: bytes) -> LweKeySwitchKey:
    rows = []
    for j, bit in enumerate(sk_from.s):
        levels = tuple(
            lwe_encrypt(int(bit) * g, sk_to, seed + b"|ksk%d_%d" % (j, lev))
            for lev, g in enumerate(gadget.gadget))
        rows.append(levels)
    return LweKeySwitchKey(gadget, tuple(rows), sk_to.params)


def lwe_keyswitch(ct: LweCiphertext, ksk: LweKeySwitchKey) -> LweCiphertext:
    """(0, b) - sum_j <Decomp(a_j), KSK_j>."""
    out = lwe_trivial(ct.b, ksk.params_to)
    for a_j, levels in zip(ct.a, ksk.rows):
        digits = decompose_scalar(int(a_j), ksk.gadget)
        for d, level in zip(digits, levels):
            if d:
                out = out - level.scale(int(d))
    return out


# ---------------------------------------------------------------------------
# Bootstrapping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapKey:
    """GGSW encryptions of the LWE secret bits under the accumulator key,
    plus the key-switching key from the extracted key back to s."""

    lwe_params: LweParams
    glwe_params: G.GlweParams
    ggsw_bits: tuple
    ksk: LweKeySwitchKey
    glwe_sk: G.GlweSecretKey | None = None  # kept for tests/oracles only


def make_bootstrap_key(lwe_sk: LweSecretKey, params_bk: G.GlweParams,
                       gadget: GadgetSpec, ks_gadget: GadgetSpec,
                       seed: bytes, keep_secret: bool = True) -> BootstrapKey:
    if params_bk.k != 1:
        raise ValueError("the accumulator uses a single mask (k' = 1)")
    rng_seed = b"bsk|" + seed
    glwe_sk, _ = G.keygen(params_bk, rng_seed)
    bits = []
    for i, s_i in enumerate(lwe_sk.s):
        m = RingPoly.constant(params_bk.ring, int(s_i))
        bits.append(G.ggsw_encrypt(m, glwe_sk, gadget, rng_seed + b"|bit%d" % i))
    extract_params = LweParams(params_bk.k * params_bk.n, params_bk.q,
                               lwe_sk.params.t, params_bk.sampler)
    s_prime = extracted_key(glwe_sk, extract_params)
    # Key material carries the narrow key-generation noise, not the wide
    # fresh-ciphertext noise.
    ks_params = LweParams(lwe_sk.params.k, lwe_sk.params.q, lwe_sk.params.t,
                          params_bk.sampler)
    ks_target = LweSecretKey(ks_params, lwe_sk.s)
    ksk = make_lwe_keyswitch_key(s_prime, ks_target, ks_gadget, rng_seed)
    return BootstrapKey(lwe_sk.params, params_bk, tuple(bits), ksk,
                        glwe_sk if keep_secret else None)


def bootstrap(ct: LweCiphertext, lut: Lut, bsk: BootstrapKey,
              engine: "FastEngine | None" = None) -> LweCiphertext:
    """Noise-refreshing evaluation of the LUT at the encrypted phase.

    Modulus-switch to 2n, blind-rotate an encryption of Delta*V, extract
    the constant coefficient, and key-switch back to s.  Half a LUT
    block is added to the rotation so a block tolerates noise of either
    sign (round semantics instead of floor).
    """
    if engine is None:
        engine = get_engine(bsk)
    if engine is not None:
        return engine.bootstrap_batch([ct], lut)[0]
    return _bootstrap_reference(ct, lut, bsk)


def bootstrap_shadow(ct: LweCiphertext, lut: Lut, s_bits,
                     glwe_n: int) -> int:
    """Cleartext mirror of ``bootstrap``: the plaintext it must output."""
    switched = lwe_modswitch(ct, 2 * glwe_n)
    b_used = (switched.b + lut.block // 2) % (2 * glwe_n)
    rotated = lut_rotation_shadow(lut, switched.a, b_used, s_bits)
    return centered_reduce(rotated[0], ct.params.t)


def _bootstrap_reference(ct: LweCiphertext, lut: Lut,
                         bsk: BootstrapKey) -> LweCiphertext:
    pbk = bsk.glwe_params
    n = pbk.n
    switched = lwe_modswitch(ct, 2 * n)
    b_used = (switched.b + lut.block // 2) % (2 * n)
    scaled = RingPoly(pbk.ring, [int(c) * pbk.delta for c in lut.poly.coeffs])
    acc = G.trivial(scaled, pbk)
    acc = blind_rotate(acc, switched.a, b_used, bsk)
    extract_params = LweParams(pbk.k * n, pbk.q, ct.params.t, pbk.sampler)
    extracted = sample_extract(acc, 0, extract_params)
    out = lwe_keyswitch(extracted, bsk.ksk)
    return LweCiphertext(ct.params, out.a, out.b)


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------

def encode_bit(bit: int) -> int:
    """Gate inputs 0 and 1 encode as the plaintexts -1 and 1."""
    return 1 if bit else -1


def decode_bit(m: int) -> int:
    return 1 if m > 0 else 0


def encrypt_bit(bit: int, sk: LweSecretKey, seed: bytes) -> LweCiphertext:
    return lwe_encrypt(encode_bit(bit) * sk.params.delta, sk, seed)


def decrypt_bit(ct: LweCiphertext, sk: LweSecretKey) -> int:
    return decode_bit(lwe_decrypt(ct, sk))


_GATE_COMBOS = {
    # name -> (scale factors for ct1, ct2, constant offset in plaintext units)
    "AND": (1, 1, -1),
    "OR": (1, 1, 1),
    "NAND": (-1, -1, 1),
    "NOR": (-1, -1, -1),
    "XOR": (2, 2, 0),
    "XNOR": (-2, -2, 0),
}


def gate_linear_combo(gate: str, ct1: LweCiphertext,
                      ct2: LweCiphertext) -> LweCiphertext:
    try:
        c1, c2, off = _GATE_COMBOS[gate]
    except KeyError:
        raise UnsupportedGate(gate) from None
    out = ct1.scale(c1) + ct2.scale(c2)
    if off:
        out = out + lwe_trivial(off * ct1.params.delta, ct1.params)
    return out


def gate_eval(gate: str, cts, bsk: BootstrapKey,
              engine: "FastEngine | None" = None):
    """Evaluate a boolean gate on encrypted bits.

    Two-input gates combine linearly then bootstrap with the sign LUT.
    MUX takes (sel: GgswCiphertext, a: GlweCiphertext, b: GlweCiphertext)
    and selects via one external product, no bootstrap.
    """
    if gate == "MUX":
        sel, ct_a, ct_b = cts
        return cmux(sel, ct_a, ct_b)
    if gate == "NOT":
        return -cts[0]
    ct1, ct2 = cts
    combo = gate_linear_combo(gate, ct1, ct2)
    lut = sign_lut(bsk.glwe_params.ring, ct1.params.t)
    return bootstrap(combo, lut, bsk, engine=engine)


# ---------------------------------------------------------------------------
# Vectorized FFT engine (power-of-two q, larger rings)
# ---------------------------------------------------------------------------

class FastEngine:
    """Batched blind rotation with cached FFT of the bootstrap key.

    Holds everything as int64/complex128 numpy arrays.  The FFT path
    introduces sub-integer rounding that lands in the ciphertext noise;
    tests bound it explicitly.
    """

    def __init__(self, bsk: BootstrapKey):
        import scipy.fft as sfft
        self._fft = sfft
        pbk = bsk.glwe_params
        self.bsk = bsk
        self.n = pbk.n
        self.q = pbk.q
        self.k = bsk.lwe_params.k
        gadget = bsk.ggsw_bits[0].gadget
        self.beta = gadget.beta
        self.ell = gadget.ell
        self.shift = (self.q // self.beta**self.ell).bit_length() - 1
        self.log_beta = self.beta.bit_length() - 1
        n = self.n
        self.twist = np.exp(1j * np.pi * np.arange(n) / n)
        self.untwist = np.exp(-1j * np.pi * np.arange(n) / n)
        # bsk_fft[i]: (rows=2, ell, comps=2, n)
        mats = np.empty((self.k, 2, self.ell, 2, n), dtype=np.int64)
        for i, ggsw in enumerate(bsk.ggsw_bits):
            for r, row in enumerate(ggsw.rows):
                for lev, ct in enumerate(row.levels):
                    mats[i, r, lev, 0] = np.array(ct.masks[0].centered())
                    mats[i, r, lev, 1] = np.array(ct.body.centered())
        self.bsk_fft = self._fft.fft(mats * self.twist, axis=-1, workers=-1)
        # key switching key as dense arrays: (n_in, ell_ks, k+1)
        ks = bsk.ksk
        self.ks_gadget = ks.gadget
        n_in = len(ks.rows)
        ell_ks = ks.gadget.ell
        self.ksk_a = np.zeros((n_in, ell_ks, self.k), dtype=np.int64)
        self.ksk_b = np.zeros((n_in, ell_ks), dtype=np.int64)
        for j, levels in enumerate(ks.rows):
            for lev, ct in enumerate(levels):
                self.ksk_a[j, lev] = ct.a
                self.ksk_b[j, lev] = ct.b

    # -- helpers ----------------------------------------------------------

    def _center(self, x):
        q = self.q
        return ((x + q // 2) % q) - q // 2

    def _decompose(self, v):
        """Balanced digits of round(v / 2^shift); v centered int64.

        Returns (..., ell) stacked most-significant-first to match the
        gadget vector ordering.
        """
        if self.shift:
            w = (v + (1 << (self.shift - 1))) >> self.shift
        else:
            w = v
        beta, lb = self.beta, self.log_beta
        half_up = beta // 2 - 1
        digits = []
        for _ in range(self.ell):
            r = ((w + half_up) & (beta - 1)) - half_up
            digits.append(r)
            w = (w - r) >> lb
        return np.stack(digits[::-1], axis=-2)  # (..., ell, n)

    def _rotate(self, arr, shifts):
        """arr: (B, C, n) coefficients; multiply each batch row by
        X^shifts[b] (negacyclic)."""
        n = self.n
        j = np.arange(n)[None, :]
        e = (j - shifts[:, None]) % (2 * n)          # (B, n)
        src = (e % n)[:, None, :]
        sign = np.where(e < n, 1, -1)[:, None, :]
        return np.take_along_axis(arr, np.broadcast_to(src, arr.shape), axis=-1) * sign

    # -- batched pipeline --------------------------------------------------

    def blind_rotate_batch(self, lut_coeffs: np.ndarray, a_hat: np.ndarray,
                           b_hat: np.ndarray) -> np.ndarray:
        """lut_coeffs: (n,) scaled plaintext; a_hat: (B, k), b_hat: (B,)
        already mod 2n.  Returns accumulators (B, 2, n) centered."""
        B = a_hat.shape[0]
        n = self.n
        acc = np.zeros((B, 2, n), dtype=np.int64)
        acc[:, 1, :] = lut_coeffs[None, :]
        acc = self._rotate(acc, (-b_hat) % (2 * n))
        fft, twist, untwist = self._fft, self.twist, self.untwist
        for i in range(self.k):
            diff = self._rotate(acc, a_hat[:, i]) - acc      # (B, 2, n)
            digits = self._decompose(self._center(diff))     # (B, 2, ell, n)
            dig_fft = fft.fft(digits * twist, axis=-1, workers=-1)
            prod = np.einsum("bjlx,jlcx->bcx", dig_fft, self.bsk_fft[i])
            back = fft.ifft(prod, axis=-1, workers=-1) * untwist
            acc = self._center(acc + np.rint(back.real).astype(np.int64))
        return acc

    def extract_and_keyswitch(self, acc: np.ndarray) -> np.ndarray:
        """acc: (B, 2, n) -> LWE ciphertexts (B, k+1) under the base key."""
        B, _, n = acc.shape
        q = self.q
        # a'_j = a_{0, -j mod n} with sign flip for j >= 1
        a_prime = np.empty((B, n), dtype=np.int64)
        a_prime[:, 0] = acc[:, 0, 0]
        a_prime[:, 1:] = -acc[:, 0, :0:-1]
        b = acc[:, 1, 0] % q
        # decompose a' against the key-switch gadget (exact, classic)
        gs = self.ks_gadget
        shift_last = (q // gs.beta**gs.ell).bit_length() - 1
        lb = gs.beta.bit_length() - 1
        half_up = gs.beta // 2 - 1
        w = self._center(a_prime)
        if shift_last:
            w = (w + (1 << (shift_last - 1))) >> shift_last
        out_a = np.zeros((B, self.k), dtype=np.int64)
        out_b = b.copy()
        digits = []
        for _ in range(gs.ell):
            r = ((w + half_up) & (gs.beta - 1)) - half_up
            digits.append(r)
            w = (w - r) >> lb
        for lev_from_lsb, d in enumerate(digits):
            lev = gs.ell - 1 - lev_from_lsb
            out_a -= np.einsum("bj,jk->bk", d, self.ksk_a[:, lev, :])
            out_b -= np.einsum("bj,j->b", d, self.ksk_b[:, lev])
        return np.concatenate([out_a % q, (out_b % q)[:, None]], axis=1)

    def bootstrap_batch(self, cts, lut: Lut) -> list[LweCiphertext]:
        params = cts[0].params
        n, q = self.n, self.q
        B = len(cts)
        raw = np.zeros((B, self.k + 1), dtype=np.int64)
        for idx, ct in enumerate(cts):
            raw[idx, :-1] = ct.a
            raw[idx, -1] = ct.b
        centered = ((raw + params.q // 2) % params.q) - params.q // 2
        switched = ((2 * centered * 2 * n + params.q) // (2 * params.q)) % (2 * n)
        switched[:, -1] = (switched[:, -1] + lut.block // 2) % (2 * n)
        scaled_lut = np.array([int(c) * (q // params.t) % q for c in lut.poly.coeffs],
                              dtype=np.int64)
        acc = self.blind_rotate_batch(self._center(scaled_lut),
                                      switched[:, :-1], switched[:, -1])
        out = self.extract_and_keyswitch(acc)
        return [LweCiphertext(params, out[i, :-1], int(out[i, -1]))
                for i in range(B)]


def get_engine(bsk: BootstrapKey) -> FastEngine | None:
    """The FFT engine when parameters allow it, else None."""
    pbk = bsk.glwe_params
    q = pbk.q
    power_of_two = q & (q - 1) == 0
    if power_of_two and pbk.n >= 64 and pbk.k == 1:
        if not hasattr(bsk, "_engine_cache"):
            object.__setattr__(bsk, "_engine_cache", FastEngine(bsk))
        return bsk._engine_cache
    return None


# ---------------------------------------------------------------------------
# LWE ciphertext-to-ciphertext multiplication (tensor method)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LweRelinKeys:
    """Ladders of LWE encryptions of s tensor s at the raised modulus Q."""

    gadget: GadgetSpec
    rows: tuple      # k*k entries, each a tuple of LweCiphertexts
    params_q: LweParams   # raised modulus


def make_lwe_relin_keys(sk: LweSecretKey, seed: bytes) -> LweRelinKeys:
    p = sk.params
    Q = p.q * p.delta
    params_q = LweParams(p.k, Q, p.t, p.sampler)
    sk_q = LweSecretKey(params_q, sk.s)
    gadget = GadgetSpec.powers(1 << 8, Q)
    rows = []
    for i in range(p.k):
        for j in range(p.k):
            val = int(sk.s[i]) * int(sk.s[j])
            levels = tuple(
                lwe_encrypt(val * g % Q, sk_q, seed + b"|rl%d_%d_%d" % (i, j, lev))
                for lev, g in enumerate(gadget.gadget))
            rows.append(levels)
    return LweRelinKeys(gadget, tuple(rows), params_q)


def lwe_tensor_mul(ct1: LweCiphertext, ct2: LweCiphertext,
                   relin: LweRelinKeys) -> LweCiphertext:
    """Multiply two LWE ciphertexts via mod-raise / tensor / relinearize /
    rescale; the output decrypts to Delta * m1 * m2 mod q."""
    p = ct1.params
    _check(p, ct2.params)
    Q = relin.params_q.q
    k = p.k
    a1 = np.array([centered_reduce(int(x), p.q) for x in ct1.a], dtype=object)
    a2 = np.array([centered_reduce(int(x), p.q) for x in ct2.a], dtype=object)
    b1 = centered_reduce(ct1.b, p.q)
    b2 = centered_reduce(ct2.b, p.q)
    d0 = b1 * b2 % Q
    d1 = (b2 * a1 + b1 * a2) % Q
    d2 = np.outer(a1, a2).reshape(-1) % Q
    out_a = d1.copy()
    out_b = d0
    # phase = d0 - d1 s + d2 (s x s); relinearization adds the quadratic part
    for val, levels in zip(d2, relin.rows):
        digits = decompose_scalar(int(val), relin.gadget)
        for d, level in zip(digits, levels):
            if d:
                out_a = (out_a + int(d) * np.array(
                    [int(x) for x in level.a], dtype=object)) % Q
                out_b = (out_b + int(d) * level.b) % Q
    # rescale Q -> q
    res_a = np.array([round_half_up_ratio(centered_reduce(int(x), Q), p.delta) % p.q
                      for x in out_a], dtype=np.int64)
    res_b = round_half_up_ratio(centered_reduce(int(out_b), Q), p.delta) % p.q
    return LweCiphertext(p, res_a, int(res_b))
