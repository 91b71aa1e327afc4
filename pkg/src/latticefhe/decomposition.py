"""Radix and gadget decomposition of scalars and ring elements.

Digits use the balanced (centered) convention -beta/2 < d <= beta/2,
which halves worst-case key-switching noise versus unsigned digits while
preserving every recomposition identity.  For beta = 2 the balanced
range degenerates to {0, 1}.

Two gadget families are provided:

* ``GadgetSpec.classic(beta, ell, q)``: g_i = q / beta^i (most
  significant digit first).  Requires beta^ell | q.  Recomposition is
  lossless when beta^ell == q, otherwise approximate with error at most
  q / (2 beta^ell) (the dropped tail is rounded to nearest).
* ``GadgetSpec.powers(beta, q)``: g_i = beta^(i-1) (least significant
  first), always exact for any q; used for relinearization and key
  switching over moduli that no power of beta divides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modular import centered_reduce, round_half_up_ratio
from .ring import RingPoly


class LengthMismatch(ValueError):
    """Digit count does not match the gadget level."""


class InexactGadget(ValueError):
    """The classic gadget needs beta^ell to divide q."""


@dataclass(frozen=True)
class GadgetSpec:
    beta: int
    ell: int
    q: int
    gadget: tuple
    exact: bool
    kind: str  # "classic" or "powers"

    @classmethod
    def classic(cls, beta: int, ell: int, q: int) -> "GadgetSpec":
        if beta < 2 or ell < 1:
            raise ValueError(f"need beta >= 2 and ell >= 1, got {beta}, {ell}")
        if q % beta**ell:
            raise InexactGadget(f"beta^ell = {beta**ell} does not divide q = {q}")
        gadget = tuple(q // beta**i for i in range(1, ell + 1))
        return cls(beta=beta, ell=ell, q=q, gadget=gadget,
                   exact=(beta**ell == q), kind="classic")

    @classmethod
    def powers(cls, beta: int, q: int) -> "GadgetSpec":
        if beta < 2:
            raise ValueError(f"need beta >= 2, got {beta}")
        ell = max(1, math.ceil(math.log(q, beta))) + 1
        gadget = tuple(beta**i for i in range(ell))
        return cls(beta=beta, ell=ell, q=q, gadget=gadget,
                   exact=True, kind="powers")


def _balanced_digits(v: int, beta: int, ell: int) -> list[int]:
    """ell balanced digits, least significant first; final carry dropped.

    sum(d_i * beta^i) = v modulo beta^ell, with each -beta/2 < d_i <= beta/2.
    """
    half_up = beta // 2 - 1  # digits land in [-(beta/2 - 1), beta/2]
    digits = []
    w = v
    for _ in range(ell):
        r = ((w + half_up) % beta) - half_up
        digits.append(r)
        w = (w - r) // beta
    return digits


def decompose_scalar(gamma: int, spec: GadgetSpec) -> tuple:
    """Digit vector (gamma_1..gamma_ell) with <digits, gadget> = gamma
    (mod q when lossless; within q/(2 beta^ell) for approximate specs)."""
    beta, ell, q = spec.beta, spec.ell, spec.q
    if spec.kind == "classic":
        g_last = spec.gadget[-1]
        v = round_half_up_ratio(centered_reduce(gamma, q), g_last)
        v = centered_reduce(v, beta**ell)
        lsb = _balanced_digits(v, beta, ell)
        return tuple(reversed(lsb))
    # powers gadget: digits of the centered representative, exact over Z.
    v = centered_reduce(gamma, q)
    return tuple(_balanced_digits(v, beta, ell))


def decompose_poly(f: RingPoly, spec: GadgetSpec) -> tuple:
    """Coefficient-wise decomposition into ell ring elements."""
    n = f.params.n
    cols = [decompose_scalar(int(c), spec) for c in f.coeffs]
    out = []
    for i in range(spec.ell):
        out.append(RingPoly(f.params, [cols[j][i] for j in range(n)]))
    return tuple(out)


def gadget_recompose(digits, spec: GadgetSpec):
    """Inner product of a digit vector with the gadget vector, mod q.

    Accepts scalar digit tuples or RingPoly tuples.
    """
    if len(digits) != spec.ell:
        raise LengthMismatch(f"expected {spec.ell} digits, got {len(digits)}")
    if digits and isinstance(digits[0], RingPoly):
        params = digits[0].params
        acc = np.zeros(params.n, dtype=object)
        for d, g in zip(digits, spec.gadget):
            acc = acc + d.coeffs * g
        return RingPoly(params, acc % spec.q)
    return sum(int(d) * g for d, g in zip(digits, spec.gadget)) % spec.q


def recompose_error(gamma: int, spec: GadgetSpec) -> int:
    """Centered difference between gamma and its recomposition."""
    rec = gadget_recompose(decompose_scalar(gamma, spec), spec)
    return centered_reduce(rec - gamma, spec.q)
