"""Named parameter sets.

``toy`` presets reproduce the worked numeric instances exactly (tiny
rings, often noiseless); ``desk`` presets are the largest sizes the
test suite exercises routinely.  None of them target real security.
"""

from __future__ import annotations

from dataclasses import dataclass

from .modular import ModContext
from .ring import NoiseSampler, RingParams
from .decomposition import GadgetSpec
from . import glwe as G
from . import tfhe as T


@dataclass(frozen=True)
class TfheParams:
    lwe: T.LweParams
    glwe: G.GlweParams
    gadget: GadgetSpec
    ks_gadget: GadgetSpec


def tfhe_preset(name: str) -> TfheParams:
    if name == "toy":
        q = 64
        return TfheParams(
            lwe=T.LweParams(k=8, q=q, t=8, sampler=NoiseSampler(0)),
            glwe=G.GlweParams(k=1, ring=RingParams(16, ModContext(q)), t=8,
                              delta=q // 8, sign_convention="plus",
                              sampler=NoiseSampler(0), key_dist="binary"),
            gadget=GadgetSpec.classic(4, 3, q),
            ks_gadget=GadgetSpec.classic(4, 3, q))
    if name == "desk":
        q = 2**32
        return TfheParams(
            lwe=T.LweParams(k=630, q=q, t=8, sampler=NoiseSampler(2**17)),
            glwe=G.GlweParams(k=1, ring=RingParams(1024, ModContext(q)), t=8,
                              delta=q // 8, sign_convention="plus",
                              sampler=NoiseSampler(3.2), key_dist="binary"),
            gadget=GadgetSpec.classic(2**7, 3, q),
            ks_gadget=GadgetSpec.classic(2**8, 4, q))
    raise ValueError(f"unknown preset {name!r}")


@dataclass(frozen=True)
class BfvPreset:
    n: int
    q: int
    t: int
    sigma: float


def bfv_preset(name: str) -> BfvPreset:
    if name == "toy":
        # The published batching instance: n=4, t=17 (omega = 9).
        return BfvPreset(n=4, q=2**40, t=17, sigma=0.0)
    if name == "desk":
        return BfvPreset(n=16, q=2**60, t=97, sigma=3.2)
    raise ValueError(f"unknown preset {name!r}")


@dataclass(frozen=True)
class CkksPreset:
    n: int
    delta: int
    levels: int
    q0_bits: int
    sigma: float


def ckks_preset(name: str) -> CkksPreset:
    if name == "toy":
        return CkksPreset(n=4, delta=1024, levels=1, q0_bits=30, sigma=0.0)
    if name == "desk":
        return CkksPreset(n=64, delta=2**20, levels=4, q0_bits=40, sigma=3.2)
    raise ValueError(f"unknown preset {name!r}")


@dataclass(frozen=True)
class BgvPreset:
    n: int
    t: int
    levels: int
    w_bits: int
    sigma: float


def bgv_preset(name: str) -> BgvPreset:
    if name == "toy":
        return BgvPreset(n=8, t=17, levels=2, w_bits=22, sigma=0.0)
    if name == "desk":
        return BgvPreset(n=16, t=97, levels=3, w_bits=26, sigma=3.2)
    raise ValueError(f"unknown preset {name!r}")
