"""JSON serialization for keys, ciphertexts, and slot payloads.

Big integers travel as base-10 strings.  A polynomial is
``{"n": ..., "q": "...", "coeffs": ["...", ...]}`` with index 0 the
constant term.  Ciphertexts carry a params header
``{"scheme", "k", "n", "q"|"chain", "t", "delta", "sign"}``; a mask
expanded from a stored seed serializes compressed as
``"mask": "seed:<hex>"``.  Complex slot vectors serialize as
``[re, im]`` pairs.  RNS ciphertexts list residue polynomials under a
base header.
"""

from __future__ import annotations

import json

import numpy as np

from .modular import ModContext
from .ring import RingParams, RingPoly, NoiseSampler
from . import glwe as G


def poly_to_json(p: RingPoly) -> dict:
    return {"n": p.params.n, "q": str(p.params.modulus),
            "coeffs": [str(int(c)) for c in p.coeffs]}


def poly_from_json(obj: dict) -> RingPoly:
    params = RingParams(int(obj["n"]), ModContext(int(obj["q"])))
    return RingPoly(params, [int(c) for c in obj["coeffs"]])


def params_header(params: G.GlweParams, scheme: str,
                  chain: tuple | None = None) -> dict:
    head = {"scheme": scheme, "k": params.k, "n": params.n,
            "t": params.t, "delta": str(params.delta),
            "sign": params.sign_convention,
            "sigma": params.sampler.sigma}
    if chain is not None:
        head["chain"] = [str(w) for w in chain]
    else:
        head["q"] = str(params.q)
    return head


def params_from_header(head: dict) -> G.GlweParams:
    if "chain" in head:
        q = 1
        for w in head["chain"]:
            q *= int(w)
    else:
        q = int(head["q"])
    return G.GlweParams(k=int(head["k"]),
                        ring=RingParams(int(head["n"]), ModContext(q)),
                        t=int(head["t"]), delta=int(head["delta"]),
                        sign_convention=head["sign"],
                        sampler=NoiseSampler(float(head.get("sigma", 3.2))))


def ciphertext_to_json(ct: G.GlweCiphertext, scheme: str = "glwe",
                       compress_seed: bool = True,
                       chain: tuple | None = None) -> dict:
    obj = {"params": params_header(ct.params, scheme, chain),
           "body": poly_to_json(ct.body)}
    if compress_seed and ct.seed is not None:
        obj["mask"] = "seed:" + ct.seed.hex()
    else:
        obj["mask"] = [poly_to_json(a) for a in ct.masks]
    return obj


def ciphertext_from_json(obj: dict) -> G.GlweCiphertext:
    params = params_from_header(obj["params"])
    body = poly_from_json(obj["body"])
    mask = obj["mask"]
    if isinstance(mask, str) and mask.startswith("seed:"):
        seed = bytes.fromhex(mask[5:])
        masks = G._expand_masks(params, seed)
        return G.GlweCiphertext(params, masks, body, seed=seed)
    masks = tuple(poly_from_json(a) for a in mask)
    return G.GlweCiphertext(params, masks, body)


def secret_key_to_json(sk: G.GlweSecretKey, scheme: str = "glwe",
                       chain: tuple | None = None) -> dict:
    return {"params": params_header(sk.params, scheme, chain),
            "polys": [poly_to_json(p) for p in sk.polys]}


def secret_key_from_json(obj: dict) -> G.GlweSecretKey:
    params = params_from_header(obj["params"])
    return G.GlweSecretKey(params, tuple(poly_from_json(p)
                                         for p in obj["polys"]))


def slots_to_json(v) -> list:
    """Complex slot vectors as [re, im] pairs; integers stay integers."""
    out = []
    for x in np.asarray(v).tolist():
        if isinstance(x, complex):
            out.append([x.real, x.imag])
        else:
            out.append(x)
    return out


def slots_from_json(items, complex_slots: bool = False):
    if complex_slots:
        return np.array([complex(re, im) for re, im in items])
    return [int(x) for x in items]


def rns_ciphertext_to_json(residue_cts: list, moduli: tuple,
                           scheme: str = "rns") -> dict:
    """Residue polynomials per modulus under a base header."""
    return {"scheme": scheme,
            "base": [str(m) for m in moduli],
            "residues": [[poly_to_json(p) for p in polys]
                         for polys in residue_cts]}


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def loads(text: str) -> dict:
    return json.loads(text)
