"""Desk-scale lattice FHE library.

Negacyclic ring arithmetic over arbitrary-precision moduli, the
LWE/RLWE/GLWE cryptosystem family, and the TFHE, BFV, CKKS, and BGV
schemes with their homomorphic operations, key switching, slot rotation,
modulus management, RNS primitives, and TFHE gate bootstrapping.

Everything is sized for a desk: parameters small enough to verify against
brute-force oracles, with no claim of production security.
"""

from . import modular
from . import ring
from . import transform
from . import decomposition
from . import glwe

__version__ = "0.1.0"

__all__ = [
    "modular",
    "ring",
    "transform",
    "decomposition",
    "rns",
    "glwe",
    "tfhe",
    "bfv",
    "ckks",
    "bgv",
    "presets",
    "serialize",
]
