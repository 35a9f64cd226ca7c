"""Factorization and entanglement side limits in XYZ spin arrays."""

from .model import ModelSpec, apply_h, dense_h, parity_sector, validate
from .spin import HilbertSpace, coherent_local, parity_sign, rotation_y, spin_operators

__all__ = [
    "HilbertSpace",
    "ModelSpec",
    "apply_h",
    "coherent_local",
    "dense_h",
    "parity_sector",
    "parity_sign",
    "rotation_y",
    "spin_operators",
    "validate",
]
__version__ = "0.1.0"
