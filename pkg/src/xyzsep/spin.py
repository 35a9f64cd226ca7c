"""Local spin-s operators, coherent states and mixed-radix basis indexing.

Spins are labelled by ``twice_s`` (an integer 2s >= 1) so that half-integer
values never appear as floats.  The local basis is ``|k>``, k = 0..2s, with
``s^z |k> = (k - s) |k>``; ``|0>`` is the minimum-weight state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import expm


def _check_twice_s(twice_s: int) -> int:
    if int(twice_s) != twice_s or twice_s < 1:
        raise ValueError(f"twice_s must be a positive integer, got {twice_s!r}")
    return int(twice_s)


def ladder_coefficients(twice_s: int) -> np.ndarray:
    """Matrix elements <k+1|s^+|k> = sqrt((k+1)(2s-k)) for k = 0..2s-1."""
    k = np.arange(twice_s, dtype=float)
    return np.sqrt((k + 1.0) * (twice_s - k))


def spin_operators(twice_s: int) -> dict[str, np.ndarray]:
    """Return ``sz, splus, sminus, sx, sy`` for a spin with 2s = ``twice_s``.

    Everything is real except ``sy``.
    """
    twice_s = _check_twice_s(twice_s)
    d = twice_s + 1
    sz = np.diag(np.arange(d) - twice_s / 2.0)
    splus = np.zeros((d, d))
    splus[np.arange(1, d), np.arange(d - 1)] = ladder_coefficients(twice_s)
    sminus = splus.T.copy()
    sx = 0.5 * (splus + sminus)
    sy = (splus - sminus) / 2j
    return {"sz": sz, "splus": splus, "sminus": sminus, "sx": sx, "sy": sy}


def rotation_y(twice_s: int, theta: float) -> np.ndarray:
    """Real orthogonal matrix exp(i theta s^y)."""
    twice_s = _check_twice_s(twice_s)
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    ops = spin_operators(twice_s)
    # i*s^y = (s^+ - s^-)/2 is real antisymmetric
    gen = 0.5 * (ops["splus"] - ops["sminus"])
    return expm(theta * gen)


def coherent_local(twice_s: int, theta: float) -> np.ndarray:
    """Rotated minimum-weight state exp(i theta s^y)|0> in the |k> basis."""
    twice_s = _check_twice_s(twice_s)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array(
        [np.sqrt(comb(twice_s, k)) * c ** (twice_s - k) * s**k for k in range(twice_s + 1)]
    )


def parity_sign(digits) -> int:
    """Eigenvalue (-1)^(sum k_i) of the z-parity on a basis product state."""
    return -1 if int(np.sum(digits)) % 2 else 1


@dataclass(frozen=True)
class HilbertSpace:
    """Mixed-radix product basis; site 0 is the slowest-varying digit."""

    local_dims: tuple[int, ...]
    total_dim: int = field(init=False)
    strides: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        if not dims or min(dims) < 2:
            raise ValueError("every local dimension must be >= 2")
        strides = [1] * len(dims)
        for i in range(len(dims) - 2, -1, -1):
            strides[i] = strides[i + 1] * dims[i + 1]
        object.__setattr__(self, "local_dims", dims)
        object.__setattr__(self, "strides", tuple(strides))
        object.__setattr__(self, "total_dim", int(np.prod(dims, dtype=object)))

    @classmethod
    def from_spins(cls, twice_spins) -> "HilbertSpace":
        return cls(tuple(_check_twice_s(t) + 1 for t in twice_spins))

    @property
    def n(self) -> int:
        return len(self.local_dims)

    def encode(self, digits) -> int:
        digits = tuple(int(k) for k in digits)
        if len(digits) != self.n or any(not 0 <= k < d for k, d in zip(digits, self.local_dims)):
            raise ValueError(f"digits {digits} outside local dimensions {self.local_dims}")
        return sum(k * st for k, st in zip(digits, self.strides))

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total_dim:
            raise ValueError(f"index {index} outside [0, {self.total_dim})")
        out = []
        for st, d in zip(self.strides, self.local_dims):
            out.append((index // st) % d)
        return tuple(out)

    def digits(self) -> np.ndarray:
        """All basis digit strings as a (total_dim, n) integer array."""
        grids = np.indices(self.local_dims).reshape(self.n, -1)
        return grids.T.copy()

    def parity_signs(self) -> np.ndarray:
        """Vector of (-1)^(sum k) over the whole basis."""
        ksum = np.zeros(self.local_dims, dtype=np.int64)
        for i, d in enumerate(self.local_dims):
            shape = [1] * self.n
            shape[i] = d
            ksum = ksum + np.arange(d).reshape(shape)
        return np.where(ksum.ravel() % 2, -1, 1).astype(np.int8)


def product_state(vectors) -> np.ndarray:
    """Kronecker product of local vectors in site order."""
    out = np.ones(1)
    for v in vectors:
        out = np.kron(out, v)
    return out
