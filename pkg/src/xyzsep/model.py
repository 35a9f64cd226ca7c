"""XYZ spin arrays in a transverse field.

    H = sum_i b_i s^z_i - 1/2 sum_{i,j} (vx_ij s^x_i s^x_j + vy_ij s^y_i s^y_j + vz_ij s^z_i s^z_j)

with symmetric coupling matrices.  Each unordered pair i<j enters once with
weight -1; diagonal (self-energy) terms enter with weight -1/2 and are only
admitted for s_i >= 1.

The Hamiltonian is real in the standard basis, since the xx+yy part is

    v+ (s^+_i s^-_j + s^-_i s^+_j) + v- (s^+_i s^+_j + s^-_i s^-_j),  v+- = (vx +- vy)/4
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .spin import HilbertSpace, ladder_coefficients, spin_operators

DENSE_CAP = 4096
AXES = ("vx", "vy", "vz")


@dataclass(frozen=True)
class ModelSpec:
    """Spins (as 2s), couplings ``vx, vy, vz`` (n x n) and fields ``b`` (n)."""

    twice_s: tuple[int, ...]
    vx: np.ndarray
    vy: np.ndarray
    vz: np.ndarray
    b: np.ndarray
    space: HilbertSpace = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        twice_s = tuple(int(t) for t in self.twice_s)
        n = len(twice_s)
        object.__setattr__(self, "twice_s", twice_s)
        for name in AXES:
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (n, n):
                raise ValueError(f"{name} must have shape {(n, n)}, got {m.shape}")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        b = np.array(self.b, dtype=float)
        if b.shape != (n,):
            raise ValueError(f"b must have shape {(n,)}, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "space", HilbertSpace.from_spins(twice_s))

    @property
    def n(self) -> int:
        return len(self.twice_s)

    @property
    def spins(self) -> np.ndarray:
        return np.array(self.twice_s) / 2.0

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def with_fields(self, b) -> "ModelSpec":
        return replace(self, b=np.asarray(b, dtype=float))

    def with_couplings(self, **kw) -> "ModelSpec":
        return replace(self, **{k: np.asarray(v, dtype=float) for k, v in kw.items()})


@dataclass(frozen=True)
class Violation:
    kind: str  # "symmetry" | "self_energy" | "non_finite"
    axis: str
    sites: tuple[int, ...]
    message: str


def validate(spec: ModelSpec) -> list[Violation]:
    """Structured list of invariant violations; empty when the spec is valid."""
    out = []
    for name in AXES:
        m = getattr(spec, name)
        bad = ~np.isfinite(m)
        for i, j in zip(*np.nonzero(bad)):
            out.append(Violation("non_finite", name, (int(i), int(j)), f"{name}[{i},{j}] is not finite"))
        for i in range(spec.n):
            for j in range(i + 1, spec.n):
                if bad[i, j] or bad[j, i]:
                    continue
                if m[i, j] != m[j, i]:
                    out.append(
                        Violation(
                            "symmetry", name, (i, j), f"{name}[{i},{j}]={m[i, j]!r} != {name}[{j},{i}]={m[j, i]!r}"
                        )
                    )
        for i in range(spec.n):
            if spec.twice_s[i] < 2 and m[i, i] != 0:
                out.append(
                    Violation("self_energy", name, (i,), f"{name}[{i},{i}]={m[i, i]!r} on a spin-1/2 site")
                )
    for i in np.nonzero(~np.isfinite(spec.b))[0]:
        out.append(Violation("non_finite", "b", (int(i),), f"b[{i}] is not finite"))
    return out


# ---------------------------------------------------------------------------
# matrix-free action


def _site_view(psi: np.ndarray, dims, i: int) -> np.ndarray:
    left = int(np.prod(dims[:i], dtype=np.int64))
    return psi.reshape(left, dims[i], -1)


def _pair_view(psi: np.ndarray, dims, i: int, j: int) -> np.ndarray:
    left = int(np.prod(dims[:i], dtype=np.int64))
    mid = int(np.prod(dims[i + 1 : j], dtype=np.int64))
    return psi.reshape(left, dims[i], mid, dims[j], -1)


class HamiltonianAction:
    """Precomputed data for repeated matrix-free products H @ psi.

    The diagonal (fields and zz terms) is cached as a vector; xx/yy pair terms
    are applied as ladder-operator slices on a five-index view of the state.
    """

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.dims = spec.space.local_dims
        self.dim = spec.dim
        n = spec.n
        s = spec.spins
        self._coef = [ladder_coefficients(t) for t in spec.twice_s]

        # diagonal: sum_i b_i m_i - sum_{i<j} vz_ij m_i m_j - 1/2 sum_i vz_ii m_i^2
        diag = np.zeros(self.dims)
        mz = []
        for i, d in enumerate(self.dims):
            shape = [1] * n
            shape[i] = d
            mz.append((np.arange(d) - s[i]).reshape(shape))
        for i in range(n):
            if spec.b[i] != 0:
                diag = diag + spec.b[i] * mz[i]
            if spec.vz[i, i] != 0:
                diag = diag - 0.5 * spec.vz[i, i] * mz[i] ** 2
            for j in range(i + 1, n):
                if spec.vz[i, j] != 0:
                    diag = diag - spec.vz[i, j] * (mz[i] * mz[j])
        self.diag = np.ascontiguousarray(diag).ravel()

        self.pairs = []
        for i in range(n):
            for j in range(i + 1, n):
                vp = 0.25 * (spec.vx[i, j] + spec.vy[i, j])
                vm = 0.25 * (spec.vx[i, j] - spec.vy[i, j])
                if vp != 0 or vm != 0:
                    self.pairs.append((i, j, -vp, -vm, np.outer(self._coef[i], self._coef[j])))

        # self-energy: -1/2 (vx (s^x)^2 + vy (s^y)^2), a real local matrix
        self.local = []
        for i in range(n):
            if spec.vx[i, i] != 0 or spec.vy[i, i] != 0:
                ops = spin_operators(spec.twice_s[i])
                m = -0.5 * (spec.vx[i, i] * (ops["sx"] @ ops["sx"]) + spec.vy[i, i] * (ops["sy"] @ ops["sy"]).real)
                self.local.append((i, m))

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.ndim not in (1, 2) or psi.shape[0] != self.dim:
            raise ValueError(f"state has shape {psi.shape}, expected ({self.dim},) or ({self.dim}, k)")
        # a trailing column axis is carried along in the last reshaped index
        out = (self.diag if psi.ndim == 1 else self.diag[:, None]) * psi
        dims = self.dims
        for i, j, wp, wm, cc in self.pairs:
            x = _pair_view(psi, dims, i, j)
            y = _pair_view(out, dims, i, j)
            c = cc[None, :, None, :, None]
            if wp != 0:
                # s+_i s-_j and s-_i s+_j
                y[:, 1:, :, :-1, :] += wp * c * x[:, :-1, :, 1:, :]
                y[:, :-1, :, 1:, :] += wp * c * x[:, 1:, :, :-1, :]
            if wm != 0:
                y[:, 1:, :, 1:, :] += wm * c * x[:, :-1, :, :-1, :]
                y[:, :-1, :, :-1, :] += wm * c * x[:, 1:, :, 1:, :]
        for i, m in self.local:
            x = _site_view(psi, dims, i)
            y = _site_view(out, dims, i)
            y += np.einsum("ab,lbr->lar", m, x)
        return out


def apply_h(spec: ModelSpec, psi: np.ndarray) -> np.ndarray:
    """H @ psi without forming H.  Build a ``HamiltonianAction`` for repeated use."""
    return HamiltonianAction(spec)(psi)


def dense_h(spec: ModelSpec, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense real symmetric H, obtained by acting on every basis vector."""
    if spec.dim > cap:
        raise ValueError(f"total dimension {spec.dim} exceeds dense cap {cap}")
    return HamiltonianAction(spec)(np.eye(spec.dim))


def parity_sector(space: HilbertSpace, parity: int) -> np.ndarray:
    """Sorted basis indices whose z-parity equals ``parity`` (+1 or -1)."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    return np.nonzero(space.parity_signs() == parity)[0]


# ---------------------------------------------------------------------------
# helpers for building common geometries


def chain_couplings(n: int, value: float, topology: str = "open") -> np.ndarray:
    """First-neighbour coupling matrix for a 1D chain."""
    if topology not in ("open", "cyclic"):
        raise ValueError(f"unknown topology {topology!r}")
    m = np.zeros((n, n))
    for i in range(n - 1):
        m[i, i + 1] = m[i + 1, i] = value
    if topology == "cyclic" and n > 2:
        m[0, n - 1] = m[n - 1, 0] = value
    return m


# ---------------------------------------------------------------------------
# flat text format: "spin i 2s", "field i value", "vx i j value" (vy, vz alike)


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps(spec: ModelSpec) -> str:
    lines = [f"spin {i} {t}" for i, t in enumerate(spec.twice_s)]
    lines += [f"field {i} {_fmt(v)}" for i, v in enumerate(spec.b) if v != 0]
    for name in AXES:
        m = getattr(spec, name)
        for i, j in zip(*np.nonzero(m)):
            lines.append(f"{name} {i} {j} {_fmt(m[i, j])}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ModelSpec:
    """Parse the flat text format.  Entries are taken literally (no implied
    symmetrization); unspecified entries are zero.  ``#`` starts a comment."""
    spins: dict[int, int] = {}
    fields: dict[int, float] = {}
    couplings: dict[str, dict[tuple[int, int], float]] = {a: {} for a in AXES}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key = tok[0]
        try:
            if key == "spin" and len(tok) == 3:
                i, t = int(tok[1]), int(tok[2])
                if i in spins:
                    raise ValueError(f"duplicate spin for site {i}")
                spins[i] = t
            elif key == "field" and len(tok) == 3:
                i = int(tok[1])
                if i in fields:
                    raise ValueError(f"duplicate field for site {i}")
                fields[i] = float(tok[2])
            elif key in AXES and len(tok) == 4:
                ij = (int(tok[1]), int(tok[2]))
                if ij in couplings[key]:
                    raise ValueError(f"duplicate {key} entry {ij}")
                couplings[key][ij] = float(tok[3])
            else:
                raise ValueError(f"unrecognised record {line!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    n = len(spins)
    if sorted(spins) != list(range(n)):
        raise ValueError(f"spin records must cover sites 0..{n - 1} exactly, got {sorted(spins)}")
    mats = {a: np.zeros((n, n)) for a in AXES}
    for a, entries in couplings.items():
        for (i, j), v in entries.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"{a} entry ({i},{j}) outside 0..{n - 1}")
            mats[a][i, j] = v
    b = np.zeros(n)
    for i, v in fields.items():
        if not 0 <= i < n:
            raise ValueError(f"field site {i} outside 0..{n - 1}")
        b[i] = v
    return ModelSpec(tuple(spins[i] for i in range(n)), mats["vx"], mats["vy"], mats["vz"], b)


def load(path) -> ModelSpec:
    return loads(Path(path).read_text())


def save(spec: ModelSpec, path) -> None:
    Path(path).write_text(dumps(spec))


def check_dimension(spec: ModelSpec, budget: int) -> None:
    if spec.dim > budget:
        raise MemoryError(f"total dimension {spec.dim} exceeds budget {budget} (2^{math.log2(budget):.0f})")
