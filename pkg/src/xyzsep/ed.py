"""Exact-diagonalization ground truth.

Sector ground states come from a Lanczos recursion with full
reorthogonalization run on the compressed index set of one parity sector;
the dense path (``full_spectrum``) is only an oracle for small systems.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import DENSE_CAP, HamiltonianAction, ModelSpec, dense_h, parity_sector
from .spin import HilbertSpace

log = logging.getLogger(__name__)

MEMORY_BUDGET = 1 << 24


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class SectorGroundState:
    parity: int
    energy: float
    vector: np.ndarray
    residual: float
    gap: float  # distance to the next Ritz value in the sector
    near_degenerate: bool
    iterations: int


@dataclass(frozen=True)
class ReducedDensity:
    sites: tuple[int, ...]
    dims: tuple[int, ...]
    matrix: np.ndarray


def lanczos_lowest(matvec, v0, tol=1e-10, max_iter=2000, krylov_dim=250):
    """Lowest eigenpair of a real symmetric operator.

    Restarts from the current Ritz vector whenever the Krylov basis reaches
    ``krylov_dim`` vectors.  Returns (energy, vector, residual, second_ritz, matvecs).
    """
    v = np.asarray(v0, dtype=float)
    v = v / np.linalg.norm(v)
    dim = v.size
    used = 0
    best = (None, v, np.inf, np.inf)
    while used < max_iter:
        m_max = min(krylov_dim, dim, max_iter - used)
        V = np.empty((m_max, dim))
        alpha = np.empty(m_max)
        beta = np.empty(m_max)
        V[0] = v
        m = 0
        theta = y = None
        for m in range(m_max):
            w = matvec(V[m])
            used += 1
            alpha[m] = V[m] @ w
            # two passes of classical Gram-Schmidt against the whole basis
            w -= V[: m + 1].T @ (V[: m + 1] @ w)
            w -= V[: m + 1].T @ (V[: m + 1] @ w)
            beta[m] = np.linalg.norm(w)
            k = m + 1
            if k == 1:
                theta, y = np.array([alpha[0]]), np.ones((1, 1))
            else:
                theta, y = eigh_tridiagonal(alpha[:k], beta[: k - 1], select="i", select_range=(0, min(1, k - 1)))
            est = abs(beta[m] * y[-1, 0])
            breakdown = beta[m] <= 1e-13 * max(1.0, abs(theta[0]))
            if est < 0.1 * tol or breakdown or m == m_max - 1:
                break
            V[m + 1] = w / beta[m]
        k = m + 1
        ritz = y[:, 0] @ V[:k]
        ritz /= np.linalg.norm(ritz)
        hr = matvec(ritz)
        used += 1
        energy = float(ritz @ hr)
        res = float(np.linalg.norm(hr - energy * ritz))
        second = float(theta[1]) if len(theta) > 1 else np.inf
        if res < best[2]:
            best = (energy, ritz, res, second)
        if res <= tol:
            return energy, ritz, res, second, used
        if k >= dim:
            # Krylov space exhausted; rounding-limited
            return energy, ritz, res, second, used
        v = ritz
    raise ConvergenceError(
        f"Lanczos did not reach residual {tol:g} in {max_iter} matvecs (best {best[2]:.3g})", residual=best[2]
    )


def _sector_matvec(act: HamiltonianAction, idx: np.ndarray):
    full = np.zeros(act.dim)

    def mv(x):
        full[idx] = x
        return act(full)[idx]

    return mv


def ground_state(spec: ModelSpec, parity: int, tol=1e-10, max_iter=3000, seed=0, budget=MEMORY_BUDGET,
                 krylov_dim=250, action: HamiltonianAction | None = None) -> SectorGroundState:
    """Lowest eigenpair of H in one parity sector."""
    if spec.dim > budget:
        raise MemoryError(f"total dimension {spec.dim} exceeds budget {budget}")
    idx = parity_sector(spec.space, parity)
    act = action or HamiltonianAction(spec)
    rng = np.random.default_rng(seed)
    v0 = rng.random(idx.size) + 0.5
    if idx.size == 1:
        e = float(act.diag[idx[0]])
        vec = np.zeros(spec.dim)
        vec[idx[0]] = 1.0
        res = float(np.linalg.norm(act(vec) - e * vec))
        return SectorGroundState(parity, e, vec, res, np.inf, False, 1)
    energy, x, res, second, used = lanczos_lowest(_sector_matvec(act, idx), v0, tol, max_iter, krylov_dim)
    vec = np.zeros(spec.dim)
    vec[idx] = x
    gap = second - energy
    near = gap < 10 * tol
    if near:
        log.warning("near-degenerate levels in parity %+d sector: gap %.3g", parity, gap)
    return SectorGroundState(parity, energy, vec, res, gap, near, used)


def sector_ground_states(spec: ModelSpec, **kw) -> dict[int, SectorGroundState]:
    act = HamiltonianAction(spec)
    return {p: ground_state(spec, p, action=act, **kw) for p in (1, -1)}


def full_spectrum(spec: ModelSpec, vectors=False, cap=DENSE_CAP):
    h = dense_h(spec, cap=cap)
    if vectors:
        return np.linalg.eigh(h)
    return np.linalg.eigvalsh(h)


def sector_spectrum(spec: ModelSpec, parity: int, cap=DENSE_CAP) -> np.ndarray:
    h = dense_h(spec, cap=cap)
    idx = parity_sector(spec.space, parity)
    return np.linalg.eigvalsh(h[np.ix_(idx, idx)])


# ---------------------------------------------------------------------------
# reduced densities and entanglement


def reduced_density(states, space: HilbertSpace, sites) -> ReducedDensity:
    """Partial trace of sum_k w_k |psi_k><psi_k| onto ``sites``.

    ``states`` is a list of (weight, vector) pairs or a single vector.
    """
    if isinstance(states, np.ndarray):
        states = [(1.0, states)]
    sites = tuple(int(i) for i in sites)
    if len(set(sites)) != len(sites) or any(not 0 <= i < space.n for i in sites):
        raise ValueError(f"bad site selection {sites} for {space.n} sites")
    rest = [i for i in range(space.n) if i not in sites]
    dims = tuple(space.local_dims[i] for i in sites)
    d_a = int(np.prod(dims))
    rho = np.zeros((d_a, d_a), dtype=complex)
    for w, psi in states:
        t = np.asarray(psi).reshape(space.local_dims)
        m = np.transpose(t, list(sites) + rest).reshape(d_a, -1)
        rho += w * (m @ m.conj().T)
    if not np.iscomplexobj(np.asarray(states[0][1])):
        rho = rho.real
    return ReducedDensity(sites, dims, rho)


def partial_transpose(rho: np.ndarray, dims, transposed) -> np.ndarray:
    """Transpose the factors listed in ``transposed`` (positions within ``dims``)."""
    k = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    perm = list(range(2 * k))
    for a in transposed:
        perm[a], perm[a + k] = perm[a + k], perm[a]
    d = int(np.prod(dims))
    return t.transpose(perm).reshape(d, d)


def negativity(rho: ReducedDensity, split) -> float:
    """Negativity between the sites in ``split`` and the rest of ``rho.sites``.

    Computed both as the sum of negative eigenvalues of the partial transpose
    and as (trace norm - 1)/2 from its singular values; the two must agree.
    """
    pos = [rho.sites.index(i) for i in split]
    pt = partial_transpose(rho.matrix, rho.dims, pos)
    ev = np.linalg.eigvalsh(pt)
    neg = abs(float(ev[ev < 0].sum()))
    from_norm = 0.5 * (float(np.linalg.svd(pt, compute_uv=False).sum()) - 1.0)
    if abs(neg - from_norm) > 1e-10:
        raise ArithmeticError(f"negativity forms disagree: {neg} vs {from_norm} (is the trace 1?)")
    return neg


def entanglement_measures(rho) -> dict[str, float]:
    m = rho.matrix if isinstance(rho, ReducedDensity) else np.asarray(rho)
    lam = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    nz = lam[lam > 0]
    purity = float(np.sum(lam**2))
    return {
        "entropy_bits": float(-np.sum(nz * np.log2(nz))),
        "global_concurrence": float(np.sqrt(max(0.0, 2 * (1 - purity)))),
        "purity": purity,
    }


_SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)


def wootters_concurrence(rho) -> float:
    m = rho.matrix if isinstance(rho, ReducedDensity) else np.asarray(rho)
    if isinstance(rho, ReducedDensity) and rho.dims != (2, 2):
        raise ValueError(f"two-qubit density required, got dims {rho.dims}")
    if m.shape != (4, 4):
        raise ValueError(f"two-qubit density required, got shape {m.shape}")
    # sqrt eigenvalues of rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y) are the
    # singular values of sqrt(rho) (sigma_y x sigma_y) sqrt(rho)*; this avoids
    # square roots of round-off eigenvalues
    w, u = np.linalg.eigh(m)
    w = np.where(w > 1e-14, w, 0.0)
    root = (u * np.sqrt(w)) @ u.conj().T
    lam = np.linalg.svd(root @ _SIGMA_YY @ root.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def expectation_sz(state, space: HilbertSpace, site: int) -> float:
    p = np.abs(np.asarray(state).reshape(space.local_dims)) ** 2
    axes = tuple(a for a in range(space.n) if a != site)
    marg = p.sum(axis=axes)
    d = space.local_dims[site]
    return float(marg @ (np.arange(d) - (d - 1) / 2.0))


def total_magnetization(state, space: HilbertSpace) -> float:
    return sum(expectation_sz(state, space, i) for i in range(space.n))


# ---------------------------------------------------------------------------
# parity transitions


@dataclass(frozen=True)
class TransitionScan:
    grid: np.ndarray
    e_even: np.ndarray
    e_odd: np.ndarray
    crossings: list[float]
    parities: list[int]  # GS parity on each interval between crossings


def _gap(spec_template, scale, **kw) -> float:
    gs = sector_ground_states(spec_template(scale), **kw)
    return gs[1].energy - gs[-1].energy


def parity_transition_scan(spec_template, grid, rtol=1e-8, max_bisect=200, **kw) -> TransitionScan:
    """Locate even/odd ground-state crossings along a one-parameter family.

    ``spec_template(scale)`` returns the ModelSpec at a given field scale.
    Sign changes of E_even - E_odd on the grid are refined by bisection to
    relative width ``rtol``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    ee, eo = [], []
    for x in grid:
        gs = sector_ground_states(spec_template(x), **kw)
        ee.append(gs[1].energy)
        eo.append(gs[-1].energy)
    ee, eo = np.array(ee), np.array(eo)
    diff = ee - eo
    sgn = np.sign(diff)
    crossings = []
    k = 0
    while k < len(grid) - 1:
        if sgn[k] == 0:
            crossings.append(float(grid[k]))
            k += 1
            continue
        if sgn[k + 1] == 0:
            # an exact tie on the grid counts once, if the sign actually flips across it
            j = k + 1
            while j < len(grid) and sgn[j] == 0:
                j += 1
            if j == len(grid) or sgn[j] != sgn[k]:
                crossings.append(float(grid[k + 1]))
            k = j
            continue
        if sgn[k] != sgn[k + 1]:
            lo, hi, flo = grid[k], grid[k + 1], diff[k]
            for _ in range(max_bisect):
                if hi - lo <= rtol * abs(hi):
                    break
                mid = 0.5 * (lo + hi)
                fm = _gap(spec_template, mid, **kw)
                if fm == 0:
                    lo = hi = mid
                    break
                if np.sign(fm) == np.sign(flo):
                    lo, flo = mid, fm
                else:
                    hi = mid
            else:
                raise ConvergenceError(f"bisection did not converge near scale {grid[k]}")
            crossings.append(float(0.5 * (lo + hi)))
        k += 1
    # parity on each interval: ground state is the lower of the two
    bounds = [grid[0]] + crossings + [grid[-1]]
    parities = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        inside = np.nonzero((grid > a) & (grid < b) & (diff != 0))[0]
        d = diff[inside[0]] if inside.size else _gap(spec_template, 0.5 * (a + b), **kw)
        parities.append(1 if d < 0 else -1)
    return TransitionScan(grid, ee, eo, crossings, parities)
