"""Separable parity-breaking eigenstates |Theta> = prod_i exp(i theta_i s^y_i)|0_i>.

Given vx, vz, spins and angles, ``derive_vy`` and ``derive_fields`` fix the
remaining couplings and fields so that |Theta> (and its parity partner
|-Theta>) are exact eigenstates with energy ``factorized_energy``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import ModelSpec, chain_couplings
from .spin import coherent_local, product_state

EPS_SIN = 1e-9
RATIO_RTOL = 1e-10


class NoSeparableSolution(ValueError):
    """The requested angle set / geometry admits no separable eigenstate."""


@dataclass(frozen=True)
class FieldProfile:
    b: np.ndarray
    free: np.ndarray  # sites where sin(theta_i) ~ 0: the field is unconstrained


@dataclass(frozen=True)
class FactorizedSolution:
    angles: np.ndarray
    energy: float
    gs_certified: bool
    overlap: float


def overlap(angles, twice_s) -> float:
    """<-Theta|Theta> = prod_i cos(theta_i)^(2 s_i)."""
    angles = np.asarray(angles, dtype=float)
    return float(np.prod(np.cos(angles) ** np.asarray(twice_s)))


def derive_vy(vx, vz, angles) -> np.ndarray:
    c, s = np.cos(angles), np.sin(angles)
    vx, vz = np.asarray(vx, float), np.asarray(vz, float)
    vy = vx * np.outer(c, c) + vz * np.outer(s, s)
    vy[(vx == 0) & (vz == 0)] = 0.0
    return 0.5 * (vy + vy.T)


def _field_rhs(vx, vz, angles, twice_s) -> np.ndarray:
    c, s = np.cos(angles), np.sin(angles)
    w = np.asarray(twice_s) / 2.0
    # weight (s_j - 1/2 delta_ij)
    weight = np.broadcast_to(w, vx.shape) - 0.5 * np.eye(len(w))
    terms = vx * np.outer(c, s) - vz * np.outer(s, c)
    return np.sum(weight * terms, axis=1)


def derive_fields(vx, vz, angles, twice_s, eps_sin: float = EPS_SIN, atol: float = 1e-10) -> FieldProfile:
    """Transverse fields making |Theta> stationary.

    Sites with |sin theta_i| <= eps_sin carry no constraint on b_i (returned
    as 0 and flagged free); their right-hand side must vanish.
    """
    angles = np.asarray(angles, dtype=float)
    vx, vz = np.asarray(vx, float), np.asarray(vz, float)
    rhs = _field_rhs(vx, vz, angles, twice_s)
    sin = np.sin(angles)
    free = np.abs(sin) <= eps_sin
    scale = 1.0 + np.abs(vx).sum(axis=1) + np.abs(vz).sum(axis=1)
    bad = free & (np.abs(rhs) > atol * scale)
    if bad.any():
        raise NoSeparableSolution(f"sites {np.nonzero(bad)[0].tolist()} have sin(theta)=0 but nonzero field constraint")
    b = np.where(free, 0.0, rhs / np.where(free, 1.0, sin))
    return FieldProfile(b=b, free=free)


def factorized_energy(spec: ModelSpec, angles) -> float:
    angles = np.asarray(angles, dtype=float)
    c, s = np.cos(angles), np.sin(angles)
    w = spec.spins
    weight = np.broadcast_to(w, (spec.n, spec.n)) - 0.5 * np.eye(spec.n)
    pair = spec.vx * np.outer(s, s) + spec.vz * np.outer(c, c)
    inner = spec.b * c + 0.5 * np.sum(weight * pair, axis=1)
    inner += 0.25 * (np.diag(spec.vx) + np.diag(spec.vy) + np.diag(spec.vz))
    return float(-np.sum(w * inner))


def complete_spec(twice_s, vx, vz, angles, b_free=None) -> ModelSpec:
    """ModelSpec with vy and b derived from the angles.

    ``b_free`` optionally supplies the (arbitrary) field on unconstrained sites.
    """
    fp = derive_fields(vx, vz, angles, twice_s)
    b = fp.b.copy()
    if b_free is not None:
        b[fp.free] = np.broadcast_to(np.asarray(b_free, float), b.shape)[fp.free]
    return ModelSpec(tuple(twice_s), vx, derive_vy(vx, vz, angles), vz, b)


def theta_state(twice_s, angles) -> np.ndarray:
    return product_state(coherent_local(t, a) for t, a in zip(twice_s, angles))


def eigen_residual(spec: ModelSpec, angles, budget: int = 1 << 24) -> float:
    """||H|Theta> - E|Theta>||, checked to coincide for the partner |-Theta>.

    Returns the larger of the two residuals; raises if the partner's
    residual differs from the first beyond rounding.
    """
    from .model import HamiltonianAction

    if spec.dim > budget:
        raise MemoryError(f"total dimension {spec.dim} exceeds budget {budget}")
    act = HamiltonianAction(spec)
    energy = factorized_energy(spec, angles)
    res = []
    for sign in (1.0, -1.0):
        psi = theta_state(spec.twice_s, sign * np.asarray(angles, float))
        res.append(float(np.linalg.norm(act(psi) - energy * psi)))
    tol = 1e-9 * (1.0 + abs(energy))
    if abs(res[0] - res[1]) > max(tol, 1e-3 * max(res)):
        raise AssertionError(f"partner residuals differ: {res}")
    return max(res)


def gs_certificate(spec: ModelSpec, angles) -> tuple[bool, str]:
    """Sufficient ground-state condition: |vy_ij| <= vx_ij for all i,j and
    theta_i in (0, pi)."""
    angles = np.asarray(angles, dtype=float)
    out = [i for i, a in enumerate(angles) if not 0.0 < a < np.pi]
    if out:
        return False, f"angles outside (0, pi) at sites {out}"
    bad = np.argwhere(np.abs(spec.vy) > spec.vx)
    bad = [(int(i), int(j)) for i, j in bad if i <= j]
    if bad:
        return False, f"|vy| > vx at pairs {bad}"
    return True, "certified"


def gauge_z(spec: ModelSpec, angles, sites) -> tuple[ModelSpec, np.ndarray]:
    """pi rotation about z on ``sites``: theta_i -> -theta_i, vx_ij, vy_ij -> -vx_ij, -vy_ij
    for pairs with exactly one flipped site.  The spectrum is unchanged."""
    flip = np.zeros(spec.n, bool)
    flip[list(sites)] = True
    sign = np.where(flip, -1.0, 1.0)
    m = np.outer(sign, sign)
    np.fill_diagonal(m, 1.0)
    angles = np.where(flip, -np.asarray(angles, float), angles)
    return spec.with_couplings(vx=spec.vx * m, vy=spec.vy * m), angles


def gauge_to_certifiable(spec: ModelSpec, angles) -> tuple[ModelSpec, np.ndarray]:
    """Flip every site with a negative angle (antiferromagnetic alternating case)."""
    return gauge_z(spec, angles, np.nonzero(np.asarray(angles) < 0)[0])


def canonicalize(spec: ModelSpec, angles) -> tuple[ModelSpec, np.ndarray]:
    """Bring angles to |theta_i| <= pi/2 with pi rotations about x.

    Such a rotation at site i maps theta_i -> pi - theta_i and flips the sign of
    b_i and of vy_ij, vz_ij (j != i), so the returned spec is unitarily equivalent.
    """
    a = np.angle(np.exp(1j * np.asarray(angles, float)))  # wrap to (-pi, pi]
    flip = np.abs(a) > np.pi / 2
    a = np.where(flip, np.sign(a) * np.pi - a, a)
    sign = np.where(flip, -1.0, 1.0)
    m = np.outer(sign, sign)
    np.fill_diagonal(m, 1.0)
    new = replace(spec, vy=spec.vy * m, vz=spec.vz * m, b=spec.b * sign)
    return new, a


def solve(spec: ModelSpec, angles) -> FactorizedSolution:
    ok, _ = gs_certificate(spec, angles)
    return FactorizedSolution(
        angles=np.asarray(angles, float),
        energy=factorized_energy(spec, angles),
        gs_certified=ok,
        overlap=overlap(angles, spec.twice_s),
    )


# ---------------------------------------------------------------------------
# special solutions


@dataclass(frozen=True)
class UniformSolution:
    theta: float
    vy: np.ndarray
    fields: FieldProfile
    energy: float


def uniform_solution(vx, vz, twice_s, chi=None, vy=None) -> UniformSolution:
    """Common-angle solution cos^2(theta) = chi.

    Either ``chi`` or ``vy`` must be given.  With ``vy``, every pair with
    vx != vz must share the ratio (vy - vz)/(vx - vz), and isotropic pairs
    (vx == vz) need vy == vx.
    """
    vx, vz = np.asarray(vx, float), np.asarray(vz, float)
    aniso = vx != vz
    if vy is not None:
        vy = np.asarray(vy, float)
        if np.any(vy[~aniso] != vx[~aniso]):
            raise NoSeparableSolution("isotropic pairs (vx == vz) require vy == vx")
        ratios = (vy[aniso] - vz[aniso]) / (vx[aniso] - vz[aniso])
        if ratios.size:
            r0 = ratios[0] if chi is None else chi
            if np.any(np.abs(ratios - r0) > RATIO_RTOL * max(1.0, abs(r0))):
                raise NoSeparableSolution(f"pairs carry mixed ratios {np.unique(ratios)}")
            chi = r0
        elif chi is None:
            chi = 1.0
    if chi is None:
        raise ValueError("give chi or vy")
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"chi={chi} outside [0, 1]")
    theta = float(np.arccos(np.sqrt(chi)))
    vy_full = np.where(aniso, vz + chi * (vx - vz), vx)
    n = len(twice_s)
    s = np.asarray(twice_s) / 2.0
    if abs(np.sin(theta)) <= EPS_SIN:
        fields = FieldProfile(b=np.zeros(n), free=np.ones(n, bool))
    else:
        weight = np.broadcast_to(s, (n, n)) - 0.5 * np.eye(n)
        b = np.cos(theta) * np.sum((vx - vz) * weight, axis=1)
        fields = FieldProfile(b=b, free=np.zeros(n, bool))
    energy = -0.5 * float(np.sum(s[:, None] * (s[None, :] * (vx + vy_full - vz) + np.diag(np.diag(vz)))))
    return UniformSolution(theta=theta, vy=vy_full, fields=fields, energy=energy)


@dataclass(frozen=True)
class AlternatingSolution:
    theta_o: float
    theta_e: float
    b_o: float
    b_e: float
    angles: np.ndarray
    fields: np.ndarray


def sublattice_odd(n: int) -> np.ndarray:
    """True on the 'odd' sublattice, i.e. sites 1, 3, 5... counted from 1."""
    return np.arange(n) % 2 == 0


def alternating_fields(n: int, b_o: float, b_e: float, topology: str = "open") -> np.ndarray:
    b = np.where(sublattice_odd(n), b_o, b_e).astype(float)
    if topology == "open":
        b[0] *= 0.5
        b[-1] *= 0.5
    return b


def alternating_solution(vx: float, vy: float, twice_s: int, n: int, topology="open", b_o=None, eta=None):
    """Two-angle solution of a first-neighbour XY chain (vz = 0) on the
    separability curve b_e * b_o = (2s)^2 vx vy."""
    if vx == 0:
        raise ValueError("vx must be nonzero")
    chi = vy / vx
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"vy/vx={chi} outside [0, 1]")
    if topology == "cyclic" and n % 2:
        raise NoSeparableSolution("cyclic chains need even n for the alternating solution")
    if topology not in ("open", "cyclic"):
        raise ValueError(f"unknown topology {topology!r}")
    two_s = float(twice_s)
    prod = two_s**2 * vx * vy
    if b_o is None:
        if eta is None:
            raise ValueError("give b_o or eta")
        b_o = np.sqrt(prod / eta)
    b_e = prod / b_o

    def cos_theta(bs):
        return np.sqrt((bs**2 + (two_s * vy) ** 2) / (bs**2 + (two_s * vx) ** 2))

    theta_o = float(np.arccos(cos_theta(b_o)))
    theta_e = float(np.arccos(cos_theta(b_e)))
    if vx < 0:
        theta_e = -theta_e
    angles = np.where(sublattice_odd(n), theta_o, theta_e)
    return AlternatingSolution(
        theta_o=theta_o,
        theta_e=theta_e,
        b_o=float(b_o),
        b_e=float(b_e),
        angles=angles,
        fields=alternating_fields(n, b_o, b_e, topology),
    )


def xy_chain_spec(n: int, twice_s: int, vx: float, vy: float, b, topology="open") -> ModelSpec:
    return ModelSpec(
        (twice_s,) * n,
        chain_couplings(n, vx, topology),
        chain_couplings(n, vy, topology),
        np.zeros((n, n)),
        b,
    )


def random_factorized(rng: np.random.Generator, n_max=6, spin_choices=(1, 2, 3), dim_cap=4096,
                      certified=False, theta_range=(0.1, np.pi - 0.1), density=0.7):
    """Random complete spec plus angles with long-range couplings.

    With ``certified`` the couplings satisfy vx >= 0 and |vz| <= vx, which
    guarantees |vy| <= vx for any angles.
    """
    while True:
        n = int(rng.integers(2, n_max + 1))
        twice_s = tuple(int(x) for x in rng.choice(spin_choices, size=n))
        if np.prod([t + 1 for t in twice_s]) <= dim_cap:
            break
    mask = np.triu(rng.random((n, n)) < density, 1)
    if not mask.any():
        mask[0, 1] = True
    if certified:
        vx = rng.uniform(0.1, 1.0, (n, n))
        vz = vx * rng.uniform(-1.0, 1.0, (n, n))
    else:
        vx = rng.normal(size=(n, n))
        vz = rng.normal(size=(n, n))
    vx = np.where(mask, vx, 0.0)
    vz = np.where(mask, vz, 0.0)
    vx = vx + vx.T
    vz = vz + vz.T
    for i, t in enumerate(twice_s):
        if t >= 2:
            if certified:
                vx[i, i] = rng.uniform(0.1, 1.0)
                vz[i, i] = vx[i, i] * rng.uniform(-1.0, 1.0)
            else:
                vx[i, i], vz[i, i] = rng.normal(size=2)
    angles = rng.uniform(*theta_range, size=n)
    return complete_spec(twice_s, vx, vz, angles), angles
