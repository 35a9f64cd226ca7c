"""Closed-form entanglement side limits at the separability point.

All formulas take overlaps O_X = <-Theta_X|Theta_X> as inputs.  For two
disjoint subsystems B, C of an n-site system, ``O_comp`` is the overlap of the
complement of B+C and ``O_total`` the overlap of the whole system.  The sign
``parity`` selects |Theta^+> (+1) or |Theta^-> (-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OverlapSet:
    O_B: float
    O_C: float
    O_comp: float
    O_total: float


@dataclass(frozen=True)
class SchmidtWeights:
    p_plus_Aplus: float
    p_plus_Aminus: float
    p_minus_Aplus: float
    p_minus_Aminus: float

    def row(self, parity: int) -> tuple[float, float]:
        """(p_{A+}, p_{A-}) for the state of the given parity."""
        if parity == 1:
            return self.p_plus_Aplus, self.p_plus_Aminus
        return self.p_minus_Aplus, self.p_minus_Aminus


@dataclass(frozen=True)
class EntanglementLimits:
    C_plus: float
    C_minus: float
    N_plus: float
    N_minus: float
    C_zero: float


def _check_parity(parity):
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")


def canonical_angles(angles) -> np.ndarray:
    """Map angles into [-pi/2, pi/2] via theta -> pi - theta (overlaps become >= 0)."""
    a = np.angle(np.exp(1j * np.asarray(angles, float)))
    return np.where(np.abs(a) > np.pi / 2, np.sign(a) * np.pi - a, a)


def subsystem_overlap(angles, twice_s, sites=None) -> float:
    """prod over ``sites`` of cos(theta_i)^(2 s_i); empty selection gives 1."""
    angles = canonical_angles(angles)
    twice_s = np.asarray(twice_s)
    idx = np.arange(len(angles)) if sites is None else np.asarray(list(sites), dtype=int)
    if idx.size == 0:
        return 1.0
    return float(np.prod(np.cos(angles[idx]) ** twice_s[idx]))


def overlap_set(angles, twice_s, B, C) -> OverlapSet:
    n = len(angles)
    B, C = list(B), list(C)
    if set(B) & set(C):
        raise ValueError("B and C must be disjoint")
    rest = sorted(set(range(n)) - set(B) - set(C))
    return OverlapSet(
        subsystem_overlap(angles, twice_s, B),
        subsystem_overlap(angles, twice_s, C),
        subsystem_overlap(angles, twice_s, rest),
        subsystem_overlap(angles, twice_s),
    )


def schmidt_weights(O_A, O_comp, O_total) -> SchmidtWeights:
    """Schmidt weights p^par_{A nu}; the row of a parity state that does not
    exist (1 + par O_total = 0) is NaN."""

    def p(par, nu):
        if 1 + par * O_total == 0:
            return float("nan")
        return (1 + nu * O_A) * (1 + par * nu * O_comp) / (2 * (1 + par * O_total))

    return SchmidtWeights(p(1, 1), p(1, -1), p(-1, 1), p(-1, -1))


def concurrence_limits(O_B, O_C, O_comp, O_total) -> tuple[float, float]:
    """(C+, C-) between B and C; C+ is of parallel type, C- antiparallel."""
    base = np.sqrt(max(0.0, (1 - O_B**2) * (1 - O_C**2))) * O_comp
    return float(base / (1 + O_total)), float(base / (1 - O_total))


def negativity_limits(O_B, O_C, O_comp, O_total) -> tuple[float, float]:
    """(N+, N-) between B and C, with A = B + C."""
    O_A = O_B * O_C
    w = schmidt_weights(O_A, O_comp, O_total)
    out = []
    for par, p in ((1, w.p_plus_Aminus), (-1, w.p_minus_Aplus)):
        # (C^par)^2 / O_comp written without the 0/0 at O_comp = 0
        c2 = (1 - O_B**2) * (1 - O_C**2) * O_comp / (1 + par * O_total) ** 2
        out.append(0.5 * (np.sqrt(p**2 + c2) - p))
    return float(out[0]), float(out[1])


def mixture_concurrence(C_plus, C_minus, O_total, atol=1e-10) -> float:
    half_split = 0.5 * (C_minus - C_plus)
    direct = C_minus * O_total / (1 + O_total)
    if abs(half_split - direct) > atol:
        raise ValueError(f"inconsistent concurrences: {half_split} vs {direct}")
    return float(direct)


def limits(O_B, O_C, O_comp, O_total) -> EntanglementLimits:
    cp, cm = concurrence_limits(O_B, O_C, O_comp, O_total)
    n_p, n_m = negativity_limits(O_B, O_C, O_comp, O_total)
    return EntanglementLimits(cp, cm, n_p, n_m, mixture_concurrence(cp, cm, O_total))


def limits_from_angles(angles, twice_s, B, C) -> EntanglementLimits:
    o = overlap_set(angles, twice_s, B, C)
    return limits(o.O_B, o.O_C, o.O_comp, o.O_total)


def parallel_antiparallel(O_B, O_C, weights: SchmidtWeights, parity: int) -> tuple[float, float]:
    """Parallel (nu=+) and antiparallel (nu=-) concurrences of the effective
    two-qubit state; the mixed-state concurrence is max(C_par, C_anti, 0)."""
    _check_parity(parity)
    pa, pm = weights.row(parity)
    ap, am = _alphas(O_B, O_C)
    return 2 * (pa * ap - pm * am), 2 * (pm * am - pa * ap)


def _alphas(O_B, O_C):
    def q(par, nu):
        return (1 + nu * O_B) * (1 + par * nu * O_C) / (2 * (1 + par * O_B * O_C))

    ap = np.sqrt(q(1, 1) * q(1, -1))
    am = np.sqrt(q(-1, 1) * q(-1, -1)) if O_B * O_C != 1 else 0.0
    return ap, am


def two_qubit_reduction(O_B, O_C, weights: SchmidtWeights, parity: int) -> np.ndarray:
    """Reduced state of B+C in the basis |Theta_B^nu>|Theta_C^nu'>, ordered ++, +-, -+, --."""
    _check_parity(parity)
    pa, pm = weights.row(parity)

    def q(par, nu):
        den = 2 * (1 + par * O_B * O_C)
        return (1 + nu * O_B) * (1 + par * nu * O_C) / den if den else 0.5

    ap, am = _alphas(O_B, O_C)
    rho = np.zeros((4, 4))
    rho[0, 0], rho[3, 3], rho[0, 3] = pa * q(1, 1), pa * q(1, -1), pa * ap
    rho[1, 1], rho[2, 2], rho[1, 2] = pm * q(-1, 1), pm * q(-1, -1), pm * am
    rho[3, 0], rho[2, 1] = rho[0, 3], rho[1, 2]
    return rho


def magnetization_step(angles, twice_s, site) -> float:
    """<Theta^-|s^z_i|Theta^-> - <Theta^+|s^z_i|Theta^+>."""
    angles = canonical_angles(angles)
    twice_s = np.asarray(twice_s)
    cos = np.cos(angles)
    if np.any(cos == 0):
        return 0.0
    # log-space keeps 1 - O^2 accurate for small angles
    log_o = float(np.sum(twice_s * np.log(np.abs(cos))))
    sign = float(np.prod(np.sign(cos) ** twice_s))
    o = sign * np.exp(log_o)
    one_minus_o2 = -np.expm1(2 * log_o)
    if one_minus_o2 == 0:
        raise ZeroDivisionError("all angles vanish: the parity states are not defined")
    th = angles[site]
    return float(twice_s[site] * np.sin(th) ** 2 * o / (cos[site] * one_minus_o2))


def monogamy_gap(O_B, O_C, O_D, O_rest, O_total, parity: int = 1) -> tuple[float, float]:
    """Both sides of C_BC^2 + C_BD^2 = C_{B,C+D}^2 [1 - (1-O_C^2)(1-O_D^2)/(1-O_C^2 O_D^2)].

    ``O_rest`` is the overlap of the complement of B+C+D.
    """
    _check_parity(parity)
    k = 0 if parity == 1 else 1
    c_bc = concurrence_limits(O_B, O_C, O_D * O_rest, O_total)[k]
    c_bd = concurrence_limits(O_B, O_D, O_C * O_rest, O_total)[k]
    c_bcd = concurrence_limits(O_B, O_C * O_D, O_rest, O_total)[k]
    lhs = c_bc**2 + c_bd**2
    den = 1 - O_C**2 * O_D**2
    frac = (1 - O_C**2) * (1 - O_D**2) / den if den else 0.0
    rhs = c_bcd**2 * (1 - frac)
    return float(lhs), float(rhs)


def uniform_limits(chi, twice_S, twice_SB, twice_SC) -> tuple[EntanglementLimits, dict]:
    """Limits for the common-angle solution cos^2(theta) = chi, with subsystem
    and total spins given as twice-spin integers.  Returns the exact limits and
    the large-S approximations written in terms of delta = 2S(1 - chi)."""
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"chi={chi} outside [0, 1]")
    if twice_SB + twice_SC > twice_S:
        raise ValueError("S_B + S_C exceeds S")
    S, SB, SC = twice_S / 2, twice_SB / 2, twice_SC / 2
    o_b, o_c = chi**SB, chi**SC
    o_rest, o_tot = chi ** (S - SB - SC), chi**S
    lim = limits(o_b, o_c, o_rest, o_tot)
    delta = 2 * S * (1 - chi)
    e = np.exp(-delta / 2)
    approx = {
        "delta": delta,
        "C_AAbar_plus": np.sqrt(SB * delta / S) * np.sqrt(1 - e**2) / (1 + e),
        "C_AAbar_minus": np.sqrt(SB * delta / S) * np.sqrt(1 - e**2) / (1 - e),
        "C_BC_plus": delta / S * np.sqrt(SB * SC) * e / (1 + e),
        "C_BC_minus": delta / S * np.sqrt(SB * SC) * e / (1 - e),
    }
    return lim, approx


def pair_negativity_estimate_plus(delta, n) -> float:
    """Large-n estimate of the common pair negativity N+ in the uniform spin
    chain with chi = 1 - delta/(2 s n)."""
    e = np.exp(-delta / 2)
    return float(delta * e / (2 * n * (1 + e)))


def pair_negativity_estimate_minus(delta, n) -> float:
    e = np.exp(-delta / 2)
    return float(delta**2 * e / (4 * n**2 * (1 - e) ** 2))
