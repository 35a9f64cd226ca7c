"""Self-check suites tying the closed forms, the factorization solver and the
exact-diagonalization engine together.

``verify_suite`` accepts replacement implementations of the solver steps so a
deliberately broken one can be checked to fail.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic
from .ed import (
    entanglement_measures,
    full_spectrum,
    negativity,
    reduced_density,
    sector_ground_states,
    wootters_concurrence,
    expectation_sz,
)
from .factorization import (
    alternating_solution,
    derive_fields,
    derive_vy,
    eigen_residual,
    factorized_energy,
    gs_certificate,
    theta_state,
)
from .model import ModelSpec
from .spin import HilbertSpace
from .sweep import SweepConfig

RESIDUAL_TOL = 1e-10
GS_TOL = 1e-9
ORACLE_TOL = 1e-10
IDENTITY_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    max_error: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, err: float, what: str):
        self.checks += 1
        if np.isfinite(err):
            self.max_error = max(self.max_error, float(err))
        if not ok:
            self.failures.append(what)


def random_couplings(rng, twice_s, certified=False, density=0.7):
    n = len(twice_s)
    mask = np.triu(rng.random((n, n)) < density, 1)
    mask[0, 1] = True
    if certified:
        vx = rng.uniform(0.1, 1.0, (n, n))
        vz = vx * rng.uniform(-1.0, 1.0, (n, n))
    else:
        vx, vz = rng.normal(size=(2, n, n))
    vx, vz = np.where(mask, vx, 0.0), np.where(mask, vz, 0.0)
    vx, vz = vx + vx.T, vz + vz.T
    for i, t in enumerate(twice_s):
        if t >= 2:
            vx[i, i] = rng.uniform(0.1, 1.0) if certified else rng.normal()
            vz[i, i] = vx[i, i] * rng.uniform(-1.0, 1.0) if certified else rng.normal()
    return vx, vz


def random_spins(rng, n_max, dim_cap=4096, choices=(1, 2, 3)):
    while True:
        n = int(rng.integers(2, n_max + 1))
        ts = tuple(int(x) for x in rng.choice(choices, size=n))
        if np.prod([t + 1 for t in ts]) <= dim_cap:
            return ts


def _complete(ts, vx, vz, angles, vy_fn, fields_fn):
    return ModelSpec(ts, vx, vy_fn(vx, vz, angles), vz, fields_fn(vx, vz, angles, ts).b)


def residual_suite(rng, configs=50, vy_fn=derive_vy, fields_fn=derive_fields) -> SuiteResult:
    res = SuiteResult("residual")
    for k in range(configs):
        ts = random_spins(rng, 6)
        vx, vz = random_couplings(rng, ts)
        angles = rng.uniform(0.1, np.pi - 0.1, len(ts))
        spec = _complete(ts, vx, vz, angles, vy_fn, fields_fn)
        try:
            r = eigen_residual(spec, angles)
        except AssertionError as exc:
            res.check(False, np.inf, f"config {k}: {exc}")
            continue
        res.check(r <= RESIDUAL_TOL, r, f"config {k} spins {ts}: residual {r:.3g}")
    return res


def certification_suite(rng, configs=20, vy_fn=derive_vy, fields_fn=derive_fields) -> SuiteResult:
    res = SuiteResult("certification")
    for k in range(configs):
        ts = random_spins(rng, 6)
        vx, vz = random_couplings(rng, ts, certified=True)
        angles = rng.uniform(0.1, np.pi - 0.1, len(ts))
        spec = _complete(ts, vx, vz, angles, vy_fn, fields_fn)
        ok, why = gs_certificate(spec, angles)
        if not ok:
            res.check(False, np.inf, f"config {k}: not certified ({why})")
            continue
        e = factorized_energy(spec, angles)
        ev = full_spectrum(spec)
        err = abs(ev[0] - e)
        res.check(err <= GS_TOL, err, f"config {k}: E_Theta {e} vs min eigenvalue {ev[0]}")
        gs = sector_ground_states(spec)
        split = abs(gs[1].energy - gs[-1].energy)
        res.check(split <= GS_TOL, split, f"config {k}: sector minima differ by {split:.3g}")
    return res


def subsystem_pairs(n, max_sites=3):
    """All ordered-by-content disjoint (B, C) with |B| + |C| <= max_sites."""
    sites = range(n)
    out = []
    for size in range(2, max_sites + 1):
        for A in itertools.combinations(sites, size):
            for kb in range(1, size):
                for B in itertools.combinations(A, kb):
                    if B[0] != A[0]:
                        continue  # (B, C) and (C, B) give the same numbers
                    C = tuple(i for i in A if i not in B)
                    out.append((B, C))
    return out


def parity_states(ts, angles):
    plus = theta_state(ts, angles)
    minus = theta_state(ts, -np.asarray(angles))
    o = float(plus @ minus)
    return (plus + minus) / np.sqrt(2 * (1 + o)), (plus - minus) / np.sqrt(2 * (1 - o)), o


def oracle_suite(rng, configs=8, n_max=5) -> SuiteResult:
    """Closed forms against reduced densities of explicitly built |Theta^+->."""
    res = SuiteResult("oracle")
    for k in range(configs):
        ts = random_spins(rng, n_max, dim_cap=1024)
        n = len(ts)
        angles = rng.uniform(0.15, np.pi / 2 - 0.1, n)
        space = HilbertSpace.from_spins(ts)
        tp, tm, o_num = parity_states(ts, angles)
        o = analytic.subsystem_overlap(angles, ts)
        res.check(abs(o - o_num) <= ORACLE_TOL, abs(o - o_num), f"config {k}: overlap")
        mix = [(0.5, tp), (0.5, tm)]
        for B, C in subsystem_pairs(n):
            lim = analytic.limits_from_angles(angles, ts, B, C)
            A = B + C
            for par, state, n_ana, c_ana in ((1, tp, lim.N_plus, lim.C_plus), (-1, tm, lim.N_minus, lim.C_minus)):
                rho = reduced_density(state, space, A)
                n_num = negativity(rho, B)
                err = abs(n_num - n_ana)
                res.check(err <= ORACLE_TOL, err, f"config {k} B={B} C={C} parity {par}: N {n_num} vs {n_ana}")
                if len(B) == 1 and len(C) == 1 and ts[B[0]] == 1 and ts[C[0]] == 1:
                    c_num = wootters_concurrence(rho)
                    err = abs(c_num - c_ana)
                    res.check(err <= ORACLE_TOL, err, f"config {k} B={B} C={C} parity {par}: C {c_num} vs {c_ana}")
            if len(B) == 1 and len(C) == 1 and ts[B[0]] == 1 and ts[C[0]] == 1:
                c0 = wootters_concurrence(reduced_density(mix, space, A))
                err = abs(c0 - lim.C_zero)
                res.check(err <= ORACLE_TOL, err, f"config {k} B={B} C={C}: C0 {c0} vs {lim.C_zero}")
        # global bipartitions: Schmidt rank 2 and global concurrence
        for size in range(1, n):
            for A in itertools.combinations(range(n), size):
                if 0 not in A:
                    continue
                rest = [i for i in range(n) if i not in A]
                o_a = analytic.subsystem_overlap(angles, ts, A)
                o_b = analytic.subsystem_overlap(angles, ts, rest)
                cp, cm = analytic.concurrence_limits(o_a, o_b, 1.0, o)
                for state, c_ana in ((tp, cp), (tm, cm)):
                    rho = reduced_density(state, space, A)
                    ev = np.linalg.eigvalsh(rho.matrix)
                    rank = int(np.sum(ev > 1e-12))
                    res.check(rank == 2, 0.0, f"config {k} A={A}: Schmidt rank {rank}")
                    c_num = entanglement_measures(rho)["global_concurrence"]
                    err = abs(c_num - c_ana)
                    res.check(err <= ORACLE_TOL, err, f"config {k} A={A}: global C {c_num} vs {c_ana}")
        for i in range(n):
            dm_num = expectation_sz(tm, space, i) - expectation_sz(tp, space, i)
            dm = analytic.magnetization_step(angles, ts, i)
            err = abs(dm_num - dm)
            res.check(err <= ORACLE_TOL, err, f"config {k} site {i}: dM {dm_num} vs {dm}")
    return res


def monogamy_suite(rng, tuples=100) -> SuiteResult:
    res = SuiteResult("monogamy")
    for k in range(tuples):
        ob, oc, od, orest = rng.uniform(0, 1, 4)
        ot = ob * oc * od * orest
        for par in (1, -1):
            lhs, rhs = analytic.monogamy_gap(ob, oc, od, orest, ot, parity=par)
            res.check(abs(lhs - rhs) <= IDENTITY_TOL, abs(lhs - rhs), f"tuple {k} parity {par}: {lhs} vs {rhs}")
    return res


def identity_suite(rng, samples=50) -> SuiteResult:
    res = SuiteResult("identities")
    # uniform closed form against the generic one
    for k in range(samples):
        chi = rng.uniform(0, 1)
        twice = rng.integers(1, 4, size=rng.integers(3, 9))
        T = int(twice.sum())
        kb = int(rng.integers(1, len(twice) - 1))
        kc = int(rng.integers(1, len(twice) - kb + 1))
        tb, tc = int(twice[:kb].sum()), int(twice[kb : kb + kc].sum())
        lim, _ = analytic.uniform_limits(chi, T, tb, tc)
        ob, oc = chi ** (tb / 2), chi ** (tc / 2)
        orest, ot = chi ** ((T - tb - tc) / 2), chi ** (T / 2)
        cp, cm = analytic.concurrence_limits(ob, oc, orest, ot)
        err = max(abs(cp - lim.C_plus), abs(cm - lim.C_minus))
        res.check(err <= IDENTITY_TOL, err, f"sample {k}: uniform vs generic concurrence")
    # alternating solutions: cos(theta_o) cos(theta_e) = vy/vx
    for k in range(samples):
        vx = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0)
        vy = vx * rng.uniform(0.0, 1.0)
        sol = alternating_solution(vx, vy, int(rng.integers(1, 4)), 6, eta=rng.uniform(0.1, 20))
        err = abs(np.cos(sol.theta_o) * np.cos(sol.theta_e) - vy / vx)
        res.check(err <= IDENTITY_TOL, err, f"sample {k}: alternating cosine product")
    # C- = 1 for equal complementary overlaps
    for k in range(samples):
        oa = rng.uniform(0, 1)
        cm = analytic.concurrence_limits(oa, oa, 1.0, oa * oa)[1]
        res.check(abs(cm - 1) <= IDENTITY_TOL, abs(cm - 1), f"sample {k}: C- = {cm}")
    # entropy of the rank-2 reduced density tends to one bit
    o = 1e-4
    w = analytic.schmidt_weights(o, o, o * o)
    for par in (1, -1):
        ent = entanglement_measures(np.diag(w.row(par)))["entropy_bits"]
        res.check(abs(ent - 1) <= 1e-6, abs(ent - 1), f"entropy limit parity {par}: {ent}")
    return res


DEGENERACY_CASES = (
    dict(n=6, twice_s=1, delta=2.0, topology="open"),
    dict(n=5, twice_s=2, delta=2.5, topology="open"),
    dict(n=6, twice_s=1, delta=3.0, topology="cyclic"),
    dict(n=6, twice_s=1, delta=3.0, field_mode="alternating", eta=4.0),
    dict(n=5, twice_s=2, delta=4.0, field_mode="alternating", eta=0.5),
)


def degeneracy_suite(chain_fields=None) -> SuiteResult:
    """E_even = E_odd = E_Theta at the factorizing fields of chain geometries."""
    res = SuiteResult("degeneracy")
    for case in DEGENERACY_CASES:
        cfg = SweepConfig(**case)
        b = cfg.fields_at(1.0) if chain_fields is None else chain_fields(cfg, 1.0)
        spec = cfg.spec_at(1.0).with_fields(b)
        gs = sector_ground_states(spec)
        split = abs(gs[1].energy - gs[-1].energy)
        res.check(split <= GS_TOL, split, f"{case}: parity sectors split by {split:.3g}")
        e = factorized_energy(spec, cfg.separable_angles())
        err = abs(min(gs[1].energy, gs[-1].energy) - e)
        res.check(err <= GS_TOL, err, f"{case}: ground energy vs E_Theta differ by {err:.3g}")
    return res


def verify_suite(seed=0, vy_fn=derive_vy, fields_fn=derive_fields, chain_fields=None, quick=False) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    scale = 0.2 if quick else 1.0
    return [
        residual_suite(rng, max(5, int(50 * scale)), vy_fn, fields_fn),
        certification_suite(rng, max(3, int(20 * scale)), vy_fn, fields_fn),
        oracle_suite(rng, max(2, int(8 * scale))),
        monogamy_suite(rng),
        identity_suite(rng),
        degeneracy_suite(chain_fields),
    ]


def format_results(results) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status}  {r.name:<14} checks={r.checks:<5} max_error={r.max_error:.3e}")
        for f in r.failures[:5]:
            lines.append(f"      {f}")
        if len(r.failures) > 5:
            lines.append(f"      ... {len(r.failures) - 5} more")
    return "\n".join(lines) + "\n"


def results_jsonl(results) -> str:
    return "".join(json.dumps({**asdict(r), "passed": r.passed}) + "\n" for r in results)
