"""Field sweeps of the ground-state pair negativities N_1j in open/cyclic
spin-s XY chains, with uniform or alternating transverse fields.

Energies are in units of vx = 1; vy = chi = 1 - delta/(2 s n), vz = 0.
The sweep variable ``scale`` is b/b_s (uniform) or b_o/b_os (alternating),
so that scale = 1 is the separability point.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import analytic
from .ed import MEMORY_BUDGET, negativity, reduced_density, sector_ground_states, entanglement_measures
from .factorization import alternating_fields, alternating_solution, uniform_solution, xy_chain_spec
from .model import ModelSpec, chain_couplings

DEGENERACY_TOL = 1e-10
SIDE_TOL = 1e-3


@dataclass(frozen=True)
class SweepConfig:
    n: int = 8
    twice_s: int = 1
    delta: float = 2.5
    topology: str = "open"
    field_mode: str = "uniform"
    eta: float = 1.0
    grid: tuple[float, float, int] = (0.05, 1.5, 150)
    epsilon_side: float = 1e-4
    pairs: tuple[tuple[int, int], ...] | str = "first-to-all"
    seed: int = 0
    workers: int = 1
    half_entropy: bool = False
    tol: float = 1e-10

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.twice_s < 1:
            raise ValueError("twice_s must be >= 1")
        if self.topology not in ("open", "cyclic"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.field_mode not in ("uniform", "alternating"):
            raise ValueError(f"unknown field_mode {self.field_mode!r}")
        if not 0.0 < self.chi < 1.0:
            raise ValueError(f"chi = 1 - delta/(2 s n) = {self.chi} must lie in (0, 1)")
        lo, hi, pts = self.grid
        if int(pts) < 2 or not lo < hi:
            raise ValueError("grid needs min < max and at least 2 points")
        if not 0.0 < self.epsilon_side <= 1e-2:
            raise ValueError("epsilon_side must lie in (0, 1e-2]")
        if self.field_mode == "alternating":
            if self.eta <= 0:
                raise ValueError("eta must be positive")
            if self.topology == "cyclic" and self.n % 2:
                raise ValueError("alternating fields on a cyclic chain need even n")
        for i, j in self.pair_list:
            if not (1 <= i <= self.n and 1 <= j <= self.n) or i == j:
                raise ValueError(f"bad pair ({i},{j})")

    # -- derived quantities -------------------------------------------------

    @property
    def s(self) -> float:
        return self.twice_s / 2.0

    @property
    def chi(self) -> float:
        return 1.0 - self.delta / (2.0 * self.s * self.n)

    @property
    def b_s(self) -> float:
        """Uniform factorizing field 2 s sqrt(vx vy) with vx = 1."""
        return 2.0 * self.s * math.sqrt(self.chi)

    @property
    def b_os(self) -> float:
        return self.b_s / math.sqrt(self.eta)

    @property
    def pair_list(self) -> list[tuple[int, int]]:
        """Site pairs, counted from 1 as in the CSV column names."""
        if self.pairs == "first-to-all":
            return [(1, j) for j in range(2, self.n + 1)]
        return [tuple(p) for p in self.pairs]

    def scales(self) -> np.ndarray:
        lo, hi, pts = self.grid
        return np.linspace(lo, hi, int(pts))

    def fields_at(self, scale: float) -> np.ndarray:
        if self.field_mode == "uniform":
            b = np.full(self.n, scale * self.b_s)
            if self.topology == "open":
                b[0] *= 0.5
                b[-1] *= 0.5
            return b
        b_o = scale * self.b_os
        return alternating_fields(self.n, b_o, self.eta * b_o, self.topology)

    def spec_at(self, scale: float) -> ModelSpec:
        return xy_chain_spec(self.n, self.twice_s, 1.0, self.chi, self.fields_at(scale), self.topology)

    def separable_angles(self) -> np.ndarray:
        if self.field_mode == "uniform":
            vx = chain_couplings(self.n, 1.0, self.topology)
            sol = uniform_solution(vx, np.zeros_like(vx), (self.twice_s,) * self.n, chi=self.chi)
            return np.full(self.n, sol.theta)
        return alternating_solution(1.0, self.chi, self.twice_s, self.n, self.topology, eta=self.eta).angles

    def field_columns(self) -> list[str]:
        return ["b_inner"] if self.field_mode == "uniform" else ["b_o", "b_e"]


PRESETS = {
    1: dict(n=8, twice_s=1, delta=2.5, field_mode="uniform"),
    2: dict(n=8, twice_s=3, delta=7.5, field_mode="uniform"),
    3: dict(n=8, twice_s=3, delta=7.5, field_mode="alternating", eta=10.0),
}


def preset(fig: int, **overrides) -> SweepConfig:
    if fig not in PRESETS:
        raise ValueError(f"no preset for figure {fig}")
    return SweepConfig(**{**PRESETS[fig], **overrides})


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("n", "twice_s", "seed", "workers"):
        return int(raw)
    if key in ("delta", "eta", "epsilon_side", "tol"):
        return float(raw)
    if key == "half_entropy":
        if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"half_entropy: expected a boolean, got {raw!r}")
        return raw.lower() in ("true", "1", "yes")
    if key == "grid":
        parts = [p for p in raw.replace(",", " ").split()]
        if len(parts) != 3:
            raise ValueError("grid = min, max, points")
        return (float(parts[0]), float(parts[1]), int(parts[2]))
    if key == "pairs":
        if raw == "first-to-all":
            return raw
        out = []
        for item in raw.replace(" ", "").split(","):
            i, j = item.split("-")
            out.append((int(i), int(j)))
        return tuple(out)
    return raw


def parse_config(text: str) -> SweepConfig:
    """Parse ``key = value`` lines (``#`` comments) into a SweepConfig."""
    known = {f.name for f in fields(SweepConfig)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        kw[key] = _parse_value(key, val)
    return SweepConfig(**kw)


def format_config(cfg: SweepConfig) -> str:
    d = asdict(cfg)
    d["grid"] = f"{cfg.grid[0]!r}, {cfg.grid[1]!r}, {int(cfg.grid[2])}"
    if cfg.pairs != "first-to-all":
        d["pairs"] = ", ".join(f"{i}-{j}" for i, j in cfg.pair_list)
    return "".join(f"{k} = {v}\n" for k, v in d.items())


# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    scale: float
    fields: tuple[float, ...]
    parity: int  # 0 flags a near-degenerate point
    E_even: float
    E_odd: float
    negativities: dict[tuple[int, int], float]
    half_entropy: float | None = None


def pair_negativity(state, spec: ModelSpec, i: int, j: int) -> float:
    """Negativity between sites i and j (0-based) of a pure state."""
    rho = reduced_density(state, spec.space, (i, j))
    return negativity(rho, (i,))


def evaluate_point(cfg: SweepConfig, scale: float) -> SweepRow:
    spec = cfg.spec_at(scale)
    gs = sector_ground_states(spec, tol=cfg.tol, seed=cfg.seed, budget=MEMORY_BUDGET)
    e_even, e_odd = gs[1].energy, gs[-1].energy
    if abs(e_even - e_odd) < DEGENERACY_TOL:
        parity = 0
        negs = {p: math.nan for p in cfg.pair_list}
        entropy = math.nan
    else:
        parity = 1 if e_even < e_odd else -1
        psi = gs[parity].vector
        negs = {(i, j): pair_negativity(psi, spec, i - 1, j - 1) for i, j in cfg.pair_list}
        entropy = None
        if cfg.half_entropy:
            rho = reduced_density(psi, spec.space, range(cfg.n // 2))
            entropy = entanglement_measures(rho)["entropy_bits"]
    if cfg.field_mode == "uniform":
        fvals = (scale * cfg.b_s,)
    else:
        fvals = (scale * cfg.b_os, cfg.eta * scale * cfg.b_os)
    return SweepRow(float(scale), fvals, parity, e_even, e_odd, negs, entropy if cfg.half_entropy else None)


def _evaluate(args):
    cfg, scale = args
    return evaluate_point(cfg, scale)


def compute_rows(cfg: SweepConfig, scales=None) -> list[SweepRow]:
    scales = cfg.scales() if scales is None else np.asarray(scales, float)
    jobs = [(cfg, float(x)) for x in scales]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_evaluate, jobs))
    else:
        rows = [_evaluate(j) for j in jobs]
    return sorted(rows, key=lambda r: r.scale)


def _f(x) -> str:
    return repr(float(x))


def header(cfg: SweepConfig) -> list[str]:
    cols = ["scale", *cfg.field_columns(), "parity", "E_even", "E_odd"]
    cols += [f"N_{i}_{j}" for i, j in cfg.pair_list]
    if cfg.half_entropy:
        cols.append("S_half")
    return cols


def write_csv(cfg: SweepConfig, rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header(cfg))
    for r in rows:
        line = [_f(r.scale), *(_f(v) for v in r.fields), str(r.parity), _f(r.E_even), _f(r.E_odd)]
        line += [_f(r.negativities[p]) for p in cfg.pair_list]
        if cfg.half_entropy:
            line.append(_f(r.half_entropy))
        w.writerow(line)


def detected_transitions(rows) -> list[dict]:
    """Grid intervals across which the ground-state parity flips."""
    out = []
    last = None
    for r in rows:
        if r.parity == 0:
            continue
        if last is not None and r.parity != last.parity:
            out.append({"between": (last.scale, r.scale), "from": last.parity, "to": r.parity})
        last = r
    return out


def run_sweep(cfg: SweepConfig, stream=None) -> dict:
    """Evaluate the grid, write CSV to ``stream`` (if given) and return a summary."""
    rows = compute_rows(cfg)
    if stream is not None:
        write_csv(cfg, rows, stream)
    return {
        "rows": rows,
        "transitions": detected_transitions(rows),
        "flagged": [r.scale for r in rows if r.parity == 0],
    }


def sweep_csv(cfg: SweepConfig) -> str:
    buf = io.StringIO()
    run_sweep(cfg, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------


def pair_class(cfg: SweepConfig, i: int, j: int) -> str:
    if cfg.field_mode == "uniform":
        return "uniform"
    lab = ["o" if k % 2 else "e" for k in (i, j)]  # 1-based: odd sites are the b_o sublattice
    return "".join(sorted(lab, reverse=True))


def side_limit_report(cfg: SweepConfig, epsilon=None, tol=SIDE_TOL) -> list[dict]:
    """Numeric N_ij at scale 1 -/+ epsilon next to the analytic N^-/N^+.

    One record per (pair, side) with ``kind = "pair"``, followed by one
    ``kind = "class"`` record per (pair class, side) holding the common limit
    (mean over the class) and the spread of the class.
    """
    eps = cfg.epsilon_side if epsilon is None else epsilon
    angles = cfg.separable_angles()
    ts = (cfg.twice_s,) * cfg.n
    pairs, classes = [], []
    for side, scale, par in (("-", 1.0 - eps, -1), ("+", 1.0 + eps, 1)):
        row = evaluate_point(cfg, scale)
        by_class: dict[str, list] = {}
        for i, j in cfg.pair_list:
            lim = analytic.limits_from_angles(angles, ts, [i - 1], [j - 1])
            ana = lim.N_plus if par == 1 else lim.N_minus
            num = row.negativities[(i, j)]
            diff = abs(num - ana)
            rec = {
                "kind": "pair",
                "pair": f"{i}-{j}",
                "class": pair_class(cfg, i, j),
                "side": side,
                "scale": scale,
                "gs_parity": row.parity,
                "numeric": num,
                "analytic": ana,
                "abs_diff": diff,
                "spread": 0.0,
                "pass": bool(diff <= tol and row.parity == par),
            }
            pairs.append(rec)
            by_class.setdefault(rec["class"], []).append(rec)
        for cls, recs in by_class.items():
            vals = np.array([r["numeric"] for r in recs])
            anas = {r["analytic"] for r in recs}
            ana = float(np.mean(list(anas)))
            mean = float(vals.mean())
            spread = float(vals.max() - vals.min())
            classes.append(
                {
                    "kind": "class",
                    "pair": "*",
                    "class": cls,
                    "side": side,
                    "scale": scale,
                    "gs_parity": row.parity,
                    "numeric": mean,
                    "analytic": ana,
                    "abs_diff": abs(mean - ana),
                    "spread": spread,
                    "pass": bool(abs(mean - ana) <= tol and spread <= tol and row.parity == par),
                }
            )
    return pairs + classes


def common_limits(records) -> dict[tuple[str, str], float]:
    """(class, side) -> numeric common side limit, from a side_limit_report."""
    return {(r["class"], r["side"]): r["numeric"] for r in records if r["kind"] == "class"}


def format_report(records) -> str:
    cols = ["kind", "pair", "class", "side", "scale", "gs_parity", "numeric", "analytic", "abs_diff", "spread", "pass"]
    cells = [cols]
    for r in records:
        cells.append(
            [
                r["kind"],
                r["pair"],
                r["class"],
                r["side"],
                f"{r['scale']:.6f}",
                f"{r['gs_parity']:+d}",
                f"{r['numeric']:.8f}",
                f"{r['analytic']:.8f}",
                f"{r['abs_diff']:.2e}",
                f"{r['spread']:.2e}",
                "PASS" if r["pass"] else "FAIL",
            ]
        )
    widths = [max(len(row[k]) for row in cells) for k in range(len(cols))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells) + "\n"


def report_jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
