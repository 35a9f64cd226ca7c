import numpy as np
import pytest

from xyzsep.ed import (
    ConvergenceError,
    entanglement_measures,
    expectation_sz,
    full_spectrum,
    ground_state,
    lanczos_lowest,
    negativity,
    parity_transition_scan,
    partial_transpose,
    reduced_density,
    sector_ground_states,
    sector_spectrum,
    total_magnetization,
    wootters_concurrence,
)
from xyzsep.factorization import random_factorized, theta_state, xy_chain_spec
from xyzsep.model import ModelSpec, dense_h
from xyzsep.spin import HilbertSpace
from xyzsep.sweep import SweepConfig

BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def test_lanczos_against_dense(rng):
    a = rng.normal(size=(300, 300))
    a = a + a.T
    e, x, res, second, _ = lanczos_lowest(lambda v: a @ v, rng.random(300), tol=1e-10)
    ev = np.linalg.eigvalsh(a)
    assert e == pytest.approx(ev[0], abs=1e-9)
    assert second == pytest.approx(ev[1], abs=1e-6)
    assert np.linalg.norm(a @ x - e * x) <= 1e-9


def test_lanczos_iteration_cap(rng):
    a = np.diag(np.linspace(0, 1, 400))
    with pytest.raises(ConvergenceError):
        lanczos_lowest(lambda v: a @ v, rng.random(400), tol=1e-14, max_iter=5, krylov_dim=5)


@pytest.mark.parametrize("seed", range(4))
def test_sector_ground_states_match_dense(seed):
    rng = np.random.default_rng(seed)
    spec, _ = random_factorized(rng, n_max=5, dim_cap=1024)
    gs = sector_ground_states(spec)
    for p in (1, -1):
        ref = sector_spectrum(spec, p)[0]
        assert gs[p].energy == pytest.approx(ref, abs=1e-9)
        assert gs[p].residual <= 1e-9
        signs = spec.space.parity_signs()
        assert np.all(gs[p].vector[signs != p] == 0)
    assert min(gs[1].energy, gs[-1].energy) == pytest.approx(full_spectrum(spec)[0], abs=1e-9)


def test_ground_state_budget():
    spec = xy_chain_spec(4, 1, 1.0, 0.5, np.ones(4))
    with pytest.raises(MemoryError):
        ground_state(spec, 1, budget=8)


def test_hand_spectrum():
    vx = np.array([[0, 1.0], [1.0, 0]])
    z = np.zeros((2, 2))
    ev = full_spectrum(ModelSpec((1, 1), vx, z, z, np.zeros(2)))
    np.testing.assert_allclose(ev, [-0.25, -0.25, 0.25, 0.25], atol=1e-15)


def test_full_spectrum_vectors(rng):
    spec, _ = random_factorized(rng, n_max=3, dim_cap=64)
    w, v = full_spectrum(spec, vectors=True)
    np.testing.assert_allclose(dense_h(spec) @ v, v * w, atol=1e-11)


def test_reduced_density_of_product_state():
    psi = theta_state((1, 2, 1), [0.3, 1.1, 2.0])
    rho = reduced_density(psi, HilbertSpace.from_spins((1, 2, 1)), (0, 2))
    assert entanglement_measures(rho)["purity"] == pytest.approx(1.0)
    assert negativity(rho, (0,)) == pytest.approx(0.0, abs=1e-14)


def test_reduced_density_ordering(rng):
    space = HilbertSpace((2, 3, 2))
    psi = rng.normal(size=12)
    psi /= np.linalg.norm(psi)
    rho = reduced_density(psi, space, (2, 0)).matrix
    t = psi.reshape(2, 3, 2)
    ref = np.einsum("ajb,cjd->badc", t, t).reshape(4, 4)
    np.testing.assert_allclose(rho, ref, atol=1e-14)
    with pytest.raises(ValueError):
        reduced_density(psi, space, (0, 0))


def test_partial_transpose_involution(rng):
    m = rng.normal(size=(6, 6))
    pt = partial_transpose(m, (2, 3), [1])
    np.testing.assert_allclose(partial_transpose(pt, (2, 3), [1]), m)
    np.testing.assert_allclose(partial_transpose(m, (2, 3), [0, 1]), m.T)


def test_bell_state_measures():
    rho = reduced_density(BELL, HilbertSpace((2, 2)), (0, 1))
    assert negativity(rho, (0,)) == pytest.approx(0.5)
    assert wootters_concurrence(rho) == pytest.approx(1.0)
    one = reduced_density(BELL, HilbertSpace((2, 2)), (0,))
    m = entanglement_measures(one)
    assert m["entropy_bits"] == pytest.approx(1.0) and m["global_concurrence"] == pytest.approx(1.0)


def test_separable_mixture_has_zero_concurrence():
    rho = np.diag([0.5, 0, 0, 0.5])
    assert wootters_concurrence(rho) == 0.0
    assert entanglement_measures(np.diag([1.0, 0]))["entropy_bits"] == 0.0


def test_wootters_requires_two_qubits():
    with pytest.raises(ValueError):
        wootters_concurrence(np.eye(3) / 3)


def test_negativity_rejects_unnormalised():
    space = HilbertSpace((2, 2))
    rho = reduced_density([(2.0, BELL)], space, (0, 1))
    with pytest.raises(ArithmeticError):
        negativity(rho, (0,))


def test_magnetizations():
    space = HilbertSpace.from_spins((1, 2, 3))
    vac = np.zeros(space.total_dim)
    vac[0] = 1.0
    assert [expectation_sz(vac, space, i) for i in range(3)] == [-0.5, -1.0, -1.5]
    angles = [0.4, 1.2, 2.5]
    psi = theta_state((1, 2, 3), angles)
    for i, (t, a) in enumerate(zip((1, 2, 3), angles)):
        assert expectation_sz(psi, space, i) == pytest.approx(-t / 2 * np.cos(a), abs=1e-12)
    assert total_magnetization(vac, space) == -3.0


def _scan(cfg, grid):
    return parity_transition_scan(cfg.spec_at, grid)


def test_transitions_spin_half_six_sites():
    cfg = SweepConfig(n=6, twice_s=1, delta=2.0)
    scan = _scan(cfg, np.linspace(0.05, 1.3, 60))
    assert len(scan.crossings) == 3
    assert scan.crossings[-1] == pytest.approx(1.0, rel=1e-6)
    assert scan.parities == [-1, 1, -1, 1]


def test_transitions_spin_one():
    cfg = SweepConfig(n=4, twice_s=2, delta=2.0)
    scan = _scan(cfg, np.linspace(0.05, 1.3, 80))
    assert len(scan.crossings) == 4
    assert scan.crossings[-1] == pytest.approx(1.0, rel=1e-6)


def test_saturated_xx_chain_is_vacuum():
    spec = xy_chain_spec(6, 1, 1.0, 1.0, np.full(6, 3.0))
    gs = sector_ground_states(spec)
    assert gs[1].energy < gs[-1].energy
    assert abs(gs[1].vector[0]) == pytest.approx(1.0, abs=1e-9)
    scan = parity_transition_scan(lambda x: xy_chain_spec(6, 1, 1.0, 1.0, np.full(6, x)), np.linspace(3, 6, 5))
    assert scan.crossings == [] and scan.parities == [1]


def test_scan_rejects_bad_grid():
    with pytest.raises(ValueError):
        parity_transition_scan(lambda x: None, [1.0, 0.5])
