import numpy as np
import pytest
from hypothesis import given, strategies as st

from xyzsep.ed import full_spectrum, sector_ground_states
from xyzsep.factorization import (
    NoSeparableSolution,
    alternating_solution,
    canonicalize,
    complete_spec,
    derive_fields,
    derive_vy,
    eigen_residual,
    factorized_energy,
    gauge_to_certifiable,
    gs_certificate,
    overlap,
    random_factorized,
    solve,
    theta_state,
    uniform_solution,
    xy_chain_spec,
)
from xyzsep.model import ModelSpec, chain_couplings, dense_h


def brute_energy(spec, angles):
    psi = theta_state(spec.twice_s, angles)
    return float(psi @ dense_h(spec) @ psi)


def test_derive_vy_limits():
    vx = np.array([[0, 1.3], [1.3, 0]])
    vz = np.array([[0, -0.4], [-0.4, 0]])
    np.testing.assert_allclose(derive_vy(vx, vz, [0.0, 0.0]), vx)
    np.testing.assert_allclose(derive_vy(vx, vz, [np.pi / 2] * 2), vz, atol=1e-15)


def test_derive_vy_example():
    vx = np.array([[0, 1.0], [1.0, 0]])
    vz = np.zeros((2, 2))
    th = np.arccos(0.5)
    assert derive_vy(vx, vz, [th, th])[0, 1] == pytest.approx(0.25)
    spec = complete_spec((1, 1), vx, vz, [th, th])
    assert eigen_residual(spec, [th, th]) <= 1e-10


def test_zero_angles_are_field_free():
    vx = chain_couplings(3, 1.0)
    fp = derive_fields(vx, 0.5 * vx, np.zeros(3), (1, 1, 1))
    assert fp.free.all()


def test_degenerate_site_with_nonzero_rhs_raises():
    vx = chain_couplings(2, 1.0)
    with pytest.raises(NoSeparableSolution):
        derive_fields(vx, np.zeros((2, 2)), [0.0, 1.0], (1, 1))


def test_energy_without_couplings():
    z = np.zeros((3, 3))
    b = np.array([0.5, -1.0, 2.0])
    spec = ModelSpec((1, 2, 3), z, z, z, b)
    assert factorized_energy(spec, np.zeros(3)) == pytest.approx(-np.dot([0.5, 1, 1.5], b))


def test_energy_matches_expectation(rng):
    for _ in range(10):
        spec, angles = random_factorized(rng, n_max=4, dim_cap=512)
        assert factorized_energy(spec, angles) == pytest.approx(brute_energy(spec, angles), abs=1e-11)


def test_residual_on_random_configurations(rng):
    for _ in range(15):
        spec, angles = random_factorized(rng, n_max=5, dim_cap=1024)
        assert eigen_residual(spec, angles) <= 1e-10


def test_perturbed_field_breaks_eigenstate(rng):
    spec, angles = random_factorized(rng, n_max=4, theta_range=(0.3, 2.8))
    b = spec.b.copy()
    b[0] += 1e-3
    assert eigen_residual(spec.with_fields(b), angles) > 1e-4


def test_xxz_vacuum_is_eigenstate(rng):
    vx = rng.normal(size=(4, 4))
    vx = vx + vx.T
    np.fill_diagonal(vx, 0)
    vz = rng.normal(size=(4, 4))
    vz = vz + vz.T
    np.fill_diagonal(vz, 0)
    spec = ModelSpec((1, 2, 1, 3), vx, vx, vz, rng.normal(size=4))
    assert eigen_residual(spec, np.zeros(4)) <= 1e-12


def test_certified_energy_is_ground(rng):
    for _ in range(6):
        spec, angles = random_factorized(rng, n_max=5, dim_cap=1024, certified=True)
        ok, why = gs_certificate(spec, angles)
        assert ok, why
        e = factorized_energy(spec, angles)
        assert full_spectrum(spec)[0] == pytest.approx(e, abs=1e-9)


def test_factorized_level_is_degenerate(rng):
    spec, angles = random_factorized(rng, n_max=4, dim_cap=256, theta_range=(0.3, 2.8))
    ev = full_spectrum(spec)
    e = factorized_energy(spec, angles)
    assert np.sum(np.abs(ev - e) < 1e-9) >= 2


def test_certificate_rejects_strong_vy():
    vx = chain_couplings(3, 1.0)
    vy = vx.copy()
    vy[0, 1] = vy[1, 0] = 1.5
    spec = ModelSpec((1, 1, 1), vx, vy, np.zeros((3, 3)), np.zeros(3))
    ok, why = gs_certificate(spec, np.full(3, 0.5))
    assert not ok and "(0, 1)" in why


def test_ferromagnetic_uniform_chain_certified():
    cfg_vx = chain_couplings(5, 1.0)
    sol = uniform_solution(cfg_vx, np.zeros((5, 5)), (1,) * 5, chi=0.6)
    spec = ModelSpec((1,) * 5, cfg_vx, sol.vy, np.zeros((5, 5)), sol.fields.b)
    assert gs_certificate(spec, np.full(5, sol.theta))[0]


def test_antiferromagnetic_gauge():
    n, theta = 4, 0.7
    vx = chain_couplings(n, -1.0)
    vz = chain_couplings(n, -0.3)
    angles = theta * (-1.0) ** np.arange(n)
    spec = complete_spec((1,) * n, vx, vz, angles)
    assert not gs_certificate(spec, angles)[0]
    g_spec, g_angles = gauge_to_certifiable(spec, angles)
    assert gs_certificate(g_spec, g_angles)[0]
    np.testing.assert_allclose(full_spectrum(g_spec), full_spectrum(spec), atol=1e-12)
    assert full_spectrum(spec)[0] == pytest.approx(factorized_energy(spec, angles), abs=1e-10)


def test_canonicalize_preserves_spectrum_and_energy(rng):
    spec, angles = random_factorized(rng, n_max=4, dim_cap=256)
    c_spec, c_angles = canonicalize(spec, angles)
    assert np.all(np.abs(c_angles) <= np.pi / 2 + 1e-15)
    np.testing.assert_allclose(full_spectrum(c_spec), full_spectrum(spec), atol=1e-11)
    assert factorized_energy(c_spec, c_angles) == pytest.approx(factorized_energy(spec, angles), abs=1e-12)
    assert eigen_residual(c_spec, c_angles) <= 1e-10


def test_solve_reports_overlap():
    vx = chain_couplings(4, 1.0)
    angles = np.full(4, np.arccos(0.5))
    spec = complete_spec((1,) * 4, vx, np.zeros((4, 4)), angles)
    sol = solve(spec, angles)
    assert sol.overlap == pytest.approx(0.0625)
    assert sol.gs_certified


@given(st.floats(0.01, 0.99), st.integers(1, 3), st.sampled_from(["open", "cyclic"]))
def test_uniform_solution_residual_and_energy(chi, t, topology):
    n = 4
    vx = chain_couplings(n, 1.0, topology)
    vz = 0.2 * vx
    sol = uniform_solution(vx, vz, (t,) * n, chi=chi)
    spec = ModelSpec((t,) * n, vx, sol.vy, vz, sol.fields.b)
    angles = np.full(n, sol.theta)
    assert eigen_residual(spec, angles) <= 1e-10
    assert sol.energy == pytest.approx(factorized_energy(spec, angles), abs=1e-12)


def test_uniform_solution_from_vy_and_mixed_ratios():
    vx = chain_couplings(4, 1.0)
    sol = uniform_solution(vx, np.zeros((4, 4)), (1,) * 4, vy=0.5 * vx)
    assert np.cos(sol.theta) ** 2 == pytest.approx(0.5)
    bad = 0.5 * vx
    bad[0, 1] = bad[1, 0] = 0.3
    with pytest.raises(NoSeparableSolution):
        uniform_solution(vx, np.zeros((4, 4)), (1,) * 4, vy=bad)


def test_uniform_chi_one_is_xxz():
    vx = chain_couplings(3, 1.0)
    sol = uniform_solution(vx, np.zeros((3, 3)), (1,) * 3, chi=1.0)
    assert sol.theta == 0.0 and sol.fields.free.all()


def test_alternating_example():
    sol = alternating_solution(1.0, 0.25, 1, 6, eta=4.0)
    assert sol.b_e == pytest.approx(1.0) and sol.b_o == pytest.approx(0.25)
    assert np.cos(sol.theta_o) ** 2 == pytest.approx(0.125 / 1.0625)
    assert np.cos(sol.theta_e) ** 2 == pytest.approx(1.0625 / 2)
    assert np.cos(sol.theta_o) * np.cos(sol.theta_e) == pytest.approx(0.25, abs=1e-12)
    spec = xy_chain_spec(6, 1, 1.0, 0.25, sol.fields)
    assert eigen_residual(spec, sol.angles) <= 1e-10


def test_alternating_reduces_to_uniform():
    sol = alternating_solution(1.0, 0.49, 2, 5, eta=1.0)
    assert sol.theta_o == pytest.approx(sol.theta_e)
    assert sol.b_o == pytest.approx(2 * np.sqrt(0.49))


def test_alternating_large_even_field():
    sol = alternating_solution(1.0, 0.3, 1, 4, eta=1e6)
    assert np.cos(sol.theta_e) == pytest.approx(1.0, abs=1e-5)
    assert np.cos(sol.theta_o) == pytest.approx(0.3, abs=1e-5)


@given(st.floats(0.05, 0.95), st.floats(0.1, 20), st.integers(1, 3), st.sampled_from(["open", "cyclic"]))
def test_alternating_residual(chi, eta, t, topology):
    n = 4
    sol = alternating_solution(1.0, chi, t, n, topology, eta=eta)
    spec = xy_chain_spec(n, t, 1.0, chi, sol.fields, topology)
    assert eigen_residual(spec, sol.angles) <= 1e-10


def test_alternating_antiferromagnetic():
    sol = alternating_solution(-1.0, -0.4, 1, 6, eta=3.0)
    assert sol.theta_e < 0 < sol.theta_o
    spec = xy_chain_spec(6, 1, -1.0, -0.4, sol.fields)
    assert eigen_residual(spec, sol.angles) <= 1e-10
    gs = sector_ground_states(spec)
    assert min(g.energy for g in gs.values()) == pytest.approx(factorized_energy(spec, sol.angles), abs=1e-9)


def test_alternating_odd_cyclic_raises():
    with pytest.raises(NoSeparableSolution):
        alternating_solution(1.0, 0.5, 1, 5, "cyclic", eta=2.0)


def test_overlap_sign_and_value():
    assert overlap([np.pi / 3] * 4, (1,) * 4) == pytest.approx(0.0625)
    assert overlap([np.pi / 2, 0.1], (1, 1)) == pytest.approx(0.0, abs=1e-16)
