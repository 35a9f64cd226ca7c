import numpy as np

from xyzsep import verify
from xyzsep.factorization import derive_vy


def broken_vy(vx, vz, angles):
    # sign error in the sin*sin term
    s, c = np.sin(angles), np.cos(angles)
    return vx * np.outer(c, c) - vz * np.outer(s, s)


def unhalved_borders(cfg, scale):
    b = np.array(cfg.fields_at(scale))
    if cfg.topology == "open":
        b[0] *= 2
        b[-1] *= 2
    return b


def by_name(results):
    return {r.name: r for r in results}


def test_full_suite_passes():
    results = verify.verify_suite(seed=0)
    assert [r.name for r in results] == ["residual", "certification", "oracle", "monogamy", "identities", "degeneracy"]
    assert all(r.passed for r in results), verify.format_results(results)
    assert by_name(results)["residual"].checks == 50


def test_broken_vy_is_caught():
    res = by_name(verify.verify_suite(seed=1, vy_fn=broken_vy, quick=True))
    assert not res["residual"].passed
    assert not res["certification"].passed


def test_reference_vy_is_not_the_broken_one():
    angles = np.array([0.3, 1.2])
    vx = np.array([[0, 1.0], [1.0, 0]])
    assert not np.allclose(derive_vy(vx, 0.5 * vx, angles), broken_vy(vx, 0.5 * vx, angles))


def test_wrong_border_fields_are_caught():
    res = verify.degeneracy_suite(chain_fields=unhalved_borders)
    assert not res.passed


def test_report_formats():
    results = verify.verify_suite(seed=2, quick=True)
    text = verify.format_results(results)
    assert text.count("PASS") == len(results)
    assert len(verify.results_jsonl(results).splitlines()) == len(results)


def test_subsystem_pairs_are_disjoint():
    for B, C in verify.subsystem_pairs(4):
        assert not set(B) & set(C)
        assert 2 <= len(B) + len(C) <= 3
