import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from normsys.functional import energy_gradient
from normsys.grid import Domain, Field
from normsys.nonlinearity import LogCusp, Nonlinearity, Power, PowerProduct
from normsys.solver import (
    MinimizeOptions,
    ThresholdViolation,
    antisymmetric_seed,
    antisymmetrize,
    dilate_mass,
    energy_map_monotone,
    minimize,
    project_D,
    scan_energy_map,
    subadditivity_check,
    verify_ground_state,
)

CUBIC = Nonlinearity(1, 1, [Power(0, 1.0, 4)])
D1 = Domain.radial(1, 60.0, 4096)


def m_cubic(a):
    return -(a**6) / 96


@given(st.lists(st.floats(0.1, 3.0), min_size=2, max_size=2), st.floats(0.1, 5.0))
def test_projection_is_idempotent_and_scales_down(a, scale):
    d = Domain.radial(2, 8.0, 200)
    u = Field(d, scale * np.stack([np.exp(-d.r**2), np.exp(-((d.r - 1) ** 2))]))
    p = project_D(u, a)
    for j in range(2):
        m0 = d.integrate(u.values[j] ** 2)
        m1 = d.integrate(p.values[j] ** 2)
        assert m1 <= a[j] ** 2 * (1 + 1e-12)
        if m0 <= a[j] ** 2:
            assert np.array_equal(p.values[j], u.values[j])
    assert np.allclose(project_D(p, a).values, p.values, rtol=1e-14)


def test_projection_length_mismatch():
    with pytest.raises(ValueError):
        project_D(Field(D1, np.zeros(D1.n_points)), [1.0, 2.0])


def test_cubic_ground_state_matches_closed_form():
    res = minimize(CUBIC, [1.0], Domain.radial(1, 60.0, 8192))
    assert res.converged, res.reason
    assert res.energy == pytest.approx(m_cubic(1.0), rel=1e-5)
    assert res.lam[0] == pytest.approx(1 / 16, rel=1e-5)
    assert res.saturation == [True]
    assert verify_ground_state(CUBIC, [1.0], res, strict_monotone=True).all_passed


def test_energy_log_is_nonincreasing():
    res = minimize(CUBIC, [1.0], D1, init="gaussian")
    J = np.array([row[1] for row in res.log])
    assert len(J) > 2
    assert np.all(np.diff(J) <= 1e-12 * np.abs(J[:-1]).max())


def test_decoupled_system_adds_energies():
    F = Nonlinearity(2, 1, [Power(0, 1.0, 4), Power(1, 1.0, 4)])
    res = minimize(F, [1.0, 1.0], D1)
    assert res.converged, res.reason
    assert res.energy == pytest.approx(2 * m_cubic(1.0), rel=1e-4)
    assert np.allclose(res.lam, 1 / 16, rtol=1e-4)


def test_coupled_system_beats_decoupled_sum():
    F = Nonlinearity(2, 1, [Power(0, 1.0, 4), Power(1, 1.0, 4), PowerProduct(0.5, (2, 2))])
    res = minimize(F, [1.0, 1.0], D1)
    assert res.converged, res.reason
    assert res.energy < 2 * m_cubic(1.0)
    assert verify_ground_state(F, [1.0, 1.0], res).all_passed


def test_log_cusp_ground_state():
    F = Nonlinearity(1, 1, [LogCusp(0)])
    res = minimize(F, [1.0], Domain.radial(1, 40.0, 2048), max_iter=20000)
    assert res.energy < 0
    assert res.saturation == [True]


def test_refuses_supercritical_mass():
    F = Nonlinearity(1, 1, [Power(0, 6.0, 6)])
    with pytest.raises(ThresholdViolation):
        minimize(F, [3.0], D1)


def test_option_validation():
    with pytest.raises(ValueError):
        MinimizeOptions(symmetry="Y")
    with pytest.raises(ValueError):
        MinimizeOptions(init="zero")
    with pytest.raises(ValueError):
        minimize(CUBIC, [1.0], D1, symmetry="X")
    with pytest.raises(ValueError):
        minimize(CUBIC, [1.0, 1.0], D1)


def test_verify_flags_unconverged_run():
    res = minimize(CUBIC, [1.0], D1, max_iter=3, init="gaussian")
    assert not res.converged
    rep = verify_ground_state(CUBIC, [1.0], res)
    assert not rep.all_passed
    assert any(line.startswith("FAIL converged") for line in rep.lines())


def test_antisymmetry_commutes_with_gradient():
    d = Domain.biradial(6.0, 48)
    F = Nonlinearity(1, 4, [Power(0, 1.0, 2.5)])
    r1, r2 = np.meshgrid(d.r, d.r, indexing="ij")
    U = antisymmetric_seed(d, np.exp(-(r1**2 + r2**2) / 4)[None])
    assert np.array_equal(antisymmetrize(U), U)
    G = energy_gradient(F, Field(d, U)).values
    assert np.allclose(antisymmetrize(G), G, atol=1e-12 * np.abs(G).max())


def test_antisymmetric_seed_requires_biradial():
    with pytest.raises(ValueError):
        antisymmetric_seed(D1, np.ones(D1.n_points))


def test_dilate_mass_scales_mass():
    u = Field(D1, np.exp(-D1.r**2))
    m0 = D1.integrate(u.values[0] ** 2)
    assert D1.integrate(dilate_mass(u, 2.0).values[0] ** 2) == pytest.approx(2 * m0, rel=1e-4)


def dom_for(mass):
    a = float(mass.norm)
    return Domain.radial(1, 48.0 / a**2, 4096)


def test_energy_map_scan_is_monotone_and_exact():
    recs = scan_energy_map(CUBIC, [[0.75], [1.0], [1.25]], dom_for)
    assert all(r.converged for r in recs)
    assert energy_map_monotone(recs).passed
    for r in recs:
        assert r.m == pytest.approx(m_cubic(r.a.a[0]), rel=1e-4)
    assert recs[1].init == "warm"


def test_subadditivity_slack_for_cubic():
    rep = subadditivity_check(CUBIC, [1.0], [1.0], dom_for)
    assert rep.converged and rep.saturated
    assert rep.slack == pytest.approx(6 / 96, rel=1e-3)
    assert all(c.passed for c in rep.checks())
