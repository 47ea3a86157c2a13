import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from normsys.grid import Domain, Field, dilate, grad_norm_sq, integrate, laplacian, lp_norm, mass, sphere_area


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_gaussian_integral(N):
    d = Domain.radial(N, 12.0, 4096)
    assert integrate(d, np.exp(-d.r**2)) == pytest.approx(math.pi ** (N / 2), rel=1e-6)


def test_sphere_area_values():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_laplacian_second_order():
    errs = []
    for n in (200, 400, 800):
        d = Domain.radial(3, 8.0, n)
        u = np.exp(-d.r**2)
        exact = (4 * d.r**2 - 6) * u
        inner = d.r < 6
        errs.append(np.abs(d.laplacian(u) - exact)[inner].max())
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.15)


@pytest.mark.parametrize("kind", ["radial", "biradial"])
def test_summation_by_parts(kind):
    d = Domain.radial(2, 6.0, 300) if kind == "radial" else Domain.biradial(6.0, 64)
    rng = np.random.default_rng(1)
    u = rng.normal(size=d.shape) * np.exp(-d.radius**2 / 4)
    assert -d.integrate(u * d.laplacian(u)) == pytest.approx(d.grad_norm_sq(u), rel=1e-12)


def test_laplacian_matrix_matches_operator():
    d = Domain.biradial(5.0, 40)
    u = np.exp(-d.radius**2) * (1 + d.radius)
    np.testing.assert_allclose((d.laplacian_matrix @ u.ravel()).reshape(d.shape), d.laplacian(u), atol=1e-12)


def test_biradial_is_four_dimensional():
    d = Domain.biradial(10.0, 400)
    assert d.N == 4
    assert d.integrate(np.exp(-d.radius**2)) == pytest.approx(math.pi**2, rel=2e-3)


def test_periodic_spectral_gradient():
    d = Domain.periodic(2 * math.pi, 64)
    assert d.grad_norm_sq(np.sin(3 * d.r)) == pytest.approx(9 * math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        d.laplacian(np.zeros(64))


@given(st.floats(0.5, 2.0))
def test_dilation_scaling_laws(s):
    d = Domain.radial(2, 40.0, 4000)
    u = Field(d, np.exp(-d.r**2 / 2))
    v = dilate(u, s)
    assert mass(v) == pytest.approx(mass(u), rel=1e-4)
    assert grad_norm_sq(v) == pytest.approx(s**2 * grad_norm_sq(u), rel=1e-3)


def test_dilation_rejects_nonpositive():
    d = Domain.radial(1, 5.0, 50)
    with pytest.raises(ValueError):
        dilate(Field(d, np.ones(50)), 0.0)


def test_lp_norm_of_vector_modulus():
    d = Domain.radial(1, 10.0, 2000)
    u = Field(d, np.stack([np.exp(-d.r**2), np.exp(-d.r**2)]))
    assert lp_norm(u, 2) ** 2 == pytest.approx(2 * integrate(d, np.exp(-2 * d.r**2)), rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm(u, 0.5)


def test_laplacian_of_field():
    d = Domain.radial(1, 10.0, 2000)
    u = Field(d, np.exp(-d.r**2))
    np.testing.assert_allclose(laplacian(u)[:1500], ((4 * d.r**2 - 2) * np.exp(-d.r**2))[:1500], atol=1e-4)


def test_field_is_read_only_and_finite():
    d = Domain.radial(1, 5.0, 10)
    f = Field(d, np.ones(10))
    with pytest.raises(ValueError):
        f.values[0] = 2.0
    with pytest.raises(ValueError):
        Field(d, np.full(10, np.nan))
    with pytest.raises(ValueError):
        Field(d, np.ones(11))


@pytest.mark.parametrize("dom", [Domain.radial(3, 5.0, 17), Domain.biradial(4.0, 6), Domain.periodic(10.0, 16)])
def test_serialization_round_trip(dom):
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(2,) + dom.shape)
    if dom.kind == "PeriodicBox1D":
        vals = vals + 1j * rng.normal(size=vals.shape)
    f = Field(dom, vals)
    g = Field.from_json(f.to_json())
    h = Field.from_csv(f.to_csv(), dom)
    assert g.domain == dom
    np.testing.assert_array_equal(g.values, f.values)
    np.testing.assert_array_equal(h.values, f.values)
    assert Domain.from_dict(dom.to_dict()) == dom
