import math

import numpy as np
import pytest

from normsys.dynamics import (
    WaveState,
    conservation_report,
    embed_radial,
    evolve,
    h1_norm,
    orbital_distance,
    step,
    wave_energy,
)
from normsys.grid import Domain, Field
from normsys.nonlinearity import Nonlinearity, Power, PowerProduct

CUBIC = Nonlinearity(1, 1, [Power(0, 1.0, 4)])
BOX = Domain.periodic(120.0, 1024)


def sech(x, B):
    return math.sqrt(2) * B / np.cosh(B * x)


def test_state_requires_periodic_domain():
    with pytest.raises(ValueError):
        WaveState(Field(Domain.radial(1, 5.0, 10), np.zeros(10)))


def test_embed_radial_even_extension():
    d = Domain.radial(1, 30.0, 3000)
    u = Field(d, sech(d.r, 0.5))
    e = embed_radial(u, BOX)
    assert np.allclose(e.values[0], sech(BOX.r, 0.5), atol=1e-4)
    with pytest.raises(ValueError):
        embed_radial(Field(Domain.radial(2, 5.0, 10), np.zeros(10)), BOX)


def test_step_preserves_mass_and_requires_positive_dt():
    F = Nonlinearity(2, 1, [Power(0, 1.0, 4), Power(1, 1.0, 4), PowerProduct(0.4, (2, 2))])
    rng = np.random.default_rng(0)
    V = np.stack([np.exp(-BOX.r**2 / 10) * (1 + 0.1j * rng.standard_normal(BOX.n_points)) for _ in range(2)])
    s = WaveState(Field(BOX, V))
    s2 = step(F, s, 0.05)
    assert np.allclose(s2.masses(), s.masses(), rtol=1e-12)
    assert s2.t == pytest.approx(0.05)
    with pytest.raises(ValueError):
        step(F, s, 0.0)


def test_standing_wave_keeps_its_modulus():
    B = 0.5
    s = WaveState(Field(BOX, sech(BOX.r, B).astype(complex)))
    traj = evolve(CUBIC, s, 0.005, 2.0, observe_every=100)
    assert np.abs(np.abs(traj.final.values[0]) - sech(BOX.r, B)).max() < 1e-4
    # the phase turns as exp(-i lam t) with lam = B^2
    phase = np.angle(traj.final.values[0][BOX.n_points // 2] / s.values[0][BOX.n_points // 2])
    assert phase == pytest.approx(-(B**2) * 2.0, abs=1e-3)


def test_energy_drift_is_second_order():
    V = 1.2 * sech(BOX.r, 0.5).astype(complex)
    drifts = []
    for dt in (0.04, 0.02):
        traj = evolve(CUBIC, WaveState(Field(BOX, V)), dt, 4.0, observe_every=5)
        drifts.append(conservation_report(traj).energy_drift)
    assert drifts[0] / drifts[1] == pytest.approx(4.0, rel=0.2)


def test_wave_energy_of_soliton():
    B = 0.5
    s = WaveState(Field(BOX, sech(BOX.r, B).astype(complex)))
    assert wave_energy(CUBIC, s) == pytest.approx(-2 * B**3 / 3, rel=1e-8)


def test_orbital_distance_finds_translation_and_phase():
    u = Field(BOX, sech(BOX.r, 0.5))
    shifted = np.exp(0.7j) * sech(BOX.r - 3.3 * BOX.h, 0.5)
    d = orbital_distance(WaveState(Field(BOX, shifted)), [u])
    assert d < 1e-6 * h1_norm(BOX, u.values)


def test_orbital_distance_positive_off_orbit():
    u = Field(BOX, sech(BOX.r, 0.5))
    other = WaveState(Field(BOX, sech(BOX.r, 0.6).astype(complex)))
    assert orbital_distance(other, [u]) > 1e-2
    with pytest.raises(ValueError):
        orbital_distance(other, [])


def test_trajectory_rows_and_wraparound():
    s = WaveState(Field(BOX, sech(BOX.r, 0.5).astype(complex)))
    traj = evolve(CUBIC, s, 0.01, 0.1, observe_every=5, orbit=[Field(BOX, sech(BOX.r, 0.5))])
    rows = traj.rows()
    assert len(rows) == 3 and len(rows[0]) == 4
    assert conservation_report(traj).wraparound < 1e-10
