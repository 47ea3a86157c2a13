"""Split-step evolution of the Schrödinger system on a periodic box.

The flow is ``i d_t Phi_j - Lap Phi_j = d_jF(|Phi|) Phi_j / |Phi_j|``, so a
standing wave ``exp(-i lam t) u`` solves it exactly when
``-Lap u + lam u = grad F(u)``.  Both Strang substeps preserve every
``|Phi_j|^2`` integral: the nonlinear one is a pointwise phase rotation and
the linear one is a unitary Fourier multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from .grid import PERIODIC, RADIAL, Domain, Field
from .nonlinearity import Nonlinearity


@dataclass(frozen=True)
class WaveState:
    """A complex field on a PeriodicBox1D at time ``t``."""

    field: Field
    t: float = 0.0

    def __post_init__(self):
        if self.field.domain.kind != PERIODIC:
            raise ValueError("wave states live on a PeriodicBox1D")

    @property
    def values(self) -> NDArray:
        return self.field.values

    def masses(self) -> NDArray:
        d = self.field.domain
        return np.array([d.integrate(np.abs(c) ** 2) for c in self.values])


def embed_radial(u: Field, box: Domain) -> Field:
    """Even extension ``u(|x|)`` of a one-dimensional radial field onto a periodic box."""
    if u.domain.kind != RADIAL or u.domain.N != 1 or box.kind != PERIODIC:
        raise ValueError("embedding needs a RadialN field with N=1 and a PeriodicBox1D")
    x = np.abs(box.r)
    r = np.concatenate([[0.0], u.domain.r])
    return Field(box, np.stack([np.interp(x, r, np.concatenate([[c[0]], c]), right=0.0) for c in u.values]))


def _phase_rates(F: Nonlinearity, V: NDArray) -> NDArray:
    mod = np.abs(V)
    G = F.grad_abs(mod)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mod > 0, G / np.where(mod > 0, mod, 1.0), 0.0)


def step(F: Nonlinearity, state: WaveState, dt: float) -> WaveState:
    """One Strang step: half nonlinear rotation, full linear flow, half rotation."""
    if not dt > 0:
        raise ValueError("time step must be positive")
    dom = state.field.domain
    V = np.asarray(state.values, dtype=complex)
    k2 = dom.wavenumbers**2
    V = V * np.exp(-0.5j * dt * _phase_rates(F, V))
    V = np.fft.ifft(np.fft.fft(V, axis=-1) * np.exp(1j * k2 * dt), axis=-1)
    V = V * np.exp(-0.5j * dt * _phase_rates(F, V))
    return WaveState(Field(dom, V), state.t + dt)


def wave_energy(F: Nonlinearity, state: WaveState) -> float:
    """``sum_j 1/2 |grad Phi_j|^2 - int F(|Phi|)`` with spectral derivatives."""
    dom = state.field.domain
    V = state.values
    return 0.5 * sum(dom.grad_norm_sq(c) for c in V) - dom.integrate(F.value(np.abs(V)))


def _h1_weight(dom: Domain) -> NDArray:
    n = dom.n_points
    return (1.0 + dom.wavenumbers**2) * dom.length / n**2


def h1_norm(dom: Domain, V: NDArray) -> float:
    """``(sum_j |Phi_j|_2^2 + |grad Phi_j|_2^2)^{1/2}`` via Parseval."""
    S = np.fft.fft(np.atleast_2d(V), axis=-1)
    return math.sqrt(float(np.sum(_h1_weight(dom) * np.abs(S) ** 2)))


def orbital_distance(state: WaveState, orbit: Sequence[Field]) -> float:
    """H^1 distance from ``state`` to the set ``{exp(i theta_j) u_j(. - y)}`` over the samples.

    Translations are located by the cross-correlation peak and refined
    continuously with Fourier shifts; phases are optimal per component.
    """
    if not orbit:
        raise ValueError("orbit sample set is empty")
    dom = state.field.domain
    w = _h1_weight(dom)
    k = dom.wavenumbers
    P = np.fft.fft(state.values, axis=-1)
    norm_p = float(np.sum(w * np.abs(P) ** 2))
    best = math.inf
    for u in orbit:
        if u.domain != dom or u.M != state.field.M:
            raise ValueError("orbit sample does not match the state's grid")
        U = np.fft.fft(u.values, axis=-1)
        cross = w * np.conj(U) * P
        norm_u = float(np.sum(w * np.abs(U) ** 2))
        # overlap of u(. - y) with Phi at every grid shift y = m h
        corr = np.fft.ifft(cross, axis=-1) * dom.n_points
        total = np.abs(corr).sum(axis=0)
        m = int(np.argmax(total))

        def neg_overlap(y):
            return -float(np.abs((cross * np.exp(1j * k * y)).sum(axis=-1)).sum())

        y0 = m * dom.h
        res = minimize_scalar(neg_overlap, bounds=(y0 - dom.h, y0 + dom.h), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, dom.length)})
        overlap = max(-res.fun, float(total[m]))
        best = min(best, math.sqrt(max(norm_p + norm_u - 2.0 * overlap, 0.0)))
    return best


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    masses: list[NDArray] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)
    final: WaveState | None = None

    def rows(self) -> list[list[float]]:
        out = []
        for i, t in enumerate(self.times):
            row = [t, *map(float, self.masses[i]), self.energies[i]]
            if self.distances:
                row.append(self.distances[i])
            out.append(row)
        return out


def evolve(F: Nonlinearity, state: WaveState, dt: float, T: float, observe_every: int = 1,
           orbit: Sequence[Field] | None = None) -> Trajectory:
    """Advance to time ``T`` with fixed steps, recording observables every few steps."""
    if not dt > 0 or T < 0:
        raise ValueError("need dt > 0 and T >= 0")
    n_steps = int(round(T / dt))
    traj = Trajectory()

    def record(s):
        traj.times.append(s.t)
        traj.masses.append(s.masses())
        traj.energies.append(wave_energy(F, s))
        if orbit:
            traj.distances.append(orbital_distance(s, orbit))

    record(state)
    for i in range(1, n_steps + 1):
        state = step(F, state, dt)
        if i % observe_every == 0 or i == n_steps:
            record(state)
    traj.final = state
    return traj


@dataclass
class ConservationReport:
    mass_drift: NDArray  # max relative deviation per component
    energy_drift: float  # max relative deviation (absolute if the initial energy vanishes)
    wraparound: float  # largest |Phi| at the box edge relative to the peak


def conservation_report(traj: Trajectory) -> ConservationReport:
    m = np.array(traj.masses)
    m0 = np.where(m[0] > 0, m[0], 1.0)
    mass_drift = np.max(np.abs(m - m[0]) / m0, axis=0)
    e = np.array(traj.energies)
    scale = abs(e[0]) if e[0] != 0 else 1.0
    wrap = 0.0
    if traj.final is not None:
        V = np.abs(traj.final.values)
        wrap = float(max(V[:, 0].max(), V[:, -1].max()) / max(V.max(), 1e-300))
    return ConservationReport(mass_drift, float(np.max(np.abs(e - e[0])) / scale), wrap)
