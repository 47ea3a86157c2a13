"""Projected-gradient minimization of the energy over the mass ball.

Each iteration takes a Sobolev-preconditioned descent direction
``d_j = K (g_j + lam_j u_j)`` with ``K = (c - Lap)^{-1}`` and ``g`` the L^2
gradient.  On a component whose mass constraint is active, ``lam_j >= 0`` is
chosen to make ``d_j`` tangent to the sphere; the step is then projected back
onto the ball (scale-down only).  The step length is Barzilai-Borwein with
Armijo backtracking on J.  At a fixed point, ``g_j + lam_j u_j = 0`` with
``lam_j >= 0``, vanishing unless the constraint is active.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import identity
from scipy.sparse.linalg import splu

from .functional import (
    MassSpec,
    TrialFailure,
    check_thresholds,
    energy_array,
    gradient_array,
    multipliers,
    pde_residual,
    pohozaev_residual,
    trial_negative,
)
from .grid import BIRADIAL, RADIAL, Domain, Field
from .nonlinearity import Nonlinearity
from .rearrange import schwarz


class ThresholdViolation(ValueError):
    """The upper mass condition fails, so the energy is not known to be coercive."""


@dataclass(frozen=True)
class Check:
    """A named pass/fail verdict with its measured margin (positive = passing)."""

    name: str
    passed: bool
    margin: float
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: margin {self.margin:.6g}" + (f" ({self.detail})" if self.detail else "")


# -- projection and symmetry ---------------------------------------------------


def _project(dom: Domain, U: NDArray, a: NDArray) -> NDArray:
    out = U.copy()
    for j in range(U.shape[0]):
        m = dom.integrate(U[j] ** 2)
        if m > a[j] ** 2:
            out[j] *= a[j] / math.sqrt(m)
    return out


def project_D(u: Field, a: Sequence[float] | MassSpec) -> Field:
    """Componentwise projection onto ``{|u_j|_2 <= a_j}``: only scales down."""
    a = np.asarray(a.a if isinstance(a, MassSpec) else a, dtype=float)
    if a.shape != (u.M,):
        raise ValueError("mass tuple length differs from the number of components")
    return Field(u.domain, _project(u.domain, u.values, a))


def antisymmetrize(U: NDArray) -> NDArray:
    """``(u(r1, r2) - u(r2, r1)) / 2`` on every component of a BiRadial array."""
    return 0.5 * (U - np.swapaxes(U, -1, -2))


def antisymmetric_seed(domain: Domain, profile: NDArray) -> NDArray:
    """``profile * chi(r1 - r2)`` with ``chi(t) = sin(pi t / 2)`` on ``|t| < 1``, ``sign t`` outside."""
    if domain.kind != BIRADIAL:
        raise ValueError("the antisymmetric seed lives on a BiRadial domain")
    r1, r2 = np.meshgrid(domain.r, domain.r, indexing="ij")
    t = r1 - r2
    chi = np.where(np.abs(t) < 1.0, np.sin(0.5 * np.pi * t), np.sign(t))
    return profile * chi


# -- minimizer -----------------------------------------------------------------


@dataclass
class MinimizeOptions:
    init: str | Field = "trial"  # "trial", "gaussian" or an explicit Field
    symmetry: str = "radial"  # "radial" or "X"
    max_iter: int = 20000
    tol: float = 1e-9  # stationarity, relative to max(1, |u|_2)
    pde_tol: float = 1e-5
    saturation_tol: float = 1e-6
    rearrange_every: int = 0
    force: bool = False
    shift: float = 1.0
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.symmetry not in ("radial", "X"):
            raise ValueError("symmetry must be 'radial' or 'X'")
        if isinstance(self.init, str) and self.init not in ("trial", "gaussian"):
            raise ValueError("init must be 'trial', 'gaussian' or a Field")
        if self.max_iter < 1 or self.tol <= 0 or self.restarts < 1 or self.shift <= 0:
            raise ValueError("max_iter, tol, restarts and shift must be positive")


@dataclass
class MinimizeResult:
    u: Field
    energy: float
    lam: NDArray
    pde_residual: float
    pohozaev: float
    saturation: list[bool]
    iterations: int
    converged: bool
    symmetry: str
    stationarity: float
    initial_energy: float
    init: str
    reason: str = ""
    tol: float = math.nan
    log: list[tuple[int, float, float, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = self.u.domain
        return {
            "energy": self.energy,
            "lambda": [float(x) for x in self.lam],
            "pde_residual": self.pde_residual,
            "pohozaev": self.pohozaev,
            "saturation": list(self.saturation),
            "masses": [d.integrate(c * c) for c in self.u.values],
            "iterations": self.iterations,
            "converged": self.converged,
            "symmetry": self.symmetry,
            "stationarity": self.stationarity,
            "initial_energy": self.initial_energy,
            "init": self.init,
            "reason": self.reason,
            "domain": d.to_dict(),
        }


def _gaussian(dom: Domain, a: NDArray) -> NDArray:
    """Gaussians saturating every mass constraint."""
    g = np.exp(-0.5 * dom.radius**2)
    g /= math.sqrt(dom.integrate(g * g))
    return np.stack([aj * g for aj in a])


def _initial(F: Nonlinearity, a: NDArray, dom: Domain, opts: MinimizeOptions) -> tuple[NDArray, str]:
    if isinstance(opts.init, Field):
        if opts.init.domain != dom or opts.init.M != F.M:
            raise ValueError("initial field does not match the domain or component count")
        U, label = np.array(opts.init.values, dtype=float), "given"
    elif opts.init == "trial":
        try:
            U, label = trial_negative(F, a, dom).u.values.copy(), "trial"
        except TrialFailure:
            U, label = _gaussian(dom, a), "gaussian"
    else:
        U, label = _gaussian(dom, a), "gaussian"
    if opts.symmetry == "X":
        U = antisymmetric_seed(dom, U)
        for j in range(F.M):
            m = dom.integrate(U[j] ** 2)
            if m > 0:
                U[j] *= a[j] / math.sqrt(m)
        U = _spread_until_negative(F, dom, U)
        label += "+antisymmetric"
    return _project(dom, U, a), label


def _spread_until_negative(F: Nonlinearity, dom: Domain, U: NDArray, shrink: float = 0.8, s_min: float = 1e-2) -> NDArray:
    """Mass-preserving dilation of ``U`` until its energy is negative, staying off the boundary."""
    if energy_array(F, dom, U) < 0:
        return U
    peak = np.abs(U).max()
    s = shrink
    while s >= s_min:
        V = np.stack([dom.dilate(c, s) for c in U])
        if dom.boundary_value(np.abs(V).max(axis=0)) > 1e-3 * peak * s ** (dom.N / 2):
            break
        if energy_array(F, dom, V) < 0:
            return V
        s *= shrink
    return U


class _Preconditioner:
    def __init__(self, dom: Domain, shift: float):
        A = shift * identity(int(np.prod(dom.shape)), format="csc") - dom.laplacian_matrix.tocsc()
        self._lu = splu(A.tocsc())
        self._shape = dom.shape

    def __call__(self, U: NDArray) -> NDArray:
        return np.stack([self._lu.solve(np.ascontiguousarray(c).ravel()).reshape(self._shape) for c in U])


def _descend(F, a, dom, U, opts, K, active_tol=1e-10):
    """One full projected-gradient run from ``U``; returns (U, J, iters, stat, converged, reason, log)."""
    X = opts.symmetry == "X"
    use_schwarz = opts.rearrange_every > 0 and opts.symmetry == "radial" and dom.kind == RADIAL and F.is_monotone()

    def evaluate(V):
        kin = sum(dom.grad_norm_sq(c) for c in V)
        return 0.5 * kin - dom.integrate(F.value(V)), kin

    def stationarity(V, G):
        r = V - _project(dom, V - G, a)
        return math.sqrt(dom.inner(r, r)) / max(1.0, math.sqrt(dom.inner(V, V)))

    J, kin = evaluate(U)
    G = gradient_array(F, dom, U)
    log = [(0, J, stationarity(U, G), 0.0)]
    tau, tau_min, tau_max = 1.0, 1e-12, 1e4
    prev = None
    reason = "max_iter reached"
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        stat = stationarity(U, G)
        if stat <= opts.tol:
            converged, reason = True, ""
            it -= 1
            break
        KG, KU = K(G), K(U)
        d = KG.copy()
        lam_hat = np.zeros(F.M)
        for j in range(F.M):
            if dom.integrate(U[j] ** 2) >= a[j] ** 2 * (1.0 - active_tol):
                den = dom.integrate(KU[j] * U[j])
                if den > 0:
                    lam_hat[j] = max(0.0, -dom.integrate(KG[j] * U[j]) / den)
                    d[j] += lam_hat[j] * KU[j]
        if prev is not None:
            s, y = U - prev[0], d - prev[1]
            sy = dom.inner(s, y)
            tau = dom.inner(s, s) / sy if sy > 0 else 2.0 * tau
            tau = min(max(tau, 1e-6), tau_max)
        lam_b = lam_hat.reshape((-1,) + (1,) * (U.ndim - 1))
        descent = dom.inner(G + lam_b * U, d)
        slack = 1e-13 * (abs(J) + kin)
        while True:
            Un = _project(dom, U - tau * d, a)
            if X:
                Un = antisymmetrize(Un)
            Jn, kn = evaluate(Un)
            if Jn <= J - 1e-4 * tau * descent + slack and Jn <= J + slack:
                break
            tau *= 0.5
            if tau < tau_min:
                break
        if tau < tau_min:
            reason = "step collapse in line search"
            break
        prev = (U, d)
        U, J, kin = Un, Jn, kn
        if use_schwarz and it % opts.rearrange_every == 0:
            Us = schwarz(Field(dom, U), target=dom).values
            Js, ks = evaluate(Us)
            if Js <= J:
                U, J, kin, prev = Us, Js, ks, None
        G = gradient_array(F, dom, U)
        log.append((it, J, stationarity(U, G), tau))
    else:
        stat = stationarity(U, G)
        converged = stat <= opts.tol
        reason = "" if converged else reason
    return U, J, it, stationarity(U, G), converged, reason, log


def minimize(F: Nonlinearity, a: Sequence[float] | MassSpec, domain: Domain,
             options: MinimizeOptions | None = None, **kw) -> MinimizeResult:
    """Minimize J over the mass ball ``{|u_j|_2 <= a_j}`` on ``domain``.

    Raises
    ------
    ThresholdViolation
        If the upper mass condition fails and ``force`` is not set.
    """
    opts = options or MinimizeOptions(**kw)
    mass = a if isinstance(a, MassSpec) else MassSpec(tuple(a))
    a = mass.array()
    if mass.M != F.M:
        raise ValueError(f"mass tuple has {mass.M} entries, nonlinearity has M={F.M}")
    if domain.kind not in (RADIAL, BIRADIAL) or domain.N != F.N:
        raise ValueError("domain must be RadialN or BiRadial with the nonlinearity's N")
    if opts.symmetry == "X" and domain.kind != BIRADIAL:
        raise ValueError("symmetry X needs a BiRadial domain")
    if not opts.force:
        rep = check_thresholds(F, a)
        if not rep.etas_ok:
            raise ThresholdViolation(
                f"upper mass condition fails: 2 eta_inf C^2# |a|^(4/N) = {rep.lhs_upper:.6g} >= 1")

    U0, label = _initial(F, a, domain, opts)
    J0 = energy_array(F, domain, U0)
    K = _Preconditioner(domain, opts.shift)
    best = None
    rng = np.random.default_rng(opts.seed)
    for k in range(opts.restarts):
        start = U0
        if k > 0:
            # smooth multiplicative perturbation of the base initial guess
            bumps = 1.0 + 0.2 * np.cos(rng.uniform(0.2, 2.0) * domain.radius + rng.uniform(0, 2 * np.pi))
            start = _project(domain, U0 * bumps, a)
            if opts.symmetry == "X":
                start = antisymmetrize(start)
        run = _descend(F, a, domain, start, opts, K)
        if best is None or (run[4], -run[1]) > (best[4], -best[1]):
            best = run
    U, J, iters, stat, converged, reason, log = best
    u = Field(domain, U)
    masses = np.array([domain.integrate(c * c) for c in U])
    if np.all(masses > 0):
        lam = multipliers(F, u)
        res = pde_residual(F, u, lam)
        poh = pohozaev_residual(F, u, lam)
    else:
        lam, res, poh = np.full(F.M, np.nan), math.nan, math.nan
    if converged and not res <= opts.pde_tol:
        converged, reason = False, f"pde residual {res:.3g} above {opts.pde_tol:g}"
    saturation = [bool(math.sqrt(m) >= aj - opts.saturation_tol) for m, aj in zip(masses, a)]
    return MinimizeResult(u, J, lam, res, poh, saturation, iters, converged, opts.symmetry, stat, J0, label, reason,
                          opts.tol, log)


# -- energy map studies --------------------------------------------------------

DomainFor = Callable[[MassSpec], Domain]


@dataclass(frozen=True)
class EnergyMapRecord:
    a: MassSpec
    m: float
    converged: bool
    saturated: bool
    init: str
    seed: int

    def row(self) -> list:
        return [*self.a.a, self.m, self.converged]


def _domain_for(domain: Domain | DomainFor, mass: MassSpec) -> Domain:
    return domain(mass) if callable(domain) else domain


def _transfer(u: Field, target: Domain) -> NDArray:
    if u.domain == target:
        return u.values.copy()
    if u.domain.kind != RADIAL or target.kind != RADIAL:
        raise ValueError("warm starts across different grids need RadialN domains")
    return np.stack([np.interp(target.r, u.domain.r, c, right=0.0) for c in u.values])


def scan_energy_map(F: Nonlinearity, a_grid: Sequence[Sequence[float] | MassSpec], domain: Domain | DomainFor,
                    options: MinimizeOptions | None = None, warm_start: bool = True) -> list[EnergyMapRecord]:
    """Best-found ``m(a)`` along a sequence of mass tuples, warm-starting each run."""
    opts = options or MinimizeOptions()
    records: list[EnergyMapRecord] = []
    last: tuple[MassSpec, Field] | None = None
    for raw in a_grid:
        mass = raw if isinstance(raw, MassSpec) else MassSpec(tuple(np.atleast_1d(raw)))
        dom = _domain_for(domain, mass)
        run_opts = opts
        if warm_start and last is not None:
            V = _transfer(last[1], dom) * (mass.array() / last[0].array())[:, None]
            if dom.kind == BIRADIAL:
                V = V.reshape((F.M,) + dom.shape)
            run_opts = _replace(opts, init=Field(dom, V))
        res = minimize(F, mass, dom, run_opts)
        init = "warm" if run_opts is not opts else res.init
        records.append(EnergyMapRecord(mass, res.energy, res.converged, all(res.saturation), init, opts.seed))
        last = (mass, res.u)
    return records


def _replace(opts: MinimizeOptions, **kw) -> MinimizeOptions:
    from dataclasses import replace

    return replace(opts, **kw)


def energy_map_monotone(records: Sequence[EnergyMapRecord], tol: float = 1e-10) -> Check:
    """``m(a) >= m(b)`` whenever ``a <= b`` componentwise, across all record pairs."""
    worst = math.inf
    for r in records:
        for s in records:
            if r is not s and np.all(r.a.array() <= s.a.array()):
                worst = min(worst, r.m - s.m)
    worst = worst if math.isfinite(worst) else 0.0
    return Check("energy map nonincreasing", worst >= -tol, worst)


@dataclass
class SubadditivityReport:
    m_a: float
    m_b: float
    m_ab: float
    slack: float
    saturated: bool
    converged: bool
    scaling: list[tuple[float, float, float]]  # (s, m(sqrt(s) b), J(v(x / s^{1/N})))

    def checks(self, tol: float = 1e-6) -> list[Check]:
        out = [Check("subadditivity", self.slack >= -tol, self.slack)]
        if self.saturated:
            out.append(Check("strict subadditivity", self.slack > 0, self.slack))
        for s, m, j in self.scaling:
            out.append(Check(f"scaling bound s={s:g}", m <= j + tol, j - m))
        return out


def dilate_mass(u: Field, s: float) -> Field:
    """``v(x / s^{1/N})``: multiplies every component mass by ``s``."""
    dom = u.domain
    sigma = s ** (-1.0 / dom.N)
    return Field(dom, math.sqrt(s) * np.stack([dom.dilate(c, sigma) for c in u.values]))


def subadditivity_check(F: Nonlinearity, a: Sequence[float] | MassSpec, b: Sequence[float] | MassSpec,
                        domain: Domain | DomainFor, options: MinimizeOptions | None = None,
                        scaling_s: Sequence[float] = (1.5, 2.0)) -> SubadditivityReport:
    """Minimize at ``a``, ``b`` and ``sqrt(a^2 + b^2)`` and report the slack."""
    opts = options or MinimizeOptions()
    ma = a if isinstance(a, MassSpec) else MassSpec(tuple(np.atleast_1d(a)))
    mb = b if isinstance(b, MassSpec) else MassSpec(tuple(np.atleast_1d(b)))
    mab = ma.combine(mb)
    ra = minimize(F, ma, _domain_for(domain, ma), opts)
    rb = minimize(F, mb, _domain_for(domain, mb), opts)
    rab = minimize(F, mab, _domain_for(domain, mab), opts)
    scaling = []
    for s in scaling_s:
        ms = MassSpec(tuple(math.sqrt(s) * x for x in mb.a))
        rs = minimize(F, ms, rb.u.domain, opts)
        scaling.append((s, rs.energy, energy_array(F, rb.u.domain, dilate_mass(rb.u, s).values)))
    sat = all(ra.saturation) and all(rb.saturation) and all(rab.saturation)
    conv = ra.converged and rb.converged and rab.converged
    return SubadditivityReport(ra.energy, rb.energy, rab.energy, ra.energy + rb.energy - rab.energy, sat, conv, scaling)


@dataclass
class GroundStateReport:
    checks: list[Check]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def verify_ground_state(F: Nonlinearity, a: Sequence[float] | MassSpec, result: MinimizeResult,
                        strict_monotone: bool = False, pde_tol: float = 1e-5, pohozaev_tol: float = 5e-3,
                        saturation_tol: float = 1e-6) -> GroundStateReport:
    """Check sign, monotonicity, multipliers, saturation and the Pohozaev identity of a result."""
    a = np.asarray(a.a if isinstance(a, MassSpec) else a, dtype=float)
    u = result.u
    dom = u.domain
    checks = [
        Check("converged", result.converged,
              result.tol - result.stationarity if math.isfinite(result.tol) else -result.stationarity, result.reason),
        Check("pde residual", result.pde_residual <= pde_tol, pde_tol - result.pde_residual),
        Check("negative energy", result.energy < 0, -result.energy),
        Check("pohozaev identity", abs(result.pohozaev) <= pohozaev_tol, pohozaev_tol - abs(result.pohozaev)),
    ]
    for j in range(u.M):
        c = u.values[j]
        checks.append(Check(f"lambda_{j + 1} > 0", result.lam[j] > 0, float(result.lam[j])))
        checks.append(Check(f"saturation_{j + 1}", math.sqrt(dom.integrate(c * c)) >= a[j] - saturation_tol,
                            math.sqrt(dom.integrate(c * c)) - a[j] + saturation_tol))
        if result.symmetry == "X":
            continue
        peak = np.abs(c).max()
        sign = 1.0 if c.flat[np.argmax(np.abs(c))] >= 0 else -1.0
        cs = sign * c
        checks.append(Check(f"constant sign_{j + 1}", bool(cs.min() >= -1e-12 * peak) and cs.flat[0] > 0,
                            float(cs.min() / peak) if peak > 0 else 0.0))
        if dom.kind == RADIAL:
            jumps = np.diff(cs)
            bad = int(np.sum(jumps > 1e-12 * peak))
            checks.append(Check(f"radially nonincreasing_{j + 1}", bad == 0, -float(max(jumps.max(), 0.0)), f"{bad} violations"))
            if strict_monotone:
                bulk = cs[:-1] > 1e-8 * peak
                strict = bool(np.all(jumps[bulk] < 0))
                checks.append(Check(f"strictly decreasing_{j + 1}", strict, -float(jumps[bulk].max()) if bulk.any() else 0.0))
    return GroundStateReport(checks)
