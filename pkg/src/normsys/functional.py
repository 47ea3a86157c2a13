"""Energy functional, Gagliardo-Nirenberg data and threshold conditions.

The energy is ``J(u) = int 1/2 |grad u|^2 - F(u) dx`` evaluated with the
discrete operators of :mod:`normsys.grid`; its L^2 gradient is
``-Lap u_j - d_j F(u)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad, solve_ivp

from .grid import Domain, Field, sphere_area
from .nonlinearity import Nonlinearity, eta_estimate, sphere_directions, two_sharp


class TrialFailure(RuntimeError):
    """No negative-energy trial function could be built."""


class EtaUnavailable(ValueError):
    """A growth constant has no closed form and estimation was disabled."""


# -- array-level kernels (shared with the solver) --------------------------


def energy_array(F: Nonlinearity, dom: Domain, U: NDArray) -> float:
    kinetic = sum(dom.grad_norm_sq(c) for c in U)
    return 0.5 * kinetic - dom.integrate(F.value(U))


def gradient_array(F: Nonlinearity, dom: Domain, U: NDArray) -> NDArray:
    lap = np.stack([dom.laplacian(c) for c in U])
    return -lap - F.grad(U)


def _check(F: Nonlinearity, u: Field):
    if u.domain.kind not in ("RadialN", "BiRadial"):
        raise ValueError("energy needs a RadialN or BiRadial domain")
    if F.M != u.M:
        raise ValueError(f"nonlinearity has M={F.M}, field has M={u.M}")
    if F.N != u.domain.N:
        raise ValueError(f"nonlinearity has N={F.N}, domain has N={u.domain.N}")


def energy(F: Nonlinearity, u: Field) -> float:
    """Discrete value of J(u)."""
    _check(F, u)
    return energy_array(F, u.domain, u.values)


def energy_gradient(F: Nonlinearity, u: Field) -> Field:
    """The unconstrained L^2 gradient ``(-Lap u_j - d_j F(u))_j``."""
    _check(F, u)
    return Field(u.domain, gradient_array(F, u.domain, u.values))


def multipliers(F: Nonlinearity, u: Field) -> NDArray:
    """Lagrange multipliers from pairing the Euler-Lagrange equation with u_j.

    ``lambda_j = (int d_jF(u) u_j - |grad u_j|^2) / |u_j|^2``; meaningful only
    near a critical point, see :func:`pde_residual`.
    """
    _check(F, u)
    dom = u.domain
    G = F.grad(u.values)
    lam = np.empty(u.M)
    for j in range(u.M):
        m = dom.integrate(u.values[j] ** 2)
        if m <= 0:
            raise ValueError(f"component {j} vanishes; multiplier undefined")
        lam[j] = (dom.integrate(G[j] * u.values[j]) - dom.grad_norm_sq(u.values[j])) / m
    return lam


def pde_residual(F: Nonlinearity, u: Field, lam: Sequence[float]) -> float:
    """Relative L^2 residual of ``-Lap u_j + lambda_j u_j = d_jF(u)``, max over j."""
    _check(F, u)
    dom = u.domain
    G = F.grad(u.values)
    worst = 0.0
    for j in range(u.M):
        lap = dom.laplacian(u.values[j])
        res = -lap + lam[j] * u.values[j] - G[j]
        n = lambda f: math.sqrt(max(dom.integrate(f * f), 0.0))
        scale = n(lap) + abs(lam[j]) * n(u.values[j]) + n(G[j])
        if scale > 0:
            worst = max(worst, n(res) / scale)
    return worst


def pohozaev_residual(F: Nonlinearity, u: Field, lam: Sequence[float]) -> float:
    """Normalised ``(N-2) sum|grad u_j|^2 + N sum lambda_j |u_j|^2 - 2N int F(u)``.

    Divided by ``N * max(1, sum |grad u_j|^2)``; with ``lam = 0`` this is the
    plain Pohozaev identity.
    """
    _check(F, u)
    dom, N = u.domain, u.domain.N
    kin = sum(dom.grad_norm_sq(c) for c in u.values)
    mass_term = sum(l * dom.integrate(c * c) for l, c in zip(lam, u.values))
    pot = dom.integrate(F.value(u.values))
    return ((N - 2) * kin + N * mass_term - 2 * N * pot) / (N * max(1.0, kin))


# -- ground-state soliton and the GN constant ------------------------------


@dataclass(frozen=True)
class GNData:
    """The soliton ``w`` of ``-Lap w + (2/N) w = w^{2#-1}`` and the sharp GN constant.

    ``C`` is ``C_{N,2#}`` determined by ``|w|_2^{4/N} = 2# / (2 C^{2#})``.
    """

    N: int
    w0: float
    mass_w: float
    C: float
    profile: Callable[[NDArray], NDArray]

    @property
    def two_sharp(self) -> float:
        return two_sharp(self.N)

    @property
    def delta(self) -> float:
        """GN exponent ``N (1/2 - 1/2#)`` at ``p = 2#``."""
        return self.N * (0.5 - 1.0 / self.two_sharp)

    @property
    def C_pow(self) -> float:
        """``C^{2#}``, the quantity entering the threshold conditions."""
        return self.C**self.two_sharp

    def sample(self, domain: Domain, t: float = 1.0) -> Field:
        """The field ``w(t |x|)`` on a RadialN or BiRadial domain."""
        return Field(domain, self.profile(t * domain.radius))

    def to_dict(self) -> dict:
        return {"N": self.N, "two_sharp": self.two_sharp, "w0": self.w0, "mass_w": self.mass_w, "C": self.C}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _soliton_rhs(N: int):
    ts = two_sharp(N)

    def rhs(r, y):
        w, v = y[0], y[1]
        return [v, (2.0 / N) * w - np.sign(w) * np.abs(w) ** (ts - 1.0) - (N - 1) / r * v, sphere_area(N) * r ** (N - 1) * w * w]

    return rhs


def _taylor_start(N: int, w0, r0):
    ts = two_sharp(N)
    w2 = ((2.0 / N) * w0 - w0 ** (ts - 1.0)) / (2.0 * N)
    return w0 + w2 * r0**2, 2.0 * w2 * r0


def _shoot_adaptive(N: int, w0: float, r_end: float, dense: bool = False):
    r0 = 1e-5
    w, v = _taylor_start(N, w0, r0)
    m0 = sphere_area(N) * w0**2 * r0**N / N

    def crosses(r, y):
        return y[0]

    crosses.terminal, crosses.direction = True, -1

    def turns(r, y):
        return y[1]

    turns.terminal, turns.direction = True, 1
    sol = solve_ivp(_soliton_rhs(N), (r0, r_end), [w, v, m0], method="DOP853", rtol=1e-13, atol=1e-15,
                    events=(crosses, turns), dense_output=dense)
    if sol.t_events[0].size:
        return "over", sol
    if sol.t_events[1].size:
        return "under", sol
    return ("under" if sol.y[0, -1] > 0 else "over"), sol


def _shoot_fixed(N: int, w0s: NDArray, dr: float, r_end: float) -> NDArray:
    """Heun integration of many initial values at once; True marks overshoot."""
    ts = two_sharp(N)
    w, v = _taylor_start(N, w0s, dr)
    status = np.zeros(w0s.shape, dtype=int)  # 0 running, 1 over, -1 under

    def f(r, w, v):
        return v, (2.0 / N) * w - np.sign(w) * np.abs(w) ** (ts - 1.0) - (N - 1) / r * v

    r = dr
    while r < r_end and np.any(status == 0):
        k1w, k1v = f(r, w, v)
        pw, pv = w + dr * k1w, v + dr * k1v
        k2w, k2v = f(r + dr, pw, pv)
        w = w + 0.5 * dr * (k1w + k2w)
        v = v + 0.5 * dr * (k1v + k2v)
        r += dr
        running = status == 0
        status[running & (w < 0)] = 1
        status[running & (v > 0) & (w >= 0)] = -1
    status[status == 0] = -1
    return status == 1


def _bracket(N: int, over: Callable[[float], bool]) -> tuple[float, float]:
    ts = two_sharp(N)
    lo = (2.0 / N) ** (1.0 / (ts - 2.0))  # constant equilibrium: always undershoots
    hi = 2.0 * lo
    for _ in range(60):
        if over(hi):
            return lo, hi
        lo, hi = hi, 2.0 * hi
    raise RuntimeError("no overshooting initial value found")


@lru_cache(maxsize=None)
def solve_soliton(N: int, tol: float = 1e-14, dr: float | None = None) -> GNData:
    """Shoot for the positive radial soliton and derive ``C_{N,2#}``.

    Bisection on ``w(0)``: initial values whose trajectory crosses zero are
    too large, those whose slope turns positive first are too small.  With
    ``dr=None`` an adaptive 8th-order integrator is used; a float ``dr``
    selects a fixed-step second-order (Heun) integrator, used to exhibit the
    convergence order of the shooting.
    """
    if N < 1:
        raise ValueError("N must be positive")
    ts = two_sharp(N)
    kappa = math.sqrt(2.0 / N)
    r_end = 60.0 / kappa
    if dr is not None:
        lo, hi = _bracket(N, lambda x: bool(_shoot_fixed(N, np.array([x]), dr, r_end)[0]))
        while hi - lo > tol * hi:
            cand = np.linspace(lo, hi, 34)[1:-1]
            over = _shoot_fixed(N, cand, dr, r_end)
            k = int(np.argmax(over)) if over.any() else cand.size
            lo = cand[k - 1] if k > 0 else lo
            hi = cand[k] if k < cand.size else hi
        w0 = 0.5 * (lo + hi)
        return _gn_from_profile(N, w0, *_profile_adaptive(N, w0, r_end), kappa)

    lo, hi = _bracket(N, lambda x: _shoot_adaptive(N, x, r_end)[0] == "over")
    for _ in range(200):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if _shoot_adaptive(N, mid, r_end)[0] == "over":
            hi = mid
        else:
            lo = mid
    return _gn_from_profile(N, lo, *_profile_adaptive(N, lo, r_end), kappa)


def _profile_adaptive(N: int, w0: float, r_end: float):
    _, sol = _shoot_adaptive(N, w0, r_end, dense=True)
    rr = np.linspace(sol.t[0], sol.t[-1], 20001)
    ww = sol.sol(rr)[0]
    small = np.nonzero(ww < 1e-6 * w0)[0]
    r_c = rr[small[0]] if small.size else rr[int(np.argmin(ww))]
    return sol, r_c


def _gn_from_profile(N: int, w0: float, sol, r_c: float, kappa: float) -> GNData:
    ts = two_sharp(N)
    w_c = float(sol.sol(r_c)[0])
    tail = lambda r: w_c * (r_c / r) ** ((N - 1) / 2.0) * np.exp(-kappa * (r - r_c))
    tail_mass = quad(lambda r: sphere_area(N) * r ** (N - 1) * tail(r) ** 2, r_c, np.inf)[0]
    mass_w = float(sol.sol(r_c)[2]) + tail_mass
    C = (ts / (2.0 * mass_w ** (2.0 / N))) ** (1.0 / ts)
    r0 = sol.t[0]

    def profile(r):
        r = np.asarray(r, dtype=float)
        inner = np.clip(r, r0, r_c)
        vals = sol.sol(inner.ravel())[0].reshape(r.shape)
        with np.errstate(divide="ignore"):
            return np.where(r <= r_c, vals, tail(np.maximum(r, r_c)))

    return GNData(N, float(w0), mass_w, float(C), profile)


def gn_check(gn: GNData, u: Field, j: int = 0) -> float:
    """``|u|_{2#} / (C |u|_2^{1-delta} |grad u|_2^delta)``; at most 1 up to grid error."""
    dom = u.domain
    c = u.values[j]
    l2 = math.sqrt(dom.integrate(c * c))
    if l2 == 0:
        raise ValueError("gn_check needs a nonzero field")
    ts, d = gn.two_sharp, gn.delta
    lp = dom.integrate(np.abs(c) ** ts) ** (1.0 / ts)
    g = math.sqrt(dom.grad_norm_sq(c))
    return lp / (gn.C * l2 ** (1.0 - d) * g**d)


# -- threshold conditions ---------------------------------------------------


def resolve_etas(F: Nonlinearity, estimate: bool = True) -> tuple[float, float]:
    """``(eta0, eta_inf)`` from the catalogue, falling back to sampling."""
    e0, einf = F.eta0(), F.eta_inf()
    if e0 is None or einf is None:
        if not estimate:
            raise EtaUnavailable("growth constant unavailable and estimation disabled")
        if e0 is None:
            e0 = eta_estimate(F, "zero").value
        if einf is None:
            einf = eta_estimate(F, "infinity").value
    return float(e0), float(einf)


@dataclass
class ThresholdReport:
    eta0: float
    eta_inf: float
    lhs_upper: float  # 2 eta_inf C^{2#} |a|^{4/N}, must be < 1
    lhs_lower: float  # 2 eta0 C^{2#} M^{2/N} min a_j^{4/N}, must be > 1
    etas_ok: bool
    etal_ok: bool

    @property
    def margins(self) -> tuple[float, float]:
        return 1.0 - self.lhs_upper, self.lhs_lower - 1.0


def check_thresholds(F: Nonlinearity, a: Sequence[float], gn: GNData | None = None, estimate: bool = True) -> ThresholdReport:
    """Evaluate the upper mass condition (eta_inf) and lower mass condition (eta0)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (F.M,) or np.any(a <= 0):
        raise ValueError("mass tuple must have M positive entries")
    gn = gn or solve_soliton(F.N)
    e0, einf = resolve_etas(F, estimate)
    N, Cp = F.N, gn.C_pow
    norm_a = float(np.linalg.norm(a))
    with np.errstate(invalid="ignore"):
        upper = 0.0 if einf == 0 else 2.0 * einf * Cp * norm_a ** (4.0 / N)
        lower = math.inf if e0 == math.inf else 2.0 * e0 * Cp * F.M ** (2.0 / N) * a.min() ** (4.0 / N)
    return ThresholdReport(e0, einf, upper, lower, upper < 1.0, lower > 1.0)


@dataclass
class CoercivityBound:
    """``J(u) >= kinetic_coeff |grad u|^2 - c_eps |a|^2`` on the mass ball."""

    eps: float
    c_eps: float
    kinetic_coeff: float
    a_norm: float

    def lower_bound(self, grad_sq: float) -> float:
        return self.kinetic_coeff * grad_sq - self.c_eps * self.a_norm**2


def coercivity_bound(F: Nonlinearity, a: Sequence[float], gn: GNData | None = None) -> CoercivityBound:
    """Constants of the coercivity estimate, with eps at half the admissible range.

    ``c_eps`` is fitted as the sampled supremum of
    ``(F(u) - (eps + eta_inf)|u|^{2#}) / |u|^2``.
    """
    gn = gn or solve_soliton(F.N)
    rep = check_thresholds(F, a, gn)
    if not rep.etas_ok:
        raise ValueError("upper mass condition fails; J is not known to be coercive")
    N, ts = F.N, F.two_sharp
    a_norm = float(np.linalg.norm(a))
    K = a_norm ** (4.0 / N) * gn.C_pow
    eps = 0.5 * (1.0 / (2.0 * K) - rep.eta_inf)
    dirs = sphere_directions(F.M, resolution=360)
    c_eps = 0.0
    for R in np.logspace(-12, 12, 241):
        f = np.atleast_1d(F.value(R * dirs))
        c_eps = max(c_eps, float(np.max((f - (eps + rep.eta_inf) * R**ts) / R**2)))
    return CoercivityBound(eps, c_eps, 0.5 - (eps + rep.eta_inf) * K, a_norm)


# -- negative-energy trial functions --------------------------------------


@dataclass
class Trial:
    u: Field
    energy: float
    t: float | None
    s: float
    branch: str


def _trial_base(gn: GNData, a: NDArray, domain: Domain, t: float) -> Field:
    active = a > 0
    m_star = int(active.sum())
    w = gn.profile(t * domain.radius) / math.sqrt(m_star)
    return Field(domain, np.stack([w if act else np.zeros_like(w) for act in active]))


def admissible_t_interval(F: Nonlinearity, a: Sequence[float], gn: GNData, eta0: float) -> tuple[float, float]:
    """Scalings ``t`` for which ``W(t x)`` lies in the mass ball and beats ``eta0``."""
    a = np.asarray(a, dtype=float)
    N = F.N
    pos = a[a > 0]
    m_star = pos.size
    t_lo = math.sqrt(1.0 + 2.0 / N) / ((m_star * pos.min() ** 2) ** (1.0 / N) * gn.C ** (1.0 + 2.0 / N))
    t_hi = math.sqrt(F.two_sharp * eta0) if eta0 < math.inf else math.inf
    return t_lo, t_hi


def trial_negative(F: Nonlinearity, a: Sequence[float], domain: Domain, gn: GNData | None = None,
                   s_min: float = 1e-3, shrink: float = 0.8) -> Trial:
    """A field in the mass ball with negative energy, built from the soliton.

    With finite ``eta0`` the soliton is rescaled by ``t`` inside the admissible
    interval; with ``eta0 = inf`` it is scaled to saturate the mass.  Then the
    mass-preserving dilation ``s`` is decreased until the energy is negative.
    Components with ``a_j = 0`` are set to zero.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (F.M,) or np.any(a < 0) or not np.any(a > 0):
        raise ValueError("mass tuple must be nonnegative with a positive entry")
    gn = gn or solve_soliton(F.N)
    eta0, _ = resolve_etas(F)
    t_lo, t_hi = admissible_t_interval(F, a, gn, eta0)
    if eta0 < math.inf:
        if not t_lo < t_hi:
            raise TrialFailure(f"admissible interval [{t_lo:.6g}, {t_hi:.6g}) is empty")
        t = math.sqrt(t_lo * t_hi)
        branch = "finite-eta0"
    else:
        t = t_lo * 1.000001
        branch = "infinite-eta0"
    base = np.array(_trial_base(gn, a, domain, t).values)
    # the discrete mass may exceed a_j^2 by the quadrature error
    for j in range(F.M):
        m = domain.integrate(base[j] ** 2)
        if m > a[j] ** 2 and m > 0:
            base[j] *= a[j] / math.sqrt(m)
    s = 1.0
    peak = np.abs(base).max()
    while s >= s_min:
        U = np.stack([domain.dilate(c, s) for c in base])
        if domain.boundary_value(np.abs(U).max(axis=0)) > 1e-6 * peak * s ** (domain.N / 2):
            break
        J = energy_array(F, domain, U)
        if J < 0:
            return Trial(Field(domain, U), J, t, s, branch)
        s *= shrink
    raise TrialFailure("dilation scan found no negative energy inside the domain")


@dataclass(frozen=True)
class MassSpec:
    """Componentwise L^2 radii ``a_j``: the mass ball is ``|u_j|_2 <= a_j``."""

    a: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.a))
        if not a or any(not math.isfinite(x) or x <= 0 for x in a):
            raise ValueError("mass radii must be positive and finite")
        object.__setattr__(self, "a", a)

    @property
    def M(self) -> int:
        return len(self.a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    def array(self) -> NDArray:
        return np.array(self.a)

    def combine(self, other: "MassSpec") -> "MassSpec":
        """The tuple ``sqrt(a_j^2 + b_j^2)``."""
        return MassSpec(tuple(math.hypot(x, y) for x, y in zip(self.a, other.a)))
