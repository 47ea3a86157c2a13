"""Catalogued nonlinearities F(u_1, ..., u_M) and their growth constants.

Every term is even in each argument.  Evaluation is vectorised: ``u`` has
shape ``(M, ...)`` and ``value`` returns an array of shape ``(...)``, ``grad``
an array of shape ``(M, ...)``.

Coefficient convention: ``Power(j, nu, p)`` is ``(nu / p) |u_j|^p``, so the
critical sum ``sum_j Power(j, nu_j, 2#)`` has ``eta_inf = max_j nu_j / 2#``.

``eta0`` and ``eta_inf`` are extended reals: ``math.inf`` encodes an infinite
limit and ``None`` means the catalogue has no closed form for the given
combination of terms (use :func:`eta_estimate`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize

_LOG_B = 1.0 / math.log(2.0)
_LOG_C = _LOG_B * (_LOG_B + 2.0) / 4.0 + 1.0


def two_sharp(N: int) -> float:
    """The mass-critical exponent 2 + 4/N."""
    return 2.0 + 4.0 / N


def two_star(N: int) -> float:
    """The Sobolev exponent (infinite for N = 1, 2)."""
    return 2.0 * N / (N - 2) if N >= 3 else math.inf


# -- single-component profiles on t >= 0 ---------------------------------


def _min_integral(t: NDArray, p: float, ts: float) -> NDArray:
    return np.where(t <= 1.0, t**ts / ts, 1.0 / ts + (t**p - 1.0) / p)


def _min_integral_d(t: NDArray, p: float, ts: float) -> NDArray:
    return np.minimum(t ** (ts - 1.0), t ** (p - 1.0))


def _piecewise_critical(t: NDArray, ts: float) -> NDArray:
    lo = t**ts / ts
    mid = t - 1.0 + 1.0 / ts
    hi = t**ts / (2.0 ** (ts - 1.0) * ts) + 1.0 - 1.0 / ts
    return np.where(t <= 1.0, lo, np.where(t < 2.0, mid, hi))


def _piecewise_critical_d(t: NDArray, ts: float) -> NDArray:
    hi = t ** (ts - 1.0) / 2.0 ** (ts - 1.0)
    return np.where(t <= 1.0, t ** (ts - 1.0), np.where(t < 2.0, 1.0, hi))


def _log_cusp_core(t: NDArray) -> tuple[NDArray, NDArray]:
    """Value and derivative of the log-cusp profile on [0, c]."""
    b, c = _LOG_B, _LOG_C
    with np.errstate(divide="ignore", invalid="ignore"):
        lt = np.log(np.where((t > 0) & (t < 0.5), t, 0.25))
        v1 = -(t**2) / lt
        d1 = -2.0 * t / lt + t / lt**2
    v1 = np.where(t > 0, v1, 0.0)
    d1 = np.where(t > 0, d1, 0.0)
    v2 = 0.5 * b * ((b + 2.0) * t - 0.5 - 0.5 * b)
    d2 = np.full_like(t, 0.5 * b * (b + 2.0))
    v3 = -(t**2) + 2.0 * c * t - 1.0 - 0.25 * b * (b + 1.0)
    d3 = -2.0 * t + 2.0 * c
    val = np.where(t < 0.5, v1, np.where(t <= 1.0, v2, v3))
    der = np.where(t < 0.5, d1, np.where(t <= 1.0, d2, d3))
    return val, der


def _log_cusp(t: NDArray) -> tuple[NDArray, NDArray]:
    c = _LOG_C
    refl = t > c
    s = np.where(refl, np.clip(2.0 * c - t, 0.0, None), t)
    val, der = _log_cusp_core(s)
    der = np.where(refl, -der, der)
    outside = t > 2.0 * c
    return np.where(outside, 0.0, val), np.where(outside, 0.0, der)


# -- terms -----------------------------------------------------------------


@dataclass(frozen=True)
class Power:
    """``(nu / p) |u_j|^p``."""

    j: int
    nu: float
    p: float

    @property
    def components(self) -> tuple[int, ...]:
        return (self.j,)

    def profile(self, t, ts):
        return self.nu / self.p * t**self.p

    def dprofile(self, t, ts):
        return self.nu * t ** (self.p - 1.0)

    def zero_order(self, ts):
        return self.p, self.nu / self.p

    def inf_order(self, ts):
        return self.p, self.nu / self.p

    def monotone(self) -> bool:
        return self.nu >= 0

    def to_dict(self):
        return {"kind": "power", "j": self.j + 1, "nu": self.nu, "p": self.p}


@dataclass(frozen=True)
class MinIntegral:
    """``int_0^{|u_j|} min{s^{2#-1}, s^{p-1}} ds``.

    Equal to ``|u_j|^{2#} / 2#`` below 1 and of order ``|u_j|^p / p`` above,
    hence ``eta0 = 1/2#`` and ``eta_inf = 0``.
    """

    j: int
    p: float

    @property
    def components(self):
        return (self.j,)

    def profile(self, t, ts):
        return _min_integral(t, self.p, ts)

    def dprofile(self, t, ts):
        return _min_integral_d(t, self.p, ts)

    def zero_order(self, ts):
        return ts, 1.0 / ts

    def inf_order(self, ts):
        return self.p, 1.0 / self.p

    def monotone(self):
        return True

    def to_dict(self):
        return {"kind": "min_integral", "j": self.j + 1, "p": self.p}


@dataclass(frozen=True)
class PiecewiseCritical:
    """Critical at both ends: ``|u|^{2#}/2#`` near 0, ``|u|^{2#}/(2^{2#-1} 2#)`` at infinity."""

    j: int

    @property
    def components(self):
        return (self.j,)

    def profile(self, t, ts):
        return _piecewise_critical(t, ts)

    def dprofile(self, t, ts):
        return _piecewise_critical_d(t, ts)

    def zero_order(self, ts):
        return ts, 1.0 / ts

    def inf_order(self, ts):
        return ts, 1.0 / (2.0 ** (ts - 1.0) * ts)

    def monotone(self):
        return True

    def to_dict(self):
        return {"kind": "piecewise_critical", "j": self.j + 1}


@dataclass(frozen=True)
class LogCusp:
    """The compactly supported profile behaving like ``-t^2 / ln t`` at 0."""

    j: int

    @property
    def components(self):
        return (self.j,)

    def profile(self, t, ts):
        return _log_cusp(t)[0]

    def dprofile(self, t, ts):
        return _log_cusp(t)[1]

    def zero_order(self, ts):
        # beats every power t^q, q > 2
        return 2.0, math.inf

    def inf_order(self, ts):
        return -math.inf, 0.0

    def monotone(self):
        return False

    def to_dict(self):
        return {"kind": "log_cusp", "j": self.j + 1}


@dataclass(frozen=True)
class Tabulated:
    """Even C^1 profile sampled on ``[0, t_max]``, held constant beyond."""

    j: int
    t: tuple[float, ...]
    F: tuple[float, ...]
    dF: tuple[float, ...]
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t, F, dF = (np.asarray(x, dtype=float) for x in (self.t, self.F, self.dF))
        if not (t.ndim == 1 and t.shape == F.shape == dF.shape and t.size >= 2):
            raise ValueError("tabulated profile needs equal-length t, F, dF arrays")
        if t[0] != 0.0 or F[0] != 0.0 or dF[0] != 0.0:
            raise ValueError("tabulated profile must start at t=0 with F=0 and F'=0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("tabulated t must be strictly increasing")
        object.__setattr__(self, "_spline", CubicHermiteSpline(t, F, dF))

    @property
    def components(self):
        return (self.j,)

    def profile(self, t, ts):
        tm = self.t[-1]
        return np.where(t <= tm, self._spline(np.minimum(t, tm)), self.F[-1])

    def dprofile(self, t, ts):
        tm = self.t[-1]
        return np.where(t <= tm, self._spline(np.minimum(t, tm), 1), 0.0)

    def zero_order(self, ts):
        return None

    def inf_order(self, ts):
        return 0.0, self.F[-1]

    def monotone(self):
        return bool(np.all(np.asarray(self.dF) >= 0) and np.all(np.diff(self.F) >= 0))

    def to_dict(self):
        return {"kind": "tabulated", "j": self.j + 1, "t": list(self.t), "F": list(self.F), "dF": list(self.dF)}


@dataclass(frozen=True)
class PowerProduct:
    """``alpha * prod_j |u_j|^{r_j}``; ``r_j = 0`` skips a component."""

    alpha: float
    r: tuple[float, ...]

    @property
    def components(self):
        return tuple(j for j, rj in enumerate(self.r) if rj != 0)

    @property
    def degree(self) -> float:
        return float(sum(self.r))

    def value(self, a: NDArray) -> NDArray:
        out = self.alpha
        for j in self.components:
            out = out * a[j] ** self.r[j]
        return out * np.ones(a.shape[1:])

    def grad_abs(self, a: NDArray) -> NDArray:
        """Partial derivatives with respect to |u_j| (zero for inactive j)."""
        g = np.zeros_like(a)
        act = self.components
        for j in act:
            part = self.alpha * self.r[j] * a[j] ** (self.r[j] - 1.0)
            for k in act:
                if k != j:
                    part = part * a[k] ** self.r[k]
            g[j] = part
        return g

    def sphere_max(self) -> float:
        """``max prod theta_j^{r_j}`` on the unit sphere, times alpha."""
        r = np.array([self.r[j] for j in self.components])
        s = r.sum()
        return float(self.alpha * np.prod((r / s) ** (r / 2.0)))

    def monotone(self):
        return self.alpha >= 0

    def to_dict(self):
        return {"kind": "product", "alpha": self.alpha, "r": list(self.r)}


SingleTerm = Power | MinIntegral | PiecewiseCritical | LogCusp | Tabulated
Term = SingleTerm | PowerProduct
FORMS = ("single", "a", "b", "generic")


@dataclass(frozen=True)
class Nonlinearity:
    """A sum of catalogued terms together with the dimension fixing 2#."""

    M: int
    N: int
    terms: tuple[Term, ...]
    form: str = "generic"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be positive")
        if self.form not in FORMS:
            raise ValueError(f"unknown structural form {self.form!r}")
        ts, tstar = self.two_sharp, two_star(self.N)
        for term in self.terms:
            if any(not 0 <= j < self.M for j in term.components):
                raise ValueError(f"{term} refers to a component outside 0..{self.M - 1}")
            if isinstance(term, Power) and not 2.0 < term.p < tstar:
                raise ValueError(f"power exponent {term.p} outside (2, 2*)")
            if isinstance(term, MinIntegral) and not 2.0 < term.p < ts:
                raise ValueError(f"min-integral exponent {term.p} outside (2, 2#)")
            if isinstance(term, PowerProduct):
                if len(term.r) != self.M:
                    raise ValueError("product exponent list must have length M")
                if term.alpha < 0:
                    raise ValueError("product coefficient must be nonnegative")
                if any(rj != 0 and rj <= 1 for rj in term.r) or any(rj < 0 for rj in term.r):
                    raise ValueError("active product exponents must exceed 1")
                if not term.components:
                    raise ValueError("product has no active component")
                if math.isclose(term.degree, ts) and not len(term.components) < ts:
                    raise ValueError("critical product needs fewer active components than 2#")
        if self.form == "single" and self.M != 1:
            raise ValueError("form 'single' requires M = 1")
        if self.form in ("a", "b"):
            self._check_structure()

    def _check_structure(self):
        singles = [t for t in self.terms if not isinstance(t, PowerProduct)]
        couplings = [t for t in self.terms if isinstance(t, PowerProduct)]
        for t in singles:
            if not t.monotone():
                raise ValueError(f"form {self.form}: {t} is not nonnegative nondecreasing")
        covered = {t.j for t in singles}
        if covered != set(range(self.M)):
            raise ValueError(f"form {self.form}: every component needs a nonzero additive term")
        if not couplings:
            raise ValueError(f"form {self.form}: no coupling term")
        for t in couplings:
            if t.alpha <= 0:
                raise ValueError(f"form {self.form}: coupling coefficients must be positive")
            if self.form == "a" and len(t.components) != self.M:
                raise ValueError("form a: each coupling must involve every component")
            if self.form == "b" and len(t.components) != 2:
                raise ValueError("form b: couplings must be pairwise")

    @property
    def two_sharp(self) -> float:
        return two_sharp(self.N)

    # -- evaluation -------------------------------------------------------
    def _prep(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.M:
            raise ValueError(f"expected {self.M} components, got array of shape {u.shape}")
        return u, np.abs(u)

    def value(self, u) -> NDArray:
        u, a = self._prep(u)
        ts = self.two_sharp
        out = np.zeros(u.shape[1:])
        for term in self.terms:
            if isinstance(term, PowerProduct):
                out = out + term.value(a)
            else:
                out = out + term.profile(a[term.j], ts)
        return out[()] if out.ndim == 0 else out

    def grad_abs(self, a: NDArray) -> NDArray:
        """Partial derivatives with respect to the moduli |u_j| (a >= 0)."""
        a = np.asarray(a, dtype=float)
        ts = self.two_sharp
        g = np.zeros_like(a)
        for term in self.terms:
            if isinstance(term, PowerProduct):
                g = g + term.grad_abs(a)
            else:
                g[term.j] = g[term.j] + term.dprofile(a[term.j], ts)
        return g

    def grad(self, u) -> NDArray:
        u, a = self._prep(u)
        return np.sign(u) * self.grad_abs(a)

    def additive_profile_derivative(self, j: int) -> Callable[[NDArray], NDArray]:
        """Derivative on [0, inf) of the single-component part acting on u_j."""
        ts = self.two_sharp
        parts = [t for t in self.terms if not isinstance(t, PowerProduct) and t.j == j]
        return lambda t: sum((p.dprofile(np.asarray(t, float), ts) for p in parts), np.zeros_like(np.asarray(t, float)))

    def is_monotone(self) -> bool:
        """All terms nonnegative and nondecreasing in each |u_j|."""
        return all(t.monotone() for t in self.terms)

    # -- growth constants -------------------------------------------------
    def eta_inf(self) -> float | None:
        """``limsup_{|u|->inf} F(u) / |u|^{2#}`` when the catalogue knows it."""
        ts = self.two_sharp
        crit_single = np.zeros(self.M)
        crit_products = []
        supercritical = []
        for term in self.terms:
            if isinstance(term, PowerProduct):
                e, coef = term.degree, term.alpha
            else:
                order = term.inf_order(ts)
                if order is None:
                    return None
                e, coef = order
            if coef == 0 or e < ts and not math.isclose(e, ts):
                continue
            if e > ts and not math.isclose(e, ts):
                supercritical.append(coef)
                continue
            if isinstance(term, PowerProduct):
                crit_products.append(term)
            else:
                crit_single[term.j] += coef
        if supercritical:
            return math.inf if min(supercritical) > 0 else None
        if not crit_products:
            if np.any(crit_single < 0):
                return None
            return float(crit_single.max())
        if len(crit_products) == 1 and not np.any(crit_single):
            return crit_products[0].sphere_max()
        return None

    def eta0(self) -> float | None:
        """``liminf_{u->0} F(u) / |u|^{2#}`` when the catalogue knows it."""
        ts = self.two_sharp
        sub_covered = set()
        crit_single = np.zeros(self.M)
        has_crit_product = has_sub_product = False
        for term in self.terms:
            if isinstance(term, PowerProduct):
                e, coef = term.degree, term.alpha
                if coef == 0:
                    continue
                if e < ts and not math.isclose(e, ts):
                    has_sub_product = True  # vanishes on the axes, unbounded inside
                if math.isclose(e, ts):
                    has_crit_product = True
                continue
            order = term.zero_order(ts)
            if order is None:
                return None
            e, coef = order
            if coef == 0 or (e > ts and not math.isclose(e, ts)):
                continue
            if coef < 0:
                return None
            if math.isclose(e, ts):
                crit_single[term.j] += coef
            else:
                sub_covered.add(term.j)
        if sub_covered == set(range(self.M)):
            return math.inf
        if sub_covered or has_crit_product or has_sub_product:
            return None
        if np.any(crit_single == 0):
            return 0.0
        if self.M == 1:
            return float(crit_single[0])
        # min over the sphere of sum c_j theta_j^{2#}
        k = ts / 2.0
        return float(np.sum(crit_single ** (-1.0 / (k - 1.0))) ** (-(k - 1.0)))

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "form": self.form, "terms": [t.to_dict() for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Nonlinearity":
        unknown = set(d) - {"M", "N", "form", "terms"}
        if unknown:
            raise ValueError(f"unknown nonlinearity keys: {sorted(unknown)}")
        M, N = int(d["M"]), int(d["N"])
        return cls(M, N, tuple(_term_from_dict(t, M) for t in d["terms"]), d.get("form", "generic"))

    @classmethod
    def from_json(cls, text: str) -> "Nonlinearity":
        return cls.from_dict(json.loads(text))


_TERM_KEYS = {
    "power": {"j", "nu", "p"},
    "product": {"alpha", "r"},
    "min_integral": {"j", "p"},
    "piecewise_critical": {"j"},
    "log_cusp": {"j"},
    "tabulated": {"j", "t", "F", "dF"},
}


def _term_from_dict(d: dict, M: int) -> Term:
    kind = d.get("kind")
    if kind not in _TERM_KEYS:
        raise ValueError(f"unknown term kind {kind!r}")
    extra = set(d) - _TERM_KEYS[kind] - {"kind"}
    if extra:
        raise ValueError(f"unknown keys for {kind}: {sorted(extra)}")
    j = int(d.get("j", 1)) - 1  # the wire format counts components from 1
    if kind == "power":
        return Power(j, float(d["nu"]), float(d["p"]))
    if kind == "product":
        return PowerProduct(float(d["alpha"]), tuple(float(x) for x in d["r"]))
    if kind == "min_integral":
        return MinIntegral(j, float(d["p"]))
    if kind == "piecewise_critical":
        return PiecewiseCritical(j)
    if kind == "log_cusp":
        return LogCusp(j)
    return Tabulated(j, tuple(d["t"]), tuple(d["F"]), tuple(d["dF"]))


# -- numeric limits ----------------------------------------------------------


def sphere_directions(M: int, resolution: int = 720, seed: int = 0) -> NDArray:
    """Unit vectors in the closed positive orthant of R^M, shape (M, k).

    Evenness in each argument makes the positive orthant sufficient.  The grid
    contains the coordinate axes and the diagonal.
    """
    if M == 1:
        return np.ones((1, 1))
    if M == 2:
        th = np.linspace(0.0, 0.5 * math.pi, resolution + 1)
        return np.stack([np.cos(th), np.sin(th)])
    if M == 3:
        k = max(resolution // 8, 8)
        th = np.linspace(0.0, 0.5 * math.pi, k + 1)
        t1, t2 = np.meshgrid(th, th, indexing="ij")
        d = np.stack([np.cos(t1), np.sin(t1) * np.cos(t2), np.sin(t1) * np.sin(t2)]).reshape(3, -1)
    else:
        rng = np.random.default_rng(seed)
        d = np.abs(rng.standard_normal((M, 20 * resolution)))
        d = np.concatenate([d, np.eye(M)], axis=1)
    d = np.concatenate([d, np.full((M, 1), 1.0)], axis=1)
    return d / np.linalg.norm(d, axis=0)


@dataclass
class EtaEstimate:
    side: str
    value: float
    radii: NDArray
    samples: NDArray
    trend: str  # "converged", "to_zero" or "diverging"


def _refine(F: Nonlinearity, R: float, theta0: NDArray, sign: float) -> float:
    """Continuous optimisation of ``sign * F(R theta)/R^{2#}`` on the sphere."""
    ts = F.two_sharp
    M = F.M

    def obj(x):
        th = np.abs(x) / max(np.linalg.norm(x), 1e-300)
        return -sign * float(F.value(R * th)) / R**ts

    res = minimize(obj, theta0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400 * M})
    return -sign * res.fun


def eta_estimate(F: Nonlinearity, side: str = "infinity", radii: Sequence[float] | None = None) -> EtaEstimate:
    """Sampled ``limsup_{|u|->inf}`` or ``liminf_{u->0}`` of ``F(u)/|u|^{2#}``.

    The ratio is extremised over a direction grid on each sphere ``|u| = R``.
    A clear power-law trend over the last samples is reported as a limit of 0
    or infinity; otherwise the value at the extreme radius, refined by a local
    search over directions, is returned.
    """
    if side not in ("zero", "infinity"):
        raise ValueError("side must be 'zero' or 'infinity'")
    if radii is None:
        radii = np.logspace(0, 12, 25) if side == "infinity" else np.logspace(0, -12, 25)
    radii = np.asarray(radii, dtype=float)
    d = np.diff(radii)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("radii schedule must be monotone")
    if side == "infinity" and d[0] < 0 or side == "zero" and d[0] > 0:
        radii = radii[::-1]
    ts = F.two_sharp
    dirs = sphere_directions(F.M)
    sign = 1.0 if side == "infinity" else -1.0  # maximise at infinity, minimise at zero
    samples, best_dirs = [], []
    for R in radii:
        ratio = F.value(R * dirs) / R**ts
        ratio = np.atleast_1d(ratio)
        if not np.all(np.isfinite(ratio)):
            raise ValueError(f"non-finite samples at radius {R}")
        k = int(np.argmax(sign * ratio))
        samples.append(ratio[k])
        best_dirs.append(dirs[:, k])
    samples = np.array(samples)
    tail = samples[-4:]
    logR = np.log(radii[-4:])
    if np.all(tail > 0):
        slope = np.polyfit(logR, np.log(tail), 1)[0]
    else:
        slope = 0.0
    # growth in the direction of the limit
    growth = slope if side == "infinity" else -slope
    if growth < -0.05:
        return EtaEstimate(side, 0.0, radii, samples, "to_zero")
    if growth > 0.05:
        return EtaEstimate(side, math.inf, radii, samples, "diverging")
    value = samples[-1]
    if F.M > 1:
        refined = _refine(F, radii[-1], best_dirs[-1], sign)
        value = max(value, refined) if side == "infinity" else min(value, refined)
    return EtaEstimate(side, float(value), radii, samples, "converged")


# -- hypothesis checks -------------------------------------------------------


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str
    witness: tuple | None = None  # (|u|, direction) of the worst sample on failure


@dataclass
class HypothesisReport:
    verdicts: dict[str, Verdict]
    best_q: list[float] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def lines(self) -> list[str]:
        return [f"{'PASS' if v.passed else 'FAIL'} {v.name}: {v.detail}" for v in self.verdicts.values()]


def _growing(seq: NDArray, rel: float = 0.05) -> bool:
    # power-law growth over the last samples (sequence ordered toward the limit)
    tail = np.asarray(seq[-5:], dtype=float)
    if np.any(tail <= 0):
        return False
    x = np.arange(tail.size) * 0.5 * math.log(10.0)
    return np.polyfit(x, np.log(tail), 1)[0] > rel


def check_p_condition(f: Callable[[NDArray], NDArray], N: int, t_min: float = 1e-12) -> tuple[bool, float]:
    """Test for some ``q <= N/(N-2)`` with ``liminf f(t)/t^q > 0`` as ``t -> 0+``.

    Returns ``(passed, q)`` where ``q`` is the local log-log slope of ``f`` at
    the smallest sampled ``t``.
    """
    t = np.logspace(math.log10(t_min), math.log10(t_min) + 2, 9)
    ft = np.asarray(f(t), dtype=float)
    if np.any(ft <= 0):
        return False, math.inf
    q = float(np.polyfit(np.log(t[:3]), np.log(ft[:3]), 1)[0])
    bound = N / (N - 2) if N > 2 else math.inf
    return q <= bound + 1e-6, q


def check_hypotheses(F: Nonlinearity, b: float = 1.0) -> HypothesisReport:
    """Sampling-based verdicts for (F0)-(F3) and (P).

    ``b`` is the exponent in the N = 2 envelope ``|u| + exp(b|u|^2) - 1``.
    Verdicts are evidence from samples over 12 decades of |u|, not proofs.
    """
    N = F.N
    dirs = sphere_directions(F.M, resolution=180)
    small = np.logspace(0, -12, 49)
    large = np.logspace(0, 12, 49)
    verdicts = {}

    def shell_max(radii, fn):
        vals, wit = [], []
        for R in radii:
            v = np.atleast_1d(fn(R * dirs, R))
            k = int(np.argmax(v))
            vals.append(v[k])
            wit.append((R, tuple(dirs[:, k])))
        return np.array(vals), wit

    gnorm = lambda u: np.linalg.norm(np.atleast_2d(F.grad(u)), axis=0)
    if N == 1:
        env = lambda R: R
        vals, wit = shell_max(small, lambda u, R: gnorm(u) / env(R))
        ok = not _growing(vals)
        S = float(vals.max())
        verdicts["F0"] = Verdict("F0", ok, f"|grad F| <= S|u| on the unit cube, sampled S = {S:.4g}", None if ok else wit[-1])
    else:
        if N == 2:
            env = lambda R: R + np.expm1(min(b * R * R, 700.0))
        else:
            env = lambda R: R + R ** (two_star(N) - 1.0)
        v0, w0 = shell_max(small, lambda u, R: gnorm(u) / env(R))
        v1, w1 = shell_max(large, lambda u, R: gnorm(u) / env(R))
        ok0, ok1 = not _growing(v0), not _growing(v1)
        S = float(max(v0.max(), v1.max()))
        wit = None if ok0 and ok1 else (w0[-1] if not ok0 else w1[-1])
        verdicts["F0"] = Verdict("F0", ok0 and ok1, f"growth bound sampled S = {S:.4g}", wit)

    est_inf = eta_estimate(F, "infinity")
    verdicts["F1"] = Verdict("F1", est_inf.value < math.inf, f"eta_inf ~ {est_inf.value:.6g} ({est_inf.trend})")

    ratio2, wit2 = shell_max(small, lambda u, R: np.abs(F.value(u)) / R**2)
    tail = ratio2[-8:]
    decreasing = bool(np.all(np.diff(tail) < 0))
    slope = float(np.polyfit(np.log(small[-8:]), np.log(np.maximum(tail, 1e-300)), 1)[0])
    ok2 = tail[-1] < 1e-12 or (decreasing and slope > 1e-3)
    verdicts["F2"] = Verdict("F2", ok2, f"F/|u|^2 = {tail[-1]:.3g} at |u| = 1e-12", None if ok2 else wit2[-1])

    est0 = eta_estimate(F, "zero")
    verdicts["F3"] = Verdict("F3", est0.value > 0, f"eta0 ~ {est0.value:.6g} ({est0.trend})")

    qs, okp = [], True
    for j in range(F.M):
        f = F.additive_profile_derivative(j)
        passed, q = check_p_condition(f, N)
        qs.append(q)
        okp = okp and passed
    bound = f"{N / (N - 2):.4g}" if N > 2 else "inf"
    verdicts["P"] = Verdict("P", okp, f"best q per component {[round(q, 4) for q in qs]} vs N/(N-2) = {bound}")
    return HypothesisReport(verdicts, qs)
