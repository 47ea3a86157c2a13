"""Discretized domains, quadrature and the discrete Laplacian.

Three geometries are supported:

``RadialN``
    radial profiles u(|x|) on a ball of R^N, cell-centred nodes
    ``r_i = (i + 1/2) h`` with ``h = r_max / n_points`` and a homogeneous
    Dirichlet condition just outside ``r_max``.
``BiRadial``
    doubly radial profiles u(|x_1|, |x_2|) on R^2 x R^2 (N = 4), the tensor
    product of two K = 2 radial grids.
``PeriodicBox1D``
    a periodic interval of length L used by the time evolution only.

The radial Laplacian is written in flux form

    (Lap u)_i = [c_{i+1/2} (u_{i+1} - u_i) - c_{i-1/2} (u_i - u_{i-1})] / (w_i h)

with ``w_i = r_i^{N-1} h`` and face coefficients chosen so that the stencil is
exact on quadratics (including the node next to the origin).  The same face
coefficients define ``grad_norm_sq``, so ``<-Lap u, u> = grad_norm_sq(u)``
holds to rounding error.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

RADIAL = "RadialN"
BIRADIAL = "BiRadial"
PERIODIC = "PeriodicBox1D"
KINDS = (RADIAL, BIRADIAL, PERIODIC)


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def _face_coefficients(r: NDArray, h: float, N: int) -> NDArray:
    # c_{i+1/2} r_{i+1/2} = N * sum_{k<=i} r_k^{N-1} h  makes the stencil exact on r^2
    faces = r + 0.5 * h
    return N * np.cumsum(r ** (N - 1) * h) / faces


@dataclass(frozen=True)
class Domain:
    """A discretized geometry carrying quadrature weights.

    Parameters
    ----------
    kind : str
        One of ``"RadialN"``, ``"BiRadial"``, ``"PeriodicBox1D"``.
    N : int
        Ambient spatial dimension.  BiRadial forces ``N = 4``, PeriodicBox1D
        forces ``N = 1``.
    length : float
        ``r_max`` for the radial kinds, box length ``L`` for the periodic one.
    n_points : int
        Nodes per axis.
    """

    kind: str
    N: int
    length: float
    n_points: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.length <= 0 or not math.isfinite(self.length):
            raise ValueError("domain length must be positive")
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if self.kind == RADIAL and self.N < 1:
            raise ValueError("RadialN needs N >= 1")
        if self.kind == BIRADIAL and self.N != 4:
            raise ValueError("BiRadial is implemented for N = 4 (K = 2) only")
        if self.kind == PERIODIC and self.N != 1:
            raise ValueError("PeriodicBox1D is one-dimensional")

    # -- constructors -----------------------------------------------------
    @classmethod
    def radial(cls, N: int, r_max: float, n_points: int) -> "Domain":
        return cls(RADIAL, int(N), float(r_max), int(n_points))

    @classmethod
    def biradial(cls, r_max: float, n_points: int) -> "Domain":
        return cls(BIRADIAL, 4, float(r_max), int(n_points))

    @classmethod
    def periodic(cls, L: float, n_points: int) -> "Domain":
        return cls(PERIODIC, 1, float(L), int(n_points))

    # -- geometry ---------------------------------------------------------
    @property
    def h(self) -> float:
        return self.length / self.n_points

    @property
    def r_max(self) -> float:
        return self.length

    @property
    def shape(self) -> tuple[int, ...]:
        if self.kind == BIRADIAL:
            return (self.n_points, self.n_points)
        return (self.n_points,)

    @cached_property
    def r(self) -> NDArray:
        """Radial nodes (RadialN, BiRadial axes) or box coordinates."""
        i = np.arange(self.n_points)
        if self.kind == PERIODIC:
            return -0.5 * self.length + i * self.h
        return (i + 0.5) * self.h

    @cached_property
    def radius(self) -> NDArray:
        """Euclidean |x| at every node (the ambient radius)."""
        if self.kind == BIRADIAL:
            r1, r2 = np.meshgrid(self.r, self.r, indexing="ij")
            return np.hypot(r1, r2)
        return np.abs(self.r)

    @cached_property
    def weights(self) -> NDArray:
        """Quadrature weights, shape ``self.shape``, strictly positive."""
        h = self.h
        if self.kind == PERIODIC:
            return np.full(self.n_points, h)
        if self.kind == RADIAL:
            return sphere_area(self.N) * self.r ** (self.N - 1) * h
        w1 = 2.0 * math.pi * self.r * h
        return np.outer(w1, w1)

    @property
    def measure(self) -> float:
        """Measure of the truncated domain (ball or box)."""
        if self.kind == PERIODIC:
            return self.length
        if self.kind == RADIAL:
            return sphere_area(self.N) * self.length**self.N / self.N
        return (math.pi * self.length**2) ** 2

    @cached_property
    def _axis(self) -> tuple[NDArray, NDArray]:
        # per-axis (w_i / sigma, c_{i+1/2}); K = 2 per axis for BiRadial
        dim = self.N if self.kind == RADIAL else 2
        return self.r ** (dim - 1) * self.h, _face_coefficients(self.r, self.h, dim)

    @cached_property
    def _axis_sigma(self) -> float:
        return sphere_area(self.N) if self.kind == RADIAL else 2.0 * math.pi

    # -- discrete calculus (array level) ---------------------------------
    def integrate(self, f: ArrayLike) -> float:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise ValueError(f"grid function has shape {f.shape}, expected {self.shape}")
        return float(np.sum(self.weights * f))

    def inner(self, f: NDArray, g: NDArray) -> float:
        """Weighted L^2 inner product summed over leading component axes."""
        return float(np.sum(self.weights * np.real(np.conj(f) * g)))

    def _axis_diffs(self, u: NDArray, axis: int) -> NDArray:
        # forward differences with the Dirichlet ghost u_n = 0 appended
        pad = [(0, 0)] * u.ndim
        pad[axis] = (0, 1)
        return np.diff(np.pad(u, pad), axis=axis)

    def grad_norm_sq(self, u: NDArray) -> float:
        """Discrete Dirichlet integral of one grid function (complex allowed)."""
        u = np.asarray(u)
        if np.iscomplexobj(u):
            return self.grad_norm_sq(u.real) + self.grad_norm_sq(u.imag)
        u = u.astype(float)
        if self.kind == PERIODIC:
            k = self.wavenumbers
            uh = np.fft.fft(u)
            return float(self.h * np.sum(k**2 * np.abs(uh) ** 2) / self.n_points)
        _, c = self._axis
        if self.kind == RADIAL:
            d = self._axis_diffs(u, 0)
            return float(self._axis_sigma * np.sum(c * d**2) / self.h)
        w1 = self._axis_sigma * self._axis[0]
        d1 = self._axis_diffs(u, 0)
        d2 = self._axis_diffs(u, 1)
        s1 = np.sum(c[:, None] * d1**2 * w1[None, :])
        s2 = np.sum(w1[:, None] * d2**2 * c[None, :])
        return float(self._axis_sigma * (s1 + s2) / self.h)

    def _radial_lap_1d(self, u: NDArray, axis: int) -> NDArray:
        w, c = self._axis
        d = self._axis_diffs(u, axis)  # d_i = u_{i+1} - u_i, i = 0..n-1
        shape = [1] * u.ndim
        shape[axis] = -1
        flux = c.reshape(shape) * d
        pad = [(0, 0)] * u.ndim
        pad[axis] = (1, 0)
        inner_flux = np.pad(flux, pad)
        inner_flux = np.take(inner_flux, range(self.n_points), axis=axis)
        return (flux - inner_flux) / (w.reshape(shape) * self.h)

    def laplacian(self, u: NDArray) -> NDArray:
        """Discrete Laplacian of one grid function (radial kinds only)."""
        u = np.asarray(u, dtype=float)
        if self.kind == PERIODIC:
            raise ValueError("PeriodicBox1D has no finite-difference Laplacian; use the spectral propagator")
        if u.shape != self.shape:
            raise ValueError(f"grid function has shape {u.shape}, expected {self.shape}")
        if self.kind == RADIAL:
            return self._radial_lap_1d(u, 0)
        return self._radial_lap_1d(u, 0) + self._radial_lap_1d(u, 1)

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse matrix of :meth:`laplacian` acting on flattened arrays."""
        if self.kind == PERIODIC:
            raise ValueError("PeriodicBox1D has no finite-difference Laplacian")
        w, c = self._axis
        n = self.n_points
        h = self.h
        c_in = np.concatenate([[0.0], c[:-1]])
        main = -(c + c_in) / (w * h)
        upper = c[:-1] / (w[:-1] * h)
        lower = c[:-1] / (w[1:] * h)
        L1 = sp.diags([lower, main, upper], [-1, 0, 1], shape=(n, n), format="csr")
        if self.kind == RADIAL:
            return L1
        eye = sp.identity(n, format="csr")
        return (sp.kron(L1, eye) + sp.kron(eye, L1)).tocsr()

    @cached_property
    def wavenumbers(self) -> NDArray:
        if self.kind != PERIODIC:
            raise ValueError("wavenumbers exist on PeriodicBox1D only")
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.h)

    def dilate(self, u: NDArray, s: float) -> NDArray:
        """``s^{N/2} u(s x)`` by linear interpolation, zero outside the grid."""
        if not s > 0:
            raise ValueError("dilation factor must be positive")
        u = np.asarray(u, dtype=float)
        if self.kind == PERIODIC:
            x = self.r
            return math.sqrt(s) * np.interp(s * x, x, u, left=0.0, right=0.0)
        # the Dirichlet ghost node carries the value 0
        nodes = np.append(self.r, self.r[-1] + self.h)
        if self.kind == RADIAL:
            return s ** (self.N / 2) * np.interp(s * self.r, nodes, np.append(u, 0.0), right=0.0)
        from scipy.interpolate import RegularGridInterpolator

        ext = np.pad(u, ((0, 1), (0, 1)))
        # even reflection below the first node
        nodes = np.concatenate([[-self.r[0]], nodes])
        ext = np.pad(ext, ((1, 0), (1, 0)), mode="edge")
        interp = RegularGridInterpolator((nodes, nodes), ext, bounds_error=False, fill_value=0.0)
        r1, r2 = np.meshgrid(s * self.r, s * self.r, indexing="ij")
        return s**2 * interp(np.stack([r1, r2], axis=-1))

    def boundary_value(self, u: NDArray) -> float:
        """Largest |u| on the outermost shell, a truncation diagnostic."""
        u = np.abs(np.asarray(u))
        if self.kind == RADIAL:
            return float(u[-1])
        if self.kind == BIRADIAL:
            return float(max(u[-1, :].max(), u[:, -1].max()))
        return float(max(u[0], u[-1]))

    def to_dict(self) -> dict:
        key = "L" if self.kind == PERIODIC else "r_max"
        return {"kind": self.kind, "N": self.N, key: self.length, "n_points": self.n_points}

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        length = d.get("r_max", d.get("L"))
        if length is None:
            raise ValueError("domain needs r_max (or L)")
        kind = d["kind"]
        N = d.get("N", 4 if kind == BIRADIAL else 1)
        return cls(kind, int(N), float(length), int(d["n_points"]))


@dataclass(frozen=True)
class Field:
    """An M-component grid function on a :class:`Domain`.

    ``values`` has shape ``(M, *domain.shape)`` and is stored read-only.
    """

    domain: Domain
    values: NDArray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, copy=True)
        if not np.iscomplexobj(v):
            v = v.astype(float)
        if v.shape == self.domain.shape:
            v = v[None]
        if v.shape[1:] != self.domain.shape:
            raise ValueError(f"components have shape {v.shape[1:]}, domain expects {self.domain.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, j: int) -> NDArray:
        return self.values[j]

    def with_values(self, values: NDArray) -> "Field":
        return Field(self.domain, values)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> str:
        d = {"domain": self.domain.to_dict(), "components": np.real(self.values).tolist()}
        if np.iscomplexobj(self.values):
            d["components_imag"] = np.imag(self.values).tolist()
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "Field":
        d = json.loads(text)
        dom = Domain.from_dict(d["domain"])
        vals = np.asarray(d["components"], dtype=float)
        if "components_imag" in d:
            vals = vals + 1j * np.asarray(d["components_imag"], dtype=float)
        return cls(dom, vals)

    def to_csv(self) -> str:
        """One row per node: coordinates then component values."""
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        dom = self.domain
        comps = [f"u{j + 1}" for j in range(self.M)]
        if np.iscomplexobj(self.values):
            comps = [f"{c}_{part}" for c in comps for part in ("re", "im")]
        if dom.kind == BIRADIAL:
            writer.writerow(["r1", "r2", *comps])
            r1, r2 = np.meshgrid(dom.r, dom.r, indexing="ij")
            coords = [r1.ravel(), r2.ravel()]
        else:
            writer.writerow(["x" if dom.kind == PERIODIC else "r", *comps])
            coords = [dom.r]
        cols = []
        for j in range(self.M):
            v = self.values[j].ravel()
            if np.iscomplexobj(v):
                cols += [v.real, v.imag]
            else:
                cols.append(v)
        for row in zip(*coords, *cols):
            writer.writerow([repr(float(x)) for x in row])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, domain: Domain) -> "Field":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        ncoord = 2 if domain.kind == BIRADIAL else 1
        data = body[:, ncoord:]
        if any(h.endswith("_re") for h in header):
            data = data[:, 0::2] + 1j * data[:, 1::2]
        vals = data.T.reshape((-1, *domain.shape))
        return cls(domain, vals)


def integrate(domain: Domain, f: ArrayLike) -> float:
    """Quadrature of a scalar grid function."""
    return domain.integrate(f)


def mass(u: Field, j: int = 0) -> float:
    """Squared L^2 norm of component ``j`` (0-based)."""
    if not 0 <= j < u.M:
        raise IndexError(f"component {j} out of range for M={u.M}")
    return u.domain.integrate(np.abs(u.values[j]) ** 2)


def grad_norm_sq(u: Field, j: int = 0) -> float:
    """Dirichlet integral of component ``j`` (0-based)."""
    if not 0 <= j < u.M:
        raise IndexError(f"component {j} out of range for M={u.M}")
    v = u.values[j]
    if np.iscomplexobj(v):
        return u.domain.grad_norm_sq(v.real) + u.domain.grad_norm_sq(v.imag)
    return u.domain.grad_norm_sq(v)


def lp_norm(u: Field, p: float) -> float:
    """L^p norm of the pointwise Euclidean length of the M-vector."""
    if p < 1:
        raise ValueError("p must be >= 1")
    modulus = np.sqrt(np.sum(np.abs(u.values) ** 2, axis=0))
    return u.domain.integrate(modulus**p) ** (1.0 / p)


def laplacian(u: Field, j: int = 0) -> NDArray:
    if not 0 <= j < u.M:
        raise IndexError(f"component {j} out of range for M={u.M}")
    return u.domain.laplacian(u.values[j])


def dilate(u: Field, s: float) -> Field:
    """The mass-preserving dilation ``s^{N/2} u(s x)``, componentwise."""
    if not s > 0:
        raise ValueError("dilation factor must be positive")
    return Field(u.domain, np.stack([u.domain.dilate(c, s) for c in u.values]))
