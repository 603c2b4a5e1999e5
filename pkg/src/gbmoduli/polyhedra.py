"""Riemannian polyhedra given as constraint regions ``{c_i >= 0}``.

Conventions fixed here and relied on by the assembly code:

* outward unit normals are ``N_i = -grad c_i / |grad c_i|``;
* ``II_Z(X, Y) = <D_X Y, -Z>`` for outward ``Z``, computed as
  ``-Hess c(X, Y) / |grad c|``. A round disk in the plane gets ``+1/r``;
* outer-angle cells are measured as a fraction of the unit sphere of the
  normal space (a right-angled planar corner has measure 1/4). This
  normalization is a convention chosen so that the planar assembly
  reproduces the classical Gauss-Bonnet formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .chart import MetricChart, christoffel, fd_steps, gram_schmidt
from .errors import (
    CapabilityError,
    CornerRegularityError,
    InsufficientDataError,
    OutsideRegionError,
    SingularGradientError,
)
from .integrate import QuadratureSpec, quad_box

ACTIVE_TOL = 1e-8
DEFAULT_ANGLE_SAMPLES = 200_000


@dataclass(frozen=True)
class Constraint:
    """Smooth function ``fn`` with the region on the side ``fn >= 0``.

    ``fn`` must broadcast over a trailing coordinate axis. ``grad`` and
    ``hess`` are optional closed forms; finite differences fill in.
    """

    fn: Callable
    name: str = ""
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    scale: float = 1.0


@dataclass(frozen=True)
class Face:
    active: frozenset
    dimension: int
    name: str = ""
    param: Optional[Callable] = None
    param_box: Optional[tuple] = None
    multiplicity: int = 1
    point: Optional[tuple] = None

    @property
    def codim(self) -> int:
        return len(self.active)


@dataclass
class Region:
    """A manifold with corners inside a chart.

    ``cell_data`` holds ``{"chi": ..., "chi_boundary": ...}`` when the
    topology is known. ``interior_pieces`` is an optional list of
    ``(param, box)`` pairs covering the region, used for accurate interior
    integrals over curved regions; ``box`` restricts the quadrature box.
    """

    chart: MetricChart
    constraints: Sequence[Constraint]
    faces: Sequence[Face] = ()
    cell_data: Optional[dict] = None
    box: Optional[tuple] = None
    interior_pieces: Optional[list] = None
    name: str = "region"
    meta: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    def values(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.array([float(c.fn(p)) for c in self.constraints])

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for c in self.constraints:
            ok &= np.asarray(c.fn(x)) >= 0
        return ok

    def integration_box(self) -> tuple:
        return tuple(self.box) if self.box is not None else self.chart.bounds

    def face(self, name: str) -> Face:
        for f in self.faces:
            if f.name == name:
                return f
        raise KeyError(name)


@dataclass
class OuterAngleCell:
    base: np.ndarray
    normals: np.ndarray  # rows: outward unit normals, orthonormal-frame components
    measure: float
    k: int
    method: str
    description: str = ""


@dataclass
class SecondFundamentalForm:
    matrix: np.ndarray  # components in ``tangent_basis``
    tangent_basis: np.ndarray  # columns: g-orthonormal coordinate vectors
    normal: np.ndarray  # outward Z as a coordinate vector
    coefficients: np.ndarray  # Z = sum a_i N_i over active constraints


def active_constraints(region: Region, p, tol: float = ACTIVE_TOL) -> frozenset:
    vals = region.values(region.chart.wrap(p))
    scales = np.array([c.scale for c in region.constraints])
    if np.any(vals < -tol * scales):
        bad = [region.constraints[i].name or str(i) for i in np.flatnonzero(vals < -tol * scales)]
        raise OutsideRegionError(f"point {list(p)} violates constraints {bad} of {region.name}")
    return frozenset(int(i) for i in np.flatnonzero(np.abs(vals) <= tol * scales))


def _richardson_grad(f, p, h):
    n = p.shape[0]
    out = np.zeros(n)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h[k]
        d1 = (f(p + e) - f(p - e)) / (2 * h[k])
        d2 = (f(p + 2 * e) - f(p - 2 * e)) / (4 * h[k])
        out[k] = (4 * d1 - d2) / 3
    return out


def constraint_gradient(region: Region, i: int, p) -> np.ndarray:
    """Coordinate differential ``dc_i`` at ``p``."""
    c = region.constraints[i]
    p = np.asarray(p, dtype=float)
    if c.grad is not None:
        return np.asarray(c.grad(p), dtype=float)
    h1, _ = fd_steps(region.chart)
    return _richardson_grad(lambda x: float(c.fn(x)), p, h1)


def constraint_hessian(region: Region, i: int, p) -> np.ndarray:
    """Coordinate second partials of ``c_i`` at ``p``."""
    c = region.constraints[i]
    p = np.asarray(p, dtype=float)
    if c.hess is not None:
        return np.asarray(c.hess(p), dtype=float)
    _, h2 = fd_steps(region.chart)
    n = p.shape[0]
    f = lambda x: float(c.fn(x))
    f0 = f(p)
    out = np.zeros((n, n))
    for k in range(n):
        ek = np.zeros(n)
        ek[k] = h2[k]
        s1 = (f(p + ek) - 2 * f0 + f(p - ek)) / h2[k] ** 2
        s2 = (f(p + 2 * ek) - 2 * f0 + f(p - 2 * ek)) / (4 * h2[k] ** 2)
        out[k, k] = (4 * s1 - s2) / 3
        for l in range(k + 1, n):
            el = np.zeros(n)
            el[l] = h2[l]

            def mixed(t):
                return (f(p + t * (ek + el)) - f(p + t * (ek - el)) - f(p - t * (ek - el))
                        + f(p - t * (ek + el))) / (4 * t * t * h2[k] * h2[l])

            out[k, l] = out[l, k] = (4 * mixed(1.0) - mixed(2.0)) / 3
    return out


def _outward_normals(region: Region, active, p, gm):
    """Outward unit normals as coordinate vectors, one column per constraint."""
    ginv = np.linalg.inv(gm)
    cols = []
    for i in sorted(active):
        dc = constraint_gradient(region, i, p)
        norm = math.sqrt(max(dc @ ginv @ dc, 0.0))
        if norm < 1e-10:
            raise SingularGradientError(f"constraint {region.constraints[i].name or i} has vanishing gradient")
        cols.append(-(ginv @ dc) / norm)
    return np.array(cols).T


def outer_angle_measure(region: Region, p, n_samples: int = DEFAULT_ANGLE_SAMPLES, seed: int = 0,
                        method: str = "auto", tol: float = ACTIVE_TOL) -> OuterAngleCell:
    """Normalized spherical measure of the outer angle at boundary point ``p``.

    Closed forms for k <= 2; otherwise (or with ``method="sample"``) the
    fraction of seeded uniform directions of the normal space that land in
    the cone spanned by the outward normals.
    """
    chart = region.chart
    p = chart.wrap(p)
    active = active_constraints(region, p, tol)
    k = len(active)
    if k == 0:
        raise ValueError("outer angles are defined at boundary points only")
    gm = chart.g(p)
    frame = gram_schmidt(gm)
    try:
        normals_coord = _outward_normals(region, active, p, gm)
    except SingularGradientError as exc:
        raise CornerRegularityError(str(exc)) from None
    # coordinate vector v has frame components E^{-1} v
    nu = np.linalg.solve(frame, normals_coord).T
    sv = np.linalg.svd(nu, compute_uv=False)
    if sv[-1] < 1e-8:
        raise CornerRegularityError(f"active constraint gradients are dependent at {p.tolist()}")
    if k == 1 and method != "sample":
        return OuterAngleCell(p, nu, 1.0, 1, "exact", "codimension-1: full outward normal")
    if k == 2 and method != "sample":
        cos = float(np.clip(nu[0] @ nu[1], -1.0, 1.0))
        return OuterAngleCell(p, nu, math.acos(cos) / (2 * math.pi), 2, "exact",
                              "planar exterior angle / 2 pi")
    q, _ = np.linalg.qr(nu.T)  # orthonormal basis of the normal space
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n_samples, k))
    v = y @ q.T
    coeffs = np.linalg.solve(nu @ nu.T, nu @ v.T)
    inside = np.all(coeffs >= 0, axis=0)
    return OuterAngleCell(p, nu, float(np.mean(inside)), k, "sample",
                          f"rejection sampling, N={n_samples}, seed={seed}")


def face_tangent_basis(region: Region, face: Face, p, gm=None) -> np.ndarray:
    gm = region.chart.g(p) if gm is None else gm
    n = region.dimension
    rows = np.array([constraint_gradient(region, i, p) for i in sorted(face.active)]).reshape(-1, n)
    _, s, vt = np.linalg.svd(rows)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0] if s.size else 1.0)))
    null = vt[rank:].T
    if null.shape[1] == 0:
        return null
    return null @ gram_schmidt(null.T @ gm @ null)


def second_fundamental_form(region: Region, face: Face, p, z=None) -> SecondFundamentalForm:
    """``II_Z`` of ``face`` at ``p`` on an orthonormal basis of its tangent space.

    ``z`` is a coordinate vector in the nonnegative span of the outward
    normals of the face; by default the (normalized) sum of those normals.
    """
    chart = region.chart
    p = chart.wrap(p)
    gm = chart.g(p)
    idx = sorted(face.active)
    normals = _outward_normals(region, idx, p, gm)
    if z is None:
        z = normals.sum(axis=1)
        z = z / math.sqrt(z @ gm @ z)
    z = np.asarray(z, dtype=float)
    coef, *_ = np.linalg.lstsq(normals, z, rcond=None)
    if np.linalg.norm(normals @ coef - z) > 1e-8 * max(1.0, np.linalg.norm(z)) or np.any(coef < -1e-9):
        raise ValueError("Z must lie in the nonnegative span of the face's outward normals")
    gamma = christoffel(chart, p)
    ginv = np.linalg.inv(gm)
    basis = face_tangent_basis(region, face, p, gm)
    mat = np.zeros((basis.shape[1], basis.shape[1]))
    for a, i in zip(coef, idx):
        dc = constraint_gradient(region, i, p)
        grad_norm = math.sqrt(dc @ ginv @ dc)
        if grad_norm < 1e-10:
            raise SingularGradientError(f"|grad c| = {grad_norm:.1e} below 1e-10")
        hess = constraint_hessian(region, i, p) - np.einsum("kab,k->ab", gamma, dc)
        mat += a * (-(basis.T @ hess @ basis) / grad_norm)
    return SecondFundamentalForm(0.5 * (mat + mat.T), basis, z, coef)


def param_jacobian(param: Callable, t, h: float = 1e-4) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    cols = []
    for k in range(t.shape[0]):
        e = np.zeros_like(t)
        e[k] = h
        d1 = (np.asarray(param(t + e)) - np.asarray(param(t - e))) / (2 * h)
        d2 = (np.asarray(param(t + 2 * e)) - np.asarray(param(t - 2 * e))) / (4 * h)
        cols.append((4 * d1 - d2) / 3)
    return np.array(cols).T


def pulled_back_volume(chart: MetricChart, param: Callable, t) -> float:
    """Riemannian volume density of ``param`` at parameter ``t``."""
    p = np.asarray(param(t), dtype=float)
    jac = param_jacobian(param, t)
    gm = np.asarray(chart.metric(p), dtype=float)
    return math.sqrt(max(np.linalg.det(jac.T @ gm @ jac), 0.0))


def face_volume(region: Region, face: Face, spec: QuadratureSpec | None = None) -> float:
    """Volume of one copy of ``face`` (points count 1)."""
    if face.dimension == 0:
        return 1.0
    if face.param is None or face.param_box is None:
        raise CapabilityError(f"face {face.name!r} of {region.name} has no parametrization")
    spec = spec or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11)
    res = quad_box(lambda t: pulled_back_volume(region.chart, face.param, t), face.param_box, spec)
    return res.value


def inner_euler(region: Region) -> int:
    """Inner Euler characteristic ``chi(P) - chi(boundary P)``."""
    data = region.cell_data
    if not data or "chi" not in data:
        raise InsufficientDataError(f"{region.name}: no topology or cell data available")
    return int(data["chi"]) - int(data.get("chi_boundary", 0))
