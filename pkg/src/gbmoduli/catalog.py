"""Builtin metric charts, addressable by name.

Every builtin ships analytic first and second partials, so each one can be
run in either derivative mode (``chart.with_mode("finite-difference")``).
"""
from __future__ import annotations

import math
from functools import partial

import numpy as np

from .chart import ANALYTIC, FINITE_DIFFERENCE, MetricChart
from .errors import ConfigurationError


def _sin_power_integral(m: int, a: float, b: float) -> float:
    """Closed form of the integral of sin(x)**m over [a, b]."""
    if m == 0:
        return b - a
    if m == 1:
        return math.cos(a) - math.cos(b)
    head = (-math.cos(b) * math.sin(b) ** (m - 1) + math.cos(a) * math.sin(a) ** (m - 1)) / m
    return head + (m - 1) / m * _sin_power_integral(m - 2, a, b)


def euclidean(n: int = 2, side: float = 1.0, mode: str = ANALYTIC, lo: float = 0.0) -> MetricChart:
    eye = np.eye(n)
    return MetricChart(
        name=f"euclidean{n}",
        bounds=((lo, lo + side),) * n,
        metric=lambda p: eye.copy(),
        dmetric=lambda p: np.zeros((n, n, n)),
        d2metric=lambda p: np.zeros((n, n, n, n)),
        derivative_mode=mode,
        params={"n": n, "side": side},
    )


def flat_torus(n: int = 2, mode: str = ANALYTIC) -> MetricChart:
    eye = np.eye(n)
    return MetricChart(
        name="flat-torus",
        bounds=((0.0, 1.0),) * n,
        periodic=(True,) * n,
        metric=lambda p: eye.copy(),
        dmetric=lambda p: np.zeros((n, n, n)),
        d2metric=lambda p: np.zeros((n, n, n, n)),
        derivative_mode=mode,
        closed=True,
        euler_characteristic=0,
        total_volume=1.0,
        excluded_volume=lambda delta: 0.0,
        params={"n": n},
    )


def _sphere_metric(p, r, dim):
    s2 = np.sin(p[:-1]) ** 2
    diag = np.empty(dim)
    acc = r * r
    for i in range(dim):
        diag[i] = acc
        if i < dim - 1:
            acc *= s2[i]
    return np.diag(diag)


def _sphere_dmetric(p, r, dim):
    s2 = np.sin(p[:-1]) ** 2
    ds2 = np.sin(2 * p[:-1])
    out = np.zeros((dim, dim, dim))
    for i in range(dim):
        for k in range(min(i, dim - 1)):
            prod = r * r * ds2[k]
            for j in range(i):
                if j != k:
                    prod *= s2[j]
            out[k, i, i] = prod
    return out


def _sphere_d2metric(p, r, dim):
    s2 = np.sin(p[:-1]) ** 2
    ds2 = np.sin(2 * p[:-1])
    dds2 = 2 * np.cos(2 * p[:-1])
    out = np.zeros((dim, dim, dim, dim))
    for i in range(dim):
        for k in range(i):
            for l in range(i):
                prod = r * r
                if k == l:
                    prod *= dds2[k]
                else:
                    prod *= ds2[k] * ds2[l]
                for j in range(i):
                    if j != k and j != l:
                        prod *= s2[j]
                out[k, l, i, i] = prod
    return out


def sphere(r: float = 1.0, dim: int = 2, mode: str = ANALYTIC) -> MetricChart:
    """Round ``dim``-sphere of radius ``r`` in hyperspherical coordinates.

    Axes 0..dim-2 are polar angles in [0, pi]; the last axis is the periodic
    azimuth. For dim = 2 this is ``r^2 (dtheta^2 + sin^2 theta dphi^2)``.
    """
    if dim < 2:
        raise ConfigurationError("sphere dimension must be >= 2")
    polar = tuple(range(dim - 1))

    def kept(delta):
        v = r ** dim * 2 * math.pi
        for j in polar:
            v *= _sin_power_integral(dim - 1 - j, delta, math.pi - delta)
        return v

    total = kept(0.0)
    return MetricChart(
        name="sphere" if dim == 2 else f"sphere{dim}",
        bounds=((0.0, math.pi),) * (dim - 1) + ((0.0, 2 * math.pi),),
        periodic=(False,) * (dim - 1) + (True,),
        metric=partial(_sphere_metric, r=r, dim=dim),
        dmetric=partial(_sphere_dmetric, r=r, dim=dim),
        d2metric=partial(_sphere_d2metric, r=r, dim=dim),
        derivative_mode=mode,
        closed=True,
        euler_characteristic=2 if dim % 2 == 0 else 0,
        singular_axes=polar,
        total_volume=total,
        excluded_volume=lambda delta: total - kept(delta),
        params={"r": r, "dim": dim},
    )


def round_s4(r: float = 1.0, mode: str = ANALYTIC) -> MetricChart:
    return sphere(r, 4, mode)


def _conformal_chart(name, bounds, lam, dlam, d2lam, mode, **kw):
    n = len(bounds)
    eye = np.eye(n)
    return MetricChart(
        name=name,
        bounds=bounds,
        metric=lambda p: lam(p) * eye,
        dmetric=lambda p: np.einsum("k,ij->kij", dlam(p), eye),
        d2metric=lambda p: np.einsum("kl,ij->klij", d2lam(p), eye),
        derivative_mode=mode,
        **kw,
    )


def half_plane(x_range=(-2.0, 2.0), y_range=(0.05, 20.0), mode: str = ANALYTIC) -> MetricChart:
    """Upper half-plane with the curvature -1 metric ``(dx^2 + dy^2) / y^2``."""
    lam = lambda p: 1.0 / p[1] ** 2
    dlam = lambda p: np.array([0.0, -2.0 / p[1] ** 3])
    d2lam = lambda p: np.array([[0.0, 0.0], [0.0, 6.0 / p[1] ** 4]])
    return _conformal_chart("half-plane", (tuple(x_range), tuple(y_range)), lam, dlam, d2lam, mode,
                            params={"x_range": tuple(x_range), "y_range": tuple(y_range)})


def sphere_stereo(r: float = 1.0, half_width: float = 2.0, mode: str = ANALYTIC) -> MetricChart:
    """Sphere of radius ``r`` in stereographic coordinates (conformal chart).

    ``4 r^2 / (1 + x^2 + y^2)^2 (dx^2 + dy^2)``; the unit disk is the upper
    hemisphere and the coordinate axes are great circles.
    """
    def lam(p):
        return 4 * r * r / (1 + p @ p) ** 2

    def dlam(p):
        return -16 * r * r * p / (1 + p @ p) ** 3

    def d2lam(p):
        q = 1 + p @ p
        return r * r * (-16 * np.eye(2) / q ** 3 + 96 * np.outer(p, p) / q ** 4)

    w = half_width
    return _conformal_chart("sphere-stereo", ((-w, w), (-w, w)), lam, dlam, d2lam, mode,
                            params={"r": r, "half_width": w})


def model_thin(u_max: float = 12.0, mode: str = ANALYTIC) -> MetricChart:
    """Product metric ``du^2 + exp(-6u) dtheta^2`` on [0, u_max] x [0, 1)."""
    def metric(p):
        return np.diag([1.0, math.exp(-6 * p[0])])

    def dmetric(p):
        out = np.zeros((2, 2, 2))
        out[0, 1, 1] = -6 * math.exp(-6 * p[0])
        return out

    def d2metric(p):
        out = np.zeros((2, 2, 2, 2))
        out[0, 0, 1, 1] = 36 * math.exp(-6 * p[0])
        return out

    return MetricChart(
        name="model-thin",
        bounds=((0.0, u_max), (0.0, 1.0)),
        periodic=(False, True),
        metric=metric,
        dmetric=dmetric,
        d2metric=d2metric,
        derivative_mode=mode,
        params={"u_max": u_max},
    )


def product(m1: MetricChart, m2: MetricChart, mode: str | None = None) -> MetricChart:
    """Riemannian product; block-diagonal metric on concatenated coordinates."""
    n1, n2 = m1.dimension, m2.dimension
    n = n1 + n2

    def metric(p):
        out = np.zeros((n, n))
        out[:n1, :n1] = m1.metric(p[:n1])
        out[n1:, n1:] = m2.metric(p[n1:])
        return out

    def dmetric(p):
        out = np.zeros((n, n, n))
        out[:n1, :n1, :n1] = m1.dmetric(p[:n1])
        out[n1:, n1:, n1:] = m2.dmetric(p[n1:])
        return out

    def d2metric(p):
        out = np.zeros((n, n, n, n))
        out[:n1, :n1, :n1, :n1] = m1.d2metric(p[:n1])
        out[n1:, n1:, n1:, n1:] = m2.d2metric(p[n1:])
        return out

    analytic = m1.d2metric is not None and m2.d2metric is not None
    if mode is None:
        mode = ANALYTIC if (m1.derivative_mode == ANALYTIC and m2.derivative_mode == ANALYTIC) else FINITE_DIFFERENCE
    closed = m1.closed and m2.closed
    chi = None
    if m1.euler_characteristic is not None and m2.euler_characteristic is not None:
        chi = m1.euler_characteristic * m2.euler_characteristic
    total = None
    if m1.total_volume is not None and m2.total_volume is not None:
        total = m1.total_volume * m2.total_volume

    def excluded(delta):
        k1 = m1.total_volume - m1.excluded_volume(delta)
        k2 = m2.total_volume - m2.excluded_volume(delta)
        return total - k1 * k2

    has_excluded = total is not None and m1.excluded_volume is not None and m2.excluded_volume is not None

    return MetricChart(
        name=f"{m1.name}x{m2.name}",
        bounds=m1.bounds + m2.bounds,
        periodic=m1.periodic + m2.periodic,
        metric=metric,
        dmetric=dmetric if analytic else None,
        d2metric=d2metric if analytic else None,
        derivative_mode=mode,
        closed=closed,
        euler_characteristic=chi,
        singular_axes=m1.singular_axes + tuple(a + n1 for a in m2.singular_axes),
        total_volume=total,
        excluded_volume=excluded if has_excluded else None,
        params={"factors": (m1.name, m2.name)},
    )


def s2xs2(r1: float = 1.0, r2: float = 1.0, mode: str = ANALYTIC) -> MetricChart:
    return product(sphere(r1), sphere(r2), mode=mode)


def scaled(chart: MetricChart, c: float) -> MetricChart:
    """The same chart with metric ``c^2 g``."""
    c2 = c * c
    n = chart.dimension
    ev = chart.excluded_volume
    return MetricChart(
        name=f"{chart.name}*{c:g}",
        bounds=chart.bounds,
        periodic=chart.periodic,
        metric=lambda p: c2 * np.asarray(chart.metric(p)),
        dmetric=None if chart.dmetric is None else (lambda p: c2 * np.asarray(chart.dmetric(p))),
        d2metric=None if chart.d2metric is None else (lambda p: c2 * np.asarray(chart.d2metric(p))),
        derivative_mode=chart.derivative_mode,
        step=chart.step,
        closed=chart.closed,
        euler_characteristic=chart.euler_characteristic,
        singular_axes=chart.singular_axes,
        total_volume=None if chart.total_volume is None else chart.total_volume * c ** n,
        excluded_volume=None if ev is None else (lambda delta: ev(delta) * c ** n),
        params={**chart.params, "scale": c},
    )


def _mode(params):
    return params.pop("mode", ANALYTIC)


_CATALOG = {
    "euclidean": lambda p: euclidean(int(p.pop("n", 2)), float(p.pop("side", 1.0)), _mode(p)),
    "flat-torus": lambda p: flat_torus(int(p.pop("n", 2)), _mode(p)),
    "sphere": lambda p: sphere(float(p.pop("radius", p.pop("r", 1.0))), int(p.pop("dim", 2)), _mode(p)),
    "s4": lambda p: round_s4(float(p.pop("radius", p.pop("r", 1.0))), _mode(p)),
    "s2xs2": lambda p: s2xs2(float(p.pop("r1", p.pop("radius", 1.0))), float(p.pop("r2", 1.0)), _mode(p)),
    "half-plane": lambda p: half_plane(mode=_mode(p)),
    "sphere-stereo": lambda p: sphere_stereo(float(p.pop("radius", 1.0)), mode=_mode(p)),
    "model-thin": lambda p: model_thin(float(p.pop("u_max", 12.0)), _mode(p)),
}


def metric_names() -> list[str]:
    return sorted(_CATALOG)


def get_metric(name: str, **params) -> MetricChart:
    """Look up a builtin chart by catalog name.

    >>> get_metric("sphere", radius=2.0).params["r"]
    2.0
    """
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise ConfigurationError(f"unknown metric {name!r}; known: {', '.join(metric_names())}") from None
    params = {k: v for k, v in params.items() if v is not None}
    chart = factory(params)
    if params:
        raise ConfigurationError(f"unused parameters for metric {name!r}: {sorted(params)}")
    return chart
