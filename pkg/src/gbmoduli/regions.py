"""Builtin regions: planar, spherical and hyperbolic polygons, the thin-part
annulus of the model metric, and the truncated modular domain."""
from __future__ import annotations

import math

import numpy as np

from .catalog import euclidean, half_plane, model_thin, sphere, sphere_stereo
from .errors import ConfigurationError
from .polyhedra import Constraint, Face, Region

_ZERO2 = np.zeros((2, 2))


def _linear(axis: int, offset: float, sign: float, name: str) -> Constraint:
    """``sign * (x[axis] - offset) >= 0``."""
    g = np.zeros(2)
    g[axis] = sign
    return Constraint(lambda x: sign * (x[..., axis] - offset), name,
                      grad=lambda p: g.copy(), hess=lambda p: _ZERO2.copy())


def _disk_constraint(r: float, name: str) -> Constraint:
    return Constraint(lambda x: r * r - x[..., 0] ** 2 - x[..., 1] ** 2, name,
                      grad=lambda p: -2.0 * np.asarray(p, dtype=float),
                      hess=lambda p: -2.0 * np.eye(2), scale=max(1.0, r * r))


def _polar(t):
    return np.array([t[0] * math.cos(t[1]), t[0] * math.sin(t[1])])


def unit_square() -> Region:
    cons = [_linear(0, 0.0, 1.0, "left"), _linear(0, 1.0, -1.0, "right"),
            _linear(1, 0.0, 1.0, "bottom"), _linear(1, 1.0, -1.0, "top")]
    edges = [
        Face(frozenset({0}), 1, "left", lambda t: np.array([0.0, t[0]]), ((0.0, 1.0),)),
        Face(frozenset({1}), 1, "right", lambda t: np.array([1.0, t[0]]), ((0.0, 1.0),)),
        Face(frozenset({2}), 1, "bottom", lambda t: np.array([t[0], 0.0]), ((0.0, 1.0),)),
        Face(frozenset({3}), 1, "top", lambda t: np.array([t[0], 1.0]), ((0.0, 1.0),)),
    ]
    corners = [
        Face(frozenset({0, 2}), 0, "lower-left", point=(0.0, 0.0)),
        Face(frozenset({1, 2}), 0, "lower-right", point=(1.0, 0.0)),
        Face(frozenset({1, 3}), 0, "upper-right", point=(1.0, 1.0)),
        Face(frozenset({0, 3}), 0, "upper-left", point=(0.0, 1.0)),
    ]
    return Region(euclidean(2), cons, edges + corners, {"chi": 1, "chi_boundary": 0},
                  box=((0.0, 1.0), (0.0, 1.0)),
                  interior_pieces=[(lambda t: np.asarray(t, dtype=float), ((0.0, 1.0), (0.0, 1.0)))],
                  name="square")


def disk(r: float = 1.0) -> Region:
    """Round disk of radius ``r`` centred at the origin of the flat plane."""
    chart = euclidean(2, side=3 * r, lo=-1.5 * r)
    circle = Face(frozenset({0}), 1, "circle",
                  lambda t: np.array([r * math.cos(t[0]), r * math.sin(t[0])]), ((0.0, 2 * math.pi),))
    return Region(chart, [_disk_constraint(r, "circle")], [circle], {"chi": 1, "chi_boundary": 0},
                  box=((-r, r), (-r, r)),
                  interior_pieces=[(_polar, ((0.0, r), (0.0, 2 * math.pi)))], name=f"disk(r={r:g})")


def quarter_disk() -> Region:
    cons = [_linear(0, 0.0, 1.0, "x>=0"), _linear(1, 0.0, 1.0, "y>=0"), _disk_constraint(1.0, "arc")]
    return Region(euclidean(2), cons, (), {"chi": 1, "chi_boundary": 0}, box=((0.0, 1.0), (0.0, 1.0)),
                  interior_pieces=[(_polar, ((0.0, 1.0), (0.0, math.pi / 2)))], name="quarter-disk")


def hemisphere(r: float = 1.0) -> Region:
    chart = sphere(r)
    cons = [Constraint(lambda x: math.pi / 2 - x[..., 0], "equator",
                       grad=lambda p: np.array([-1.0, 0.0]), hess=lambda p: _ZERO2.copy())]
    equator = Face(frozenset({0}), 1, "equator", lambda t: np.array([math.pi / 2, t[0]]),
                   ((0.0, 2 * math.pi),))
    box = ((0.0, math.pi / 2), (0.0, 2 * math.pi))
    return Region(chart, cons, [equator], {"chi": 1, "chi_boundary": 0}, box=box,
                  interior_pieces=[(lambda t: np.asarray(t, dtype=float), box)], name="hemisphere")


def spherical_right_triangle() -> Region:
    """Octant of the unit sphere, drawn in the stereographic chart.

    Sides are the two coordinate axes and the equator (unit circle), all
    great circles; each corner is a right angle.
    """
    chart = sphere_stereo(1.0)
    cons = [_linear(0, 0.0, 1.0, "x>=0"), _linear(1, 0.0, 1.0, "y>=0"), _disk_constraint(1.0, "equator")]
    edges = [
        Face(frozenset({0}), 1, "x=0", lambda t: np.array([0.0, t[0]]), ((0.0, 1.0),)),
        Face(frozenset({1}), 1, "y=0", lambda t: np.array([t[0], 0.0]), ((0.0, 1.0),)),
        Face(frozenset({2}), 1, "equator", lambda t: np.array([math.cos(t[0]), math.sin(t[0])]),
             ((0.0, math.pi / 2),)),
    ]
    corners = [
        Face(frozenset({0, 1}), 0, "pole", point=(0.0, 0.0)),
        Face(frozenset({1, 2}), 0, "east", point=(1.0, 0.0)),
        Face(frozenset({0, 2}), 0, "north", point=(0.0, 1.0)),
    ]
    return Region(chart, cons, edges + corners, {"chi": 1, "chi_boundary": 0},
                  box=((0.0, 1.0), (0.0, 1.0)),
                  interior_pieces=[(_polar, ((0.0, 1.0), (0.0, math.pi / 2)))],
                  name="spherical-triangle")


def _cayley_to_disk(x):
    z = x[..., 0] + 1j * x[..., 1]
    return (z - 1j) / (z + 1j)


def _disk_to_plane(w: complex) -> np.ndarray:
    z = 1j * (1 + w) / (1 - w)
    return np.array([z.real, z.imag])


def hyperbolic_right_pentagon() -> Region:
    """Regular right-angled pentagon, built in the Poincare disk and carried
    to the upper half-plane by the Cayley map.

    A regular n-gon with interior angle b has circumradius R with
    ``cosh R = cot(pi/n) cot(b/2)``; each side lies on a circle orthogonal
    to the unit circle through two consecutive vertices.
    """
    n = 5
    circum = math.acosh(1.0 / math.tan(math.pi / n))
    rv = math.tanh(circum / 2)
    d = (1 + rv * rv) / (2 * rv * math.cos(math.pi / n))
    s = math.sqrt(d * d - 1)
    vert_angles = [2 * math.pi * k / n for k in range(n + 1)]
    mids = [2 * math.pi * (k + 0.5) / n for k in range(n)]
    centers = [d * complex(math.cos(g), math.sin(g)) for g in mids]

    def side(k):
        ck = centers[k]

        # c = |F|^2 - s^2 with F = w(z) - ck holomorphic, w' = 2i/(z+i)^2
        def parts(p):
            z = complex(p[0], p[1])
            f = (z - 1j) / (z + 1j) - ck
            return f, 2j / (z + 1j) ** 2, -4j / (z + 1j) ** 3

        def grad(p):
            f, d1, _ = parts(p)
            q = f.conjugate() * d1
            return np.array([2 * q.real, -2 * q.imag])

        def hess(p):
            f, d1, d2 = parts(p)
            a, b = abs(d1) ** 2, f.conjugate() * d2
            return 2 * np.array([[a + b.real, -b.imag], [-b.imag, a - b.real]])

        return Constraint(lambda x: np.abs(_cayley_to_disk(x) - ck) ** 2 - s * s, f"side{k}",
                          grad=grad, hess=hess)

    def rho_max(alpha, k):
        c = math.cos(alpha - mids[k])
        return d * c - math.sqrt(d * d * c * c - 1)

    def edge_param(k):
        return lambda t: _disk_to_plane(rho_max(t[0], k) * complex(math.cos(t[0]), math.sin(t[0])))

    def piece(k):
        def param(t):
            rho = t[0] * rho_max(t[1], k)
            return _disk_to_plane(rho * complex(math.cos(t[1]), math.sin(t[1])))
        return param, ((0.0, 1.0), (vert_angles[k], vert_angles[k + 1]))

    cons = [side(k) for k in range(n)]
    edges = [Face(frozenset({k}), 1, f"side{k}", edge_param(k), ((vert_angles[k], vert_angles[k + 1]),))
             for k in range(n)]
    corners = []
    for k in range(n):
        w = rv * complex(math.cos(vert_angles[k]), math.sin(vert_angles[k]))
        corners.append(Face(frozenset({(k - 1) % n, k}), 0, f"vertex{k}",
                            point=tuple(_disk_to_plane(w).tolist())))
    return Region(half_plane(), cons, edges + corners, {"chi": 1, "chi_boundary": 0},
                  box=((-1.0, 1.0), (0.3, 2.5)),
                  interior_pieces=[piece(k) for k in range(n)], name="hyperbolic-pentagon",
                  meta={"circumradius": circum, "vertex_radius": rv})


def thin_strip(u0: float, u_inner: float = 0.0) -> Region:
    """Annulus ``u_inner <= u <= u0`` of the model metric du^2 + e^{-6u} dtheta^2."""
    if not u0 > u_inner:
        raise ConfigurationError("thin strip needs u0 > u_inner")
    chart = model_thin(max(12.0, u0 + 1.0))
    cons = [_linear(0, u_inner, 1.0, "inner"), _linear(0, u0, -1.0, "outer")]
    faces = [
        Face(frozenset({0}), 1, "inner", lambda t: np.array([u_inner, t[0]]), ((0.0, 1.0),)),
        Face(frozenset({1}), 1, "outer", lambda t: np.array([u0, t[0]]), ((0.0, 1.0),)),
    ]
    box = ((u_inner, u0), (0.0, 1.0))
    return Region(chart, cons, faces, {"chi": 0, "chi_boundary": 0}, box=box,
                  interior_pieces=[(lambda t: np.asarray(t, dtype=float), box)], name="thin-strip",
                  meta={"u0": u0, "u_inner": u_inner})


# Principal congruence subgroup of level 3: index 12 in PSL(2, Z), torsion
# free, quotient of genus 0 with 4 cusps of width 3.
GAMMA3 = {"index": 12, "genus": 0, "cusps": 4, "cusp_width": 3}


def modular_truncated(cutoff: float, index: int = GAMMA3["index"]) -> Region:
    """Standard modular fundamental domain cut at height ``cutoff``.

    The side lines and the unit arc are identified in the quotient, so the
    only genuine boundary is the horocycle; its face carries the covering
    multiplicity. Topology is known for the level-3 cover only.
    """
    if cutoff < 1.0:
        raise ConfigurationError("cutoff must be >= 1")
    chart = half_plane(x_range=(-0.5, 0.5), y_range=(0.5, max(20.0, cutoff + 1.0)))
    cons = [
        _linear(1, cutoff, -1.0, "horocycle"),
        _linear(0, -0.5, 1.0, "a>=-1/2"),
        _linear(0, 0.5, -1.0, "a<=1/2"),
        Constraint(lambda x: x[..., 0] ** 2 + x[..., 1] ** 2 - 1.0, "unit-arc",
                   grad=lambda p: 2.0 * np.asarray(p, dtype=float), hess=lambda p: 2.0 * np.eye(2)),
    ]
    horocycle = Face(frozenset({0}), 1, "horocycle", lambda t: np.array([t[0], cutoff]),
                     ((-0.5, 0.5),), multiplicity=index)
    cell = None
    if index == GAMMA3["index"]:
        cell = {"chi": 2 - 2 * GAMMA3["genus"] - GAMMA3["cusps"], "chi_boundary": 0}
    return Region(chart, cons, [horocycle], cell, box=((-0.5, 0.5), (math.sqrt(0.75), cutoff)),
                  name="modular-truncated", meta={"cutoff": cutoff, "index": index})


POLYGONS = {
    "square": unit_square,
    "spherical-triangle": spherical_right_triangle,
    "hyperbolic-pentagon": hyperbolic_right_pentagon,
}


def get_polygon(name: str) -> Region:
    try:
        return POLYGONS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown polygon {name!r}; known: {', '.join(sorted(POLYGONS))}") from None
