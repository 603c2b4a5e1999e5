"""Desk-scale models of the moduli space of the once-punctured torus.

* Fricke trace triples ``x^2 + y^2 + z^2 = xyz`` with Markov moves, the
  systole by descent, and a brute-force tree search to check it.
* Fenchel-Nielsen style coordinates ``(l, s)`` mapped to triples, and the
  logarithmic thin-part coordinates ``u = -log sqrt(l)``.
* The product model metric ``du^2 + exp(-6u) dtheta^2`` near a short curve:
  gradient of the length function, level-set second fundamental form,
  torus-fibre volumes and outer cones.
* The curvature -1 modular-curve model: truncated fundamental-domain area
  and the resulting Euler characteristic.
* Exhaustible model handles consumed by :func:`assembly.exhaustion_report`.
"""
from __future__ import annotations

import decimal
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .assembly import gauss_bonnet_closed, residual_bound, residual_constant
from .catalog import get_metric, model_thin
from .chart import FINITE_DIFFERENCE, volume_density
from .chi import chi_finite_cover
from .errors import CapabilityError, ConfigurationError, DomainError, ModelConsistencyError
from .euler_form import gb_density
from .integrate import QuadratureSpec, quad_box, quad_region
from .polyhedra import Constraint, Face, Region, face_volume, second_fundamental_form
from .regions import GAMMA3, modular_truncated, thin_strip

RELATION_TOL = 1e-9
MAX_MOVES = 10**6

# ---------------------------------------------------------------- Fricke side


def _relation_residual(x, y, z):
    return x * x + y * y + z * z - x * y * z


@dataclass(frozen=True)
class FrickeTriple:
    """Traces of a once-punctured torus; floats or exact Fractions.

    Floats must satisfy the trace relation to ``1e-9`` relative to
    ``max(1, xyz)``; Fractions exactly. All entries exceed 2.
    """

    x: float | Fraction
    y: float | Fraction
    z: float | Fraction

    def __post_init__(self):
        x, y, z = self.x, self.y, self.z
        if min(x, y, z) <= 2:
            raise DomainError(f"Fricke entries must exceed 2, got {self.as_tuple()}")
        resid = _relation_residual(x, y, z)
        if self.exact:
            if resid != 0:
                raise DomainError(f"exact triple {self.as_tuple()} violates x^2+y^2+z^2 = xyz")
        elif abs(resid) > RELATION_TOL * max(1.0, abs(float(x * y * z))):
            raise DomainError(f"triple {self.as_tuple()} violates the trace relation by {float(resid):.3e}")

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in (self.x, self.y, self.z))

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z)

    def move(self, i: int) -> "FrickeTriple":
        """Markov move at position ``i``: replace it by (product of the others) - it."""
        v = list(self.as_tuple())
        a, b = (v[j] for j in range(3) if j != i)
        v[i] = a * b - v[i]
        return FrickeTriple(*v)


@dataclass(frozen=True)
class Reduction:
    triple: FrickeTriple
    moves: int


def fricke_reduce(t: FrickeTriple) -> Reduction:
    """Descend to the minimal triple by lowering the largest entry."""
    moves = 0
    while True:
        v = t.as_tuple()
        i = max(range(3), key=lambda j: v[j])
        a, b = (v[j] for j in range(3) if j != i)
        new = a * b - v[i]
        if not new < v[i]:
            return Reduction(t, moves)
        t = t.move(i)
        moves += 1
        if moves > MAX_MOVES:
            raise ModelConsistencyError(f"descent did not terminate after {MAX_MOVES} moves")


def trace_to_length(trace) -> float:
    return 2.0 * math.acosh(float(trace) / 2.0)


def min_trace(t: FrickeTriple):
    return min(fricke_reduce(t).triple.as_tuple())


def systole(t: FrickeTriple) -> float:
    """Length of the shortest simple closed geodesic, ``2 acosh(t_min / 2)``."""
    return trace_to_length(min_trace(t))


def thick_membership(t: FrickeTriple, eps: float) -> bool:
    if not eps > 0:
        raise DomainError("eps must be positive")
    return systole(t) >= eps


def tree_search_min_trace(t: FrickeTriple, depth: int = 12, rel_tie: float = 1e-20):
    """Smallest entry over every triple within ``depth`` Markov moves.

    Brute force over the non-backtracking tree of moves. Exact input is
    searched in decimal arithmetic whose precision covers the cancellation
    in ``ab - c`` (twice the digit count of the largest entry plus a
    margin); every path whose minimum ties the best within ``rel_tie`` is
    then replayed in exact rationals and the exact minimum returned. Float
    input is searched in floats. Used as an oracle for :func:`fricke_reduce`.
    """
    if t.exact:
        mag = max(len(str(abs(Fraction(v).numerator))) - len(str(Fraction(v).denominator)) + 1
                  for v in t.as_tuple())
        ctx = decimal.Context(prec=2 * max(mag, 1) + 60, Emax=decimal.MAX_EMAX, Emin=decimal.MIN_EMIN)
        conv = lambda v: ctx.divide(decimal.Decimal(Fraction(v).numerator), decimal.Decimal(Fraction(v).denominator))
        mul, sub = ctx.multiply, ctx.subtract
        tie = decimal.Decimal(rel_tie)
    else:
        conv = float
        mul, sub = (lambda a, b: a * b), (lambda a, b: a - b)
        tie = 1e-12
    start = tuple(conv(v) for v in t.as_tuple())
    best = min(start)
    found = [((), best)]
    queue = deque([(start, -1, ())])
    while queue:
        v, last, path = queue.popleft()
        m = min(v)
        if m <= best * (1 + tie):
            found.append((path, m))
            best = min(best, m)
        if len(path) == depth:
            continue
        for i in range(3):
            if i != last:
                a, b = (v[j] for j in range(3) if j != i)
                nxt = tuple(sub(mul(a, b), v[k]) if k == i else v[k] for k in range(3))
                queue.append((nxt, i, path + (i,)))
    candidates = [p for p, m in found if m <= best * (1 + tie)]
    if not t.exact:
        return best
    exact = []
    for path in candidates:
        cur = t
        for i in path:
            cur = cur.move(i)
        exact.append(min(cur.as_tuple()))
    return min(exact)


def random_exact_triple(rng: np.random.Generator, max_moves: int = 12) -> FrickeTriple:
    """Random exact rational triple a few upward moves from a minimal one.

    With rational ``t > 1`` put ``x = t + 1/t`` so ``x^2 - 4 = (t - 1/t)^2``;
    a rational divisor ``d`` of ``4x^2`` then makes the discriminant of the
    quadratic in ``z`` a perfect square.
    """
    while True:
        tt = Fraction(int(rng.integers(11, 60)), 10)
        d = Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 10)))
        x = tt + 1 / tt
        q = tt - 1 / tt
        y = (d + 4 * x * x / d) / (2 * q)
        w = (4 * x * x / d - d) / 2
        z = (x * y + w) / 2
        if min(y, z) > 2:
            base = fricke_reduce(FrickeTriple(x, y, z)).triple
            if max(base.as_tuple()) < 20:
                break
    cur, last = base, -1
    for _ in range(int(rng.integers(0, max_moves + 1))):
        v = cur.as_tuple()
        # an upward move replaces a non-largest entry
        choices = [i for i in range(3) if i != last and v[i] < max(v)] or [i for i in range(3) if i != last]
        i = int(rng.choice(choices))
        nxt = cur.move(i)
        if max(nxt.as_tuple()) <= max(v):
            continue
        cur, last = nxt, i
    return cur


def fn_to_fricke(length: float, twist: float) -> FrickeTriple:
    """Triple of traces from a length ``l`` and twist ``s`` of one curve.

    ``x = 2 cosh(l/2)``, ``y, z = 2 coth(l/2) cosh(s +- l/4)``; the Dehn
    twist ``s -> s - l/2`` permutes ``y`` and a neighbour of the tree.
    """
    if not length > 0:
        raise DomainError("length must be positive")
    c = 1.0 / math.tanh(length / 2)
    return FrickeTriple(2 * math.cosh(length / 2), 2 * c * math.cosh(twist + length / 4),
                        2 * c * math.cosh(twist - length / 4))


# ------------------------------------------------------------ thin-part model


@dataclass(frozen=True)
class ThinCoords:
    u: float
    theta: float

    def __post_init__(self):
        if self.u < 0:
            raise DomainError("u must be >= 0 (lengths at most 1)")
        if not 0.0 <= self.theta < 1.0:
            raise DomainError("theta must lie in [0, 1)")

    @property
    def length(self) -> float:
        return math.exp(-2 * self.u)

    @classmethod
    def from_fn(cls, length: float, twist: float) -> "ThinCoords":
        if not 0 < length <= 1:
            raise DomainError("thin coordinates need 0 < l <= 1")
        return cls(-math.log(math.sqrt(length)), (twist / (length / 2)) % 1.0)


def level_u(eps: float) -> float:
    """``u0 = -log sqrt(eps)``, the level where the short length equals ``eps``."""
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    return -0.5 * math.log(eps)


def thin_model_metric(u: float) -> np.ndarray:
    if u < 0:
        raise DomainError("u must be >= 0")
    return np.diag([1.0, math.exp(-6 * u)])


def grad_length_norm(u: float, theta: float = 0.0, h: float = 1e-3) -> float:
    """``|grad l|`` for ``l = exp(-2u)`` in the model metric.

    The differential of ``l`` is taken by Richardson-extrapolated central
    differences, so the ratio to ``l`` is an independent check of the
    closed form 2.
    """
    def length(x):
        return math.exp(-2 * x[0])

    x = np.array([u, theta], dtype=float)
    dl = np.zeros(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        d1 = (length(x + h * e) - length(x - h * e)) / (2 * h)
        d2 = (length(x + 2 * h * e) - length(x - 2 * h * e)) / (4 * h)
        dl[i] = (4 * d1 - d2) / 3
    return float(math.sqrt(dl @ np.linalg.solve(thin_model_metric(u), dl)))


@dataclass
class LevelSetII:
    closed_form: float
    numeric: float
    u0: float


def level_set_ii(u0: float, mode: str = FINITE_DIFFERENCE) -> LevelSetII:
    """Second fundamental form of ``{u = u0}`` as the boundary of ``{u >= u0}``.

    The closed form is ``Gamma^u_{theta theta} / g_{theta theta} = 3``. The
    numeric value uses finite-difference Christoffels and a constraint
    without closed-form derivatives.
    """
    if u0 < 0:
        raise DomainError("u0 must be >= 0")
    chart = model_thin(u0 + 2.0, mode)
    cons = [Constraint(lambda x: x[..., 0] - u0, "level")]
    face = Face(frozenset({0}), 1, "level", lambda t: np.array([u0, t[0]]), ((0.0, 1.0),))
    region = Region(chart, cons, [face], name="upper-level")
    ii = second_fundamental_form(region, face, np.array([u0, 0.5])).matrix[0, 0]
    return LevelSetII(3.0, float(ii), u0)


@dataclass
class FibreVolume:
    value: float
    closed_form: float
    exponent: float
    proof_exponent: float
    eps: float
    m: int


def thin_fibre_volume(eps: float, m: int = 1) -> FibreVolume:
    """Volume of the ``m``-torus fibre over the level ``u0 = -log sqrt(eps)``.

    The circle factor is integrated on the model chart; the m-fold product
    metric multiplies lengths. ``exponent`` is ``3m/2`` (the Riemannian
    scaling); ``proof_exponent`` records ``3m`` alongside it.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    if m < 1:
        raise DomainError("m must be a positive integer")
    u0 = level_u(eps)
    strip = thin_strip(u0)
    circle = face_volume(strip, strip.face("outer"))
    return FibreVolume(circle ** m, math.exp(-3 * u0 * m), 1.5 * m, 3.0 * m, eps, m)


def fibre_volume_slope(eps_list: Iterable[float], m: int = 1) -> float:
    eps = np.array(list(eps_list), dtype=float)
    vol = np.array([thin_fibre_volume(e, m).value for e in eps])
    return float(np.polyfit(np.log(eps), np.log(vol), 1)[0])


@dataclass(frozen=True)
class OuterCone:
    """``{(u, theta) : u > u0}`` over one point of the epsilon-level."""

    apex_u: float
    theta: float
    eps: float

    def contains(self, p: ThinCoords) -> bool:
        return p.u > self.apex_u and p.theta == self.theta

    def retract(self, p: ThinCoords) -> ThinCoords:
        """Project to the apex level; distances in u never grow."""
        return ThinCoords(min(p.u, self.apex_u), p.theta)


def outer_cone(t: ThinCoords, eps: float, tol: float = 1e-12) -> OuterCone:
    u0 = level_u(eps)
    if abs(t.u - u0) > tol * max(1.0, u0):
        raise DomainError(f"point at u = {t.u} is not on the level u0 = {u0}")
    return OuterCone(u0, t.theta, eps)


# ------------------------------------------------------- modular-curve model


@dataclass
class AreaResult:
    area: float
    error: float
    tail: float
    converged: bool
    index: int
    cutoff: float


def modular_thick_area(cutoff: float, index: int = 1, spec: QuadratureSpec | None = None) -> AreaResult:
    """``index`` times the hyperbolic area of ``{|a| <= 1/2, a^2+b^2 >= 1, b <= Y}``.

    Inner variable ``b = h + s (Y - h)`` with ``h = sqrt(1 - a^2)``; for
    ``Y = inf`` use ``b = h / s`` instead. The cut-off tail is ``1/Y`` per
    sheet.
    """
    if not cutoff >= 1:
        raise DomainError("cutoff must be >= 1")
    if index < 1:
        raise DomainError("index must be a positive integer")
    spec = spec or QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)
    if math.isinf(cutoff):
        def f(p):
            return 1.0 / math.sqrt(1 - p[0] ** 2)
        tail = 0.0
    else:
        def f(p):
            h = math.sqrt(1 - p[0] ** 2)
            b = h + p[1] * (cutoff - h)
            return (cutoff - h) / (b * b)
        tail = 1.0 / cutoff
    r = quad_box(f, ((-0.5, 0.5), (0.0, 1.0)), spec)
    return AreaResult(index * r.value, index * r.error, index * tail, r.converged, index, cutoff)


def chi_from_area(area: float) -> float:
    """Euler characteristic of a complete curvature -1 surface of given area."""
    if area < 0:
        raise DomainError("area must be nonnegative")
    return -area / (2 * math.pi)


# --------------------------------------------------------- exhaustible models


class ModularCurveModel:
    """Truncations ``b <= 1/eps`` of the ``index``-sheeted modular surface."""

    name = "modular-curve"

    def __init__(self, index: int = GAMMA3["index"], spec: QuadratureSpec | None = None):
        if index < 1:
            raise ConfigurationError("index must be a positive integer")
        self.index = index
        self.spec = spec
        chi = chi_finite_cover(Fraction(-1, 6), index)
        self.expected_chi = int(chi) if chi.denominator == 1 else None
        # density bound 1/2pi, horocycles have geodesic curvature 1
        self.psi_bound, self.ii_bound = 1 / (2 * math.pi), 1.0
        self.residual_note = {"C": residual_constant(2, self.psi_bound, self.ii_bound),
                              "formula": "(1 + psi + ii)^(n-1)", "psi": self.psi_bound, "ii": self.ii_bound}

    @staticmethod
    def cutoff(eps: float) -> float:
        if not 0 < eps <= 1:
            raise DomainError("eps must lie in (0, 1]")
        return 1.0 / eps

    def row_labels(self, eps: float) -> dict:
        return {"cutoff": self.cutoff(eps)}

    def thick_integral(self, eps: float, spec=None):
        res = modular_thick_area(self.cutoff(eps), self.index, spec or self.spec)
        return chi_from_area(res.area), res.error / (2 * math.pi)

    def residual(self, eps: float) -> float:
        return residual_bound(modular_truncated(self.cutoff(eps), self.index), self.psi_bound, self.ii_bound)

    def analytic(self, eps: float) -> float:
        return chi_from_area(self.index * (math.pi / 3 - eps))

    def sample(self, n: int, rng: np.random.Generator, eps_min: float) -> np.ndarray:
        a = rng.uniform(-0.5, 0.5, n)
        b = rng.uniform(math.sqrt(0.75), 1.5 * self.cutoff(eps_min), n)
        return np.stack([a, b], axis=-1)

    def contains(self, pts, eps: float) -> np.ndarray:
        return modular_truncated(self.cutoff(eps), self.index).indicator(pts)


class ThinStripModel:
    """The collar ``0 <= u <= -log sqrt(eps)`` of the model metric."""

    name = "thin-strip"
    expected_chi = 0

    def __init__(self, spec: QuadratureSpec | None = None):
        self.spec = spec
        self.psi_bound, self.ii_bound = 9 / (2 * math.pi), 3.0
        self.residual_note = {"C": residual_constant(2, self.psi_bound, self.ii_bound),
                              "formula": "(1 + psi + ii)^(n-1)", "psi": self.psi_bound, "ii": self.ii_bound}

    def row_labels(self, eps: float) -> dict:
        return {"u0": level_u(eps)}

    def thick_integral(self, eps: float, spec=None):
        strip = thin_strip(level_u(eps))
        chart = strip.chart

        def f(p):
            return gb_density(chart, p).value * volume_density(chart, p)

        spec = spec or self.spec or QuadratureSpec(abs_tol=1e-11, rel_tol=1e-11, mc_samples=4096)
        r = quad_region(f, strip, spec)
        return r.value, r.error

    def residual(self, eps: float) -> float:
        return residual_bound(thin_strip(level_u(eps)), self.psi_bound, self.ii_bound)

    def analytic(self, eps: float) -> float:
        return -(3 / (2 * math.pi)) * (1 - eps ** 1.5)

    def sample(self, n: int, rng: np.random.Generator, eps_min: float) -> np.ndarray:
        return np.stack([rng.uniform(0, level_u(eps_min) + 1, n), rng.uniform(0, 1, n)], axis=-1)

    def contains(self, pts, eps: float) -> np.ndarray:
        return thin_strip(level_u(eps)).indicator(pts)


class ClosedModel:
    """A closed manifold: every thick part is the whole manifold."""

    name = "closed"

    def __init__(self, metric: str = "sphere", spec: QuadratureSpec | None = None, **params):
        self.chart = get_metric(metric, **params)
        if not self.chart.closed:
            raise ConfigurationError(f"metric {metric!r} is not closed")
        self.spec = spec
        self.expected_chi = self.chart.euler_characteristic
        self.residual_note = {"C": 0.0, "formula": "no boundary"}
        self._report = None

    def row_labels(self, eps: float) -> dict:
        return {"metric": self.chart.name}

    def thick_integral(self, eps: float, spec=None):
        if self._report is None:
            self._report = gauss_bonnet_closed(self.chart, spec or self.spec)
        return self._report.total, self._report.interior_error

    def residual(self, eps: float) -> float:
        return 0.0

    def analytic(self, eps: float) -> Optional[float]:
        return None if self.expected_chi is None else float(self.expected_chi)

    def sample(self, n: int, rng: np.random.Generator, eps_min: float) -> np.ndarray:
        lo = np.array([b[0] for b in self.chart.bounds])
        hi = np.array([b[1] for b in self.chart.bounds])
        return rng.uniform(lo, hi, (n, len(lo)))

    def contains(self, pts, eps: float) -> np.ndarray:
        return np.ones(len(pts), dtype=bool)


class PuncturedTorusModel:
    """Thick parts in length-twist coordinates, decided by the systole.

    Membership and nesting are available; there is no closed-form metric on
    this model, so integrals are refused.
    """

    name = "punctured-torus"
    expected_chi = None
    residual_note: dict = {}

    def sample(self, n: int, rng: np.random.Generator, eps_min: float) -> np.ndarray:
        lengths = np.exp(rng.uniform(math.log(max(eps_min, 1e-3) / 4), math.log(8.0), n))
        twists = rng.uniform(-3.0, 3.0, n)
        return np.stack([lengths, twists], axis=-1)

    def contains(self, pts, eps: float) -> np.ndarray:
        return np.array([thick_membership(fn_to_fricke(l, s), eps) for l, s in np.asarray(pts)])

    def row_labels(self, eps: float) -> dict:
        return {}

    def thick_integral(self, eps: float, spec=None):
        raise CapabilityError("the punctured-torus model has no closed-form metric; "
                              "integrate on the modular-curve model instead")

    def residual(self, eps: float) -> float:
        raise CapabilityError("no boundary volumes on the punctured-torus model")

    def analytic(self, eps: float):
        return None


MODELS = {
    "modular-curve": ModularCurveModel,
    "thin-strip": ThinStripModel,
    "closed": ClosedModel,
    "punctured-torus": PuncturedTorusModel,
}


def get_model(name: str, **params):
    try:
        factory = MODELS[name]
    except KeyError:
        raise ConfigurationError(f"unknown model {name!r}; known: {', '.join(sorted(MODELS))}") from None
    params = {k: v for k, v in params.items() if v is not None}
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for model {name!r}: {exc}") from None
