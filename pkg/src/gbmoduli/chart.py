"""Chart-based Riemannian metrics and their curvature.

A :class:`MetricChart` is a coordinate box together with a point -> SPD
matrix evaluator. Curvature is assembled the textbook way: metric jet
(g, dg, ddg) -> Christoffel symbols -> Riemann tensor -> components in a
g-orthonormal frame.

Index conventions: ``dg[k, i, j] = d_k g_ij`` and
``ddg[k, l, i, j] = d_k d_l g_ij``. The covariant Riemann tensor is
``R[a, b, c, d] = g(R(e_c, e_d) e_b, e_a)`` so that ``R[0, 1, 0, 1]`` is
the sectional curvature of a surface in an orthonormal frame.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DefinitenessError, DimensionError, DomainError

ANALYTIC = "analytic"
FINITE_DIFFERENCE = "finite-difference"

# Residual above which a curvature tensor carries a quality warning.
SYMMETRY_WARN = 1e-6


@dataclass(frozen=True)
class MetricChart:
    """Coordinate box plus metric evaluator.

    ``dmetric`` and ``d2metric`` are the analytic partials; when they are
    missing (or ``derivative_mode`` is finite-difference) derivatives come
    from central differences with one Richardson level.

    ``singular_axes`` lists axes whose two ends are coordinate singularities
    (polar angles). ``excluded_volume(delta)`` is the analytic volume of the
    slabs within ``delta`` of those ends; closed-manifold integration uses it
    to put the excised caps back.
    """

    name: str
    bounds: tuple[tuple[float, float], ...]
    metric: Callable[[np.ndarray], np.ndarray]
    dmetric: Optional[Callable[[np.ndarray], np.ndarray]] = None
    d2metric: Optional[Callable[[np.ndarray], np.ndarray]] = None
    periodic: tuple[bool, ...] = ()
    derivative_mode: str = ANALYTIC
    step: Optional[float] = None
    closed: bool = False
    euler_characteristic: Optional[int] = None
    singular_axes: tuple[int, ...] = ()
    total_volume: Optional[float] = None
    excluded_volume: Optional[Callable[[float], float]] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * len(bounds))
        if len(self.periodic) != len(bounds):
            raise ConfigurationError("periodic flags must match the number of axes")
        if self.derivative_mode not in (ANALYTIC, FINITE_DIFFERENCE):
            raise ConfigurationError(f"unknown derivative mode {self.derivative_mode!r}")
        if self.derivative_mode == ANALYTIC and (self.dmetric is None or self.d2metric is None):
            object.__setattr__(self, "derivative_mode", FINITE_DIFFERENCE)
        if self.step is not None and self.step < 1e-10 * self.box_size:
            raise ConfigurationError(
                f"derivative step {self.step:g} underflows 1e-10 x box size {self.box_size:g}")

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([b - a for a, b in self.bounds])

    @property
    def box_size(self) -> float:
        return float(np.max(self.lengths))

    def with_mode(self, mode: str) -> "MetricChart":
        return replace(self, derivative_mode=mode)

    def wrap(self, p) -> np.ndarray:
        """Validate ``p`` against the box, wrapping periodic axes."""
        p = np.array(p, dtype=float)
        if p.shape != (self.dimension,):
            raise DimensionError(f"point of shape {p.shape} on a {self.dimension}-dim chart")
        for k, ((a, b), per) in enumerate(zip(self.bounds, self.periodic)):
            if per:
                p[k] = a + np.mod(p[k] - a, b - a)
            else:
                slack = 1e-12 * max(1.0, b - a)
                if not (a - slack <= p[k] <= b + slack):
                    raise DomainError(f"coordinate {k} = {p[k]!r} outside [{a}, {b}] on {self.name}")
        return p

    def g(self, p) -> np.ndarray:
        """Metric at ``p`` after validating symmetry and positivity."""
        p = self.wrap(p)
        gm = np.asarray(self.metric(p), dtype=float)
        check_spd(gm, where=f"{self.name} at {p.tolist()}")
        return gm


def check_spd(gm: np.ndarray, where: str = "") -> None:
    scale = max(1.0, float(np.max(np.abs(gm))))
    if np.max(np.abs(gm - gm.T)) > 1e-12 * scale:
        raise DefinitenessError(f"metric not symmetric {where}")
    try:
        np.linalg.cholesky(gm)
    except np.linalg.LinAlgError:
        raise DefinitenessError(f"metric not positive definite {where}") from None


def fd_steps(chart: MetricChart) -> tuple[np.ndarray, np.ndarray]:
    """First- and second-derivative steps per axis.

    First derivatives use ``max(1e-5, 1e-6 * axis length)``. Second
    derivatives use a wider step, ``max(1e-3, 1e-4 * axis length)``: a
    Richardson-extrapolated second difference loses ``eps / h**2`` to
    cancellation, which at 1e-5 would swamp the curvature.
    """
    lengths = chart.lengths
    if chart.step is not None:
        h1 = np.full(chart.dimension, chart.step)
        h2 = np.full(chart.dimension, max(chart.step, 1e-3))
    else:
        h1 = np.maximum(1e-5, 1e-6 * lengths)
        h2 = np.maximum(1e-3, 1e-4 * lengths)
    return h1, h2


@dataclass
class MetricJet:
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    mode: str
    steps: dict


def _fd_first(f, p, h1):
    n = p.shape[0]
    g0 = f(p)
    out = np.zeros((n,) + g0.shape)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h1[k]
        d1 = (f(p + e) - f(p - e)) / (2 * h1[k])
        d2 = (f(p + 2 * e) - f(p - 2 * e)) / (4 * h1[k])
        out[k] = (4 * d1 - d2) / 3
    return out


def _fd_second(f, p, h2):
    n = p.shape[0]
    g0 = f(p)
    out = np.zeros((n, n) + g0.shape)
    for k in range(n):
        ek = np.zeros(n)
        ek[k] = h2[k]
        s1 = (f(p + ek) - 2 * g0 + f(p - ek)) / h2[k] ** 2
        s2 = (f(p + 2 * ek) - 2 * g0 + f(p - 2 * ek)) / (4 * h2[k] ** 2)
        out[k, k] = (4 * s1 - s2) / 3
        for l in range(k + 1, n):
            el = np.zeros(n)
            el[l] = h2[l]

            def mixed(t):
                return (f(p + t * ek + t * el) - f(p + t * ek - t * el)
                        - f(p - t * ek + t * el) + f(p - t * ek - t * el)) / (4 * t * t * h2[k] * h2[l])

            m = (4 * mixed(1.0) - mixed(2.0)) / 3
            out[k, l] = m
            out[l, k] = m
    return out


def metric_jet(chart: MetricChart, p) -> MetricJet:
    """Metric with first and second partials at ``p``."""
    p = chart.wrap(p)
    gm = chart.g(p)
    if chart.derivative_mode == ANALYTIC:
        dg = np.asarray(chart.dmetric(p), dtype=float)
        ddg = np.asarray(chart.d2metric(p), dtype=float)
        steps = {"mode": ANALYTIC}
    else:
        h1, h2 = fd_steps(chart)
        f = lambda x: np.asarray(chart.metric(x), dtype=float)
        dg = _fd_first(f, p, h1)
        ddg = _fd_second(f, p, h2)
        steps = {"mode": FINITE_DIFFERENCE, "first": h1.tolist(), "second": h2.tolist(),
                 "richardson_levels": 1}
    return MetricJet(gm, dg, ddg, chart.derivative_mode, steps)


def _christoffel_from_jet(jet: MetricJet):
    ginv = np.linalg.inv(jet.g)
    dg = jet.dg
    # t[d, b, c] = d_b g_dc + d_c g_db - d_d g_bc
    t = np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg
    gamma = 0.5 * np.einsum("ad,dbc->abc", ginv, t)
    return ginv, t, gamma


def christoffel(chart: MetricChart, p, return_info: bool = False):
    """Christoffel symbols ``gamma[a, b, c]`` = Gamma^a_{bc} at ``p``.

    With ``return_info`` the derivative-step metadata is returned as well.
    """
    jet = metric_jet(chart, p)
    _, _, gamma = _christoffel_from_jet(jet)
    gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    if return_info:
        return gamma, jet.steps
    return gamma


def _riemann_from_jet(jet: MetricJet) -> np.ndarray:
    ginv, t, gamma = _christoffel_from_jet(jet)
    dg, ddg = jet.dg, jet.ddg
    dginv = -np.einsum("af,efh,hd->ead", ginv, dg, ginv)
    # dt[e, d, b, c] = d_e of t[d, b, c]
    dt = np.einsum("ebdc->edbc", ddg) + np.einsum("ecdb->edbc", ddg) - ddg
    dgamma = 0.5 * (np.einsum("ead,dbc->eabc", dginv, t) + np.einsum("ad,edbc->eabc", ginv, dt))
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    r_up = (np.einsum("cadb->abcd", dgamma) - np.einsum("dacb->abcd", dgamma)
            + np.einsum("ace,edb->abcd", gamma, gamma)
            - np.einsum("ade,ecb->abcd", gamma, gamma))
    return np.einsum("ae,ebcd->abcd", jet.g, r_up)


def riemann_covariant(chart: MetricChart, p) -> np.ndarray:
    """Coordinate components R_{abcd} at ``p``."""
    return _riemann_from_jet(metric_jet(chart, p))


def gram_schmidt(gm: np.ndarray) -> np.ndarray:
    """Columns form a ``gm``-orthonormal basis, built in axis order."""
    n = gm.shape[0]
    e = np.zeros((n, n))
    for k in range(n):
        v = np.zeros(n)
        v[k] = 1.0
        for _ in range(2):  # second pass cleans up rounding
            for j in range(k):
                v = v - (e[:, j] @ gm @ v) * e[:, j]
        norm2 = v @ gm @ v
        if not norm2 > 0:
            raise DefinitenessError("metric not positive definite during Gram-Schmidt")
        e[:, k] = v / np.sqrt(norm2)
    return e


def orthonormal_frame(chart: MetricChart, p) -> np.ndarray:
    """Matrix E with ``E.T @ g @ E == I``."""
    return gram_schmidt(chart.g(p))


@dataclass
class CurvatureTensor:
    """Curvature components in an orthonormal frame.

    ``symmetry_residual`` and ``bianchi_residual`` are measured before the
    symmetrization step (relative to the largest component) so numerical
    trouble stays visible after the tensor has been cleaned up.
    """

    components: np.ndarray
    symmetry_residual: float = 0.0
    bianchi_residual: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.components.shape[0]

    def check_symmetries(self, tol: float = 1e-9) -> dict:
        r = self.components
        scale = max(1.0, float(np.max(np.abs(r))))
        res = {
            "antisymmetry": float(max(np.max(np.abs(r + np.swapaxes(r, 0, 1))),
                                      np.max(np.abs(r + np.swapaxes(r, 2, 3))))) / scale,
            "pair": float(np.max(np.abs(r - np.transpose(r, (2, 3, 0, 1))))) / scale,
            "bianchi": float(np.max(np.abs(bianchi_sum(r)))) / scale,
        }
        res["ok"] = all(v <= tol for v in res.values())
        return res


def bianchi_sum(r: np.ndarray) -> np.ndarray:
    """R_ijkl + R_iklj + R_iljk."""
    return r + np.einsum("iklj->ijkl", r) + np.einsum("iljk->ijkl", r)


def symmetrize_curvature(r: np.ndarray) -> np.ndarray:
    """Project onto tensors with the algebraic symmetries of curvature.

    Averages over the order-8 group generated by the two antisymmetries and
    the pair swap, then removes the totally antisymmetric part, which is
    exactly what the first Bianchi identity forbids.
    """
    s = (r - np.einsum("bacd->abcd", r) - np.einsum("abdc->abcd", r) + np.einsum("badc->abcd", r))
    s = 0.25 * s
    s = 0.5 * (s + np.transpose(s, (2, 3, 0, 1)))
    if r.shape[0] >= 4:
        s = s - totally_antisymmetric_part(s)
    return s


def totally_antisymmetric_part(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    for perm in itertools.permutations(range(4)):
        out += _perm_sign(perm) * np.transpose(r, perm)
    return out / 24.0


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def frame_components(r_coord: np.ndarray, frame: np.ndarray) -> np.ndarray:
    return np.einsum("ijkl,ia,jb,kc,ld->abcd", r_coord, frame, frame, frame, frame, optimize=True)


def riemann_orthonormal(chart: MetricChart, p) -> CurvatureTensor:
    """Orthonormal-frame curvature with symmetries enforced.

    A pre-symmetrization residual above 1e-6 is attached as a warning on
    the result rather than raised.
    """
    jet = metric_jet(chart, p)
    frame = gram_schmidt(jet.g)
    raw = frame_components(_riemann_from_jet(jet), frame)
    clean = symmetrize_curvature(raw)
    scale = max(1.0, float(np.max(np.abs(raw))))
    sym_res = float(np.max(np.abs(raw - clean))) / scale
    bianchi_res = float(np.max(np.abs(bianchi_sum(raw)))) / scale
    warnings = []
    if sym_res > SYMMETRY_WARN:
        warnings.append(f"curvature symmetry residual {sym_res:.2e} exceeds {SYMMETRY_WARN:g}")
    return CurvatureTensor(clean, sym_res, bianchi_res, warnings)


def gauss_curvature(chart: MetricChart, p) -> float:
    """Sectional curvature of a surface chart."""
    if chart.dimension != 2:
        raise DimensionError(f"gauss_curvature needs a surface, got dimension {chart.dimension}")
    return float(riemann_orthonormal(chart, p).components[0, 1, 0, 1])


def volume_density(chart: MetricChart, p) -> float:
    return float(np.sqrt(np.linalg.det(chart.g(p))))
