"""Gauss-Bonnet bookkeeping: closed manifolds, planar polyhedral regions,
explicit residual bounds, and exhaustion by compact pieces.

Boundary contributions in dimension > 2 are never evaluated; they are
bounded by :func:`residual_bound`, whose constant is

    C(n, psi, ii) = (1 + psi + ii) ** (n - 1)

times the total (multiplicity-weighted) volume of the faces of positive
dimension. Vertex faces carry no volume and are left out.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .chart import MetricChart, volume_density
from .errors import CapabilityError, ConfigurationError, DimensionError, ModelConsistencyError
from .euler_form import gb_density
from .integrate import QuadratureSpec, quad_box, quad_region
from .polyhedra import (
    Region,
    face_volume,
    inner_euler,
    outer_angle_measure,
    pulled_back_volume,
    second_fundamental_form,
)

MATCH = "match"
MISMATCH = "mismatch"
INCONCLUSIVE = "inconclusive"

INTEGER_THRESHOLD = 0.01
INCONCLUSIVE_ERROR = 0.05
POLAR_CAP = 1e-4


@dataclass
class GBReport:
    interior_integral: float
    interior_error: float
    boundary_terms: list
    total: float
    expected_chi: Optional[int]
    verdict: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict(total: float, error: float, expected, threshold: float) -> str:
    if not math.isfinite(total) or error > INCONCLUSIVE_ERROR:
        return INCONCLUSIVE
    nearest = round(total)
    if abs(total - nearest) >= threshold:
        return MISMATCH if expected is not None else INCONCLUSIVE
    if expected is None:
        return INCONCLUSIVE
    return MATCH if nearest == expected else MISMATCH


def _density_times_volume(chart: MetricChart, p) -> float:
    return gb_density(chart, p).value * volume_density(chart, p)


def gauss_bonnet_closed(chart: MetricChart, spec: QuadratureSpec | None = None,
                        threshold: float = INTEGER_THRESHOLD, cap: float = POLAR_CAP) -> GBReport:
    """Integrate the Gauss-Bonnet-Chern density over a closed chart.

    Coordinate-singular axes are cut back by ``cap`` at both ends; the
    excluded caps are accounted for by the mean density on the cuts times the
    analytic excluded volume, which is exact for homogeneous metrics and
    otherwise of order ``cap**2``.
    """
    if not chart.closed:
        raise ConfigurationError(f"{chart.name} is not marked as a closed manifold")
    n = chart.dimension
    if n % 2:
        expected = chart.euler_characteristic
        return GBReport(0.0, 0.0, [], 0.0, expected, _verdict(0.0, 0.0, expected, threshold),
                        {"note": "odd dimension: density vanishes identically"})
    spec = spec or QuadratureSpec()
    bounds = [list(b) for b in chart.bounds]
    for ax in chart.singular_axes:
        bounds[ax][0] += cap
        bounds[ax][1] -= cap
    res = quad_box(lambda p: _density_times_volume(chart, p), [tuple(b) for b in bounds], spec)
    correction = 0.0
    if chart.singular_axes:
        if chart.excluded_volume is None:
            raise CapabilityError(f"{chart.name}: singular axes without an excluded-volume formula")
        mid = np.array([(lo + hi) / 2 for lo, hi in bounds])
        samples = []
        for ax in chart.singular_axes:
            edge = mid.copy()
            edge[ax] = bounds[ax][0]
            samples.append(gb_density(chart, edge).value)
        correction = float(np.mean(samples)) * chart.excluded_volume(cap)
    total = res.value + correction
    expected = chart.euler_characteristic
    return GBReport(
        res.value, res.error, [], total, expected, _verdict(total, res.error, expected, threshold),
        {"cap": cap if chart.singular_axes else 0.0, "cap_correction": correction,
         "converged": res.converged, "n_cells": res.n_cells, "n_evals": res.n_evals,
         "nearest_integer": int(round(total))},
    )


def _interior_2d(region: Region, spec: QuadratureSpec):
    chart = region.chart
    if region.interior_pieces:
        value = err = 0.0
        for param, box in region.interior_pieces:
            def f(t, param=param):
                return gb_density(chart, param(t)).value * pulled_back_volume(chart, param, t)
            r = quad_box(f, box, spec)
            value += r.value
            err += r.error
        return value, err
    r = quad_region(lambda p: _density_times_volume(chart, p), region, spec)
    return r.value, r.error


def gauss_bonnet_2d_region(region: Region, spec: QuadratureSpec | None = None,
                           threshold: float = INTEGER_THRESHOLD) -> GBReport:
    """Planar Gauss-Bonnet for a polygon-like region with listed faces.

    Interior ``(1/2pi) int K dA``, edges ``(1/2pi) int II ds``, corners the
    normalized outer-angle measure; the total is compared with the inner
    Euler characteristic.
    """
    if region.dimension != 2:
        raise DimensionError(f"planar assembly needs a 2-dimensional region, got {region.dimension}")
    if region.constraints and not region.faces:
        raise CapabilityError(f"{region.name}: boundary faces are not listed")
    spec = spec or QuadratureSpec(abs_tol=1e-11, rel_tol=1e-11)
    interior, interior_err = _interior_2d(region, spec)
    terms = []
    edge_spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-11)
    for face in region.faces:
        if face.dimension == 1:
            def f(t, face=face):
                p = face.param(t)
                k = second_fundamental_form(region, face, p).matrix[0, 0]
                return k * pulled_back_volume(region.chart, face.param, t)
            r = quad_box(f, face.param_box, edge_spec)
            value = face.multiplicity * r.value / (2 * math.pi)
            terms.append({"face": face.name, "codim": 1, "kind": "edge", "value": value,
                          "error": face.multiplicity * r.error / (2 * math.pi), "exact": True})
        elif face.dimension == 0:
            cell = outer_angle_measure(region, face.point)
            terms.append({"face": face.name, "codim": 2, "kind": "corner",
                          "value": face.multiplicity * cell.measure, "error": 0.0, "exact": cell.method == "exact"})
    edges = math.fsum(t["value"] for t in terms if t["kind"] == "edge")
    corners = math.fsum(t["value"] for t in terms if t["kind"] == "corner")
    total = interior + edges + corners
    error = interior_err + sum(t["error"] for t in terms)
    try:
        expected = inner_euler(region)
    except Exception:
        expected = None
    return GBReport(interior, interior_err, terms, total, expected, _verdict(total, error, expected, threshold),
                    {"region": region.name, "breakdown": {"interior": interior, "edges": edges, "corners": corners},
                     "error": error})


def residual_constant(n: int, psi_bound: float, ii_bound: float) -> float:
    """The constant ``C = (1 + psi + ii)^(n-1)`` used by :func:`residual_bound`."""
    if psi_bound < 0 or ii_bound < 0:
        raise ConfigurationError("bounds must be nonnegative")
    return (1.0 + psi_bound + ii_bound) ** max(n - 1, 0)


def residual_bound(region: Region, psi_bound: float, ii_bound: float,
                   spec: QuadratureSpec | None = None) -> float:
    """Explicit bound on the boundary contribution of ``region``."""
    c = residual_constant(region.dimension, psi_bound, ii_bound)
    vol = math.fsum(face.multiplicity * face_volume(region, face, spec)
                    for face in region.faces if face.dimension >= 1)
    return c * vol


@dataclass
class ExhaustionReport:
    rows: list
    verdict: str
    target: Optional[int]
    model: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _check_eps(eps_list: Sequence[float]) -> None:
    if not eps_list:
        raise ConfigurationError("empty epsilon list")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigurationError("epsilon list must be strictly decreasing")


def check_nesting(model, eps_list: Sequence[float], n_samples: int = 4000, seed: int = 0) -> int:
    """Sampled check that the thick parts grow as epsilon decreases.

    Returns the number of sample points; raises ModelConsistencyError on a
    point that lies in a larger-epsilon piece but not in a smaller one.
    """
    _check_eps(eps_list)
    rng = np.random.default_rng(seed)
    pts = model.sample(n_samples, rng, min(eps_list))
    prev = None
    for eps in eps_list:
        inside = np.asarray(model.contains(pts, eps), dtype=bool)
        if prev is not None and np.any(prev & ~inside):
            bad = int(np.flatnonzero(prev & ~inside)[0])
            raise ModelConsistencyError(
                f"{model.name}: sample {np.asarray(pts)[bad].tolist()} leaves the thick part as epsilon "
                f"decreases to {eps}")
        prev = inside
    return len(pts)


def exhaustion_report(model, eps_list: Sequence[float], spec: QuadratureSpec | None = None,
                      n_samples: int = 4000, seed: int = 0) -> ExhaustionReport:
    """Integrate the density over a decreasing-epsilon family of thick parts.

    The rows record the integral, its error, the residual bound and the
    distance to the integer the sequence settles on (nearest integer of the
    last row). The verdict is a match when the two smallest epsilons round
    to the same integer and the last gap is covered by residual + error.
    """
    eps_list = [float(e) for e in eps_list]
    _check_eps(eps_list)
    n_checked = check_nesting(model, eps_list, n_samples, seed)
    rows = []
    for eps in eps_list:
        value, error = model.thick_integral(eps, spec)
        row = {"eps": eps, **model.row_labels(eps), "integral": value, "error": error,
               "residual": model.residual(eps), "nearest": int(round(value))}
        analytic = model.analytic(eps)
        if analytic is not None:
            row["analytic"] = analytic
        rows.append(row)
    target = rows[-1]["nearest"]
    for row in rows:
        row["gap"] = abs(row["integral"] - target)
    last = rows[-1]
    stable = len(rows) == 1 or rows[-2]["nearest"] == target
    verdict = MATCH if stable and last["gap"] <= last["residual"] + last["error"] else INCONCLUSIVE
    expected = model.expected_chi
    if verdict == MATCH and expected is not None and target != expected:
        verdict = MISMATCH
    return ExhaustionReport(rows, verdict, target, model.name,
                            {"nesting_samples": n_checked, "expected_chi": expected,
                             "residual_constant": model.residual_note})
