import math

import numpy as np
import pytest

from gbmoduli.assembly import (
    INCONCLUSIVE,
    MATCH,
    MISMATCH,
    _verdict,
    exhaustion_report,
    gauss_bonnet_2d_region,
    gauss_bonnet_closed,
    residual_bound,
    residual_constant,
)
from gbmoduli.catalog import flat_torus, get_metric, round_s4, scaled, sphere
from gbmoduli.errors import ConfigurationError, DimensionError, ModelConsistencyError
from gbmoduli.integrate import QuadratureSpec
from gbmoduli.moduli import ClosedModel, ModularCurveModel, ThinStripModel
from gbmoduli.regions import hemisphere, thin_strip, unit_square


def test_sphere_closed():
    rep = gauss_bonnet_closed(sphere())
    assert abs(rep.total - 2) < 1e-6
    assert rep.verdict == MATCH
    assert rep.expected_chi == 2


def test_flat_torus_exact_zero():
    rep = gauss_bonnet_closed(flat_torus())
    assert rep.total == 0.0 and rep.verdict == MATCH


def test_scaled_sphere_is_scale_invariant():
    assert gauss_bonnet_closed(scaled(sphere(), 2.5)).total == pytest.approx(2.0, abs=1e-6)


def test_round_s4():
    rep = gauss_bonnet_closed(round_s4())
    assert abs(rep.total - 2) < 1e-3 and rep.verdict == MATCH


def test_coarser_quadrature_has_larger_gap():
    fine = gauss_bonnet_closed(sphere(), QuadratureSpec(order=8, abs_tol=1e-10))
    coarse = gauss_bonnet_closed(sphere(), QuadratureSpec(order=3, abs_tol=1.0, rel_tol=1.0))
    assert abs(fine.total - 2) < abs(coarse.total - 2)


def test_open_chart_rejected():
    with pytest.raises(ConfigurationError):
        gauss_bonnet_closed(get_metric("half-plane"))


def test_verdict_rules():
    assert _verdict(2.001, 1e-4, 2, 0.01) == MATCH
    assert _verdict(3.0, 1e-4, 2, 0.01) == MISMATCH
    assert _verdict(2.3, 1e-4, 2, 0.01) == MISMATCH
    assert _verdict(2.0, 0.1, 2, 0.01) == INCONCLUSIVE
    assert _verdict(2.0, 1e-6, None, 0.01) == INCONCLUSIVE


@pytest.mark.parametrize("name, interior", [("square", 0.0), ("spherical-triangle", 0.25),
                                            ("hyperbolic-pentagon", -0.25)])
def test_polygons_close(name, interior):
    from gbmoduli.regions import get_polygon
    rep = gauss_bonnet_2d_region(get_polygon(name))
    b = rep.extra["breakdown"]
    assert abs(rep.total - 1) < 1e-6
    assert b["interior"] == pytest.approx(interior, abs=1e-6)
    assert abs(b["edges"]) < 1e-6
    assert b["corners"] == pytest.approx(1.0 - interior, abs=1e-6)
    assert rep.verdict == MATCH
    assert rep.total == pytest.approx(rep.interior_integral + sum(t["value"] for t in rep.boundary_terms),
                                      abs=1e-14)


def test_annulus_and_hemisphere():
    rep = gauss_bonnet_2d_region(thin_strip(2.0))
    assert abs(rep.total) < 1e-6 and rep.expected_chi == 0
    rep = gauss_bonnet_2d_region(hemisphere())
    assert abs(rep.total - 1) < 1e-6


def test_region_dimension_guard():
    from gbmoduli.polyhedra import Region
    with pytest.raises(DimensionError):
        gauss_bonnet_2d_region(Region(get_metric("s4"), []))


def test_residual_bound():
    assert residual_constant(2, 1.0, 1.0) == 3.0
    assert residual_bound(unit_square(), 1.0, 1.0) == pytest.approx(3.0 * 4, rel=1e-12)
    from gbmoduli.polyhedra import Region
    assert residual_bound(Region(sphere(), []), 1.0, 1.0) == 0.0
    strip = thin_strip(-math.log(math.sqrt(1e-2)), u_inner=0.0)
    outer_only = [f for f in strip.faces if f.name == "outer"]
    strip.faces = outer_only
    c = residual_constant(2, 1.0, 1.0)
    assert residual_bound(strip, 1.0, 1.0) == pytest.approx(c * 1e-3, rel=1e-9)


def test_exhaustion_modular():
    rep = exhaustion_report(ModularCurveModel(12), [0.5, 0.2, 0.1, 0.05])
    assert rep.verdict == MATCH and rep.target == -2
    gaps = [r["gap"] for r in rep.rows]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    for r in rep.rows:
        assert r["gap"] <= r["residual"]
        assert r["integral"] == pytest.approx(r["analytic"], abs=1e-9)


def test_exhaustion_thin_strip_matches_antiderivative():
    rep = exhaustion_report(ThinStripModel(), [0.5, 0.01])
    for r in rep.rows:
        assert r["integral"] == pytest.approx(r["analytic"], abs=1e-8)


def test_exhaustion_closed_rows_constant():
    rep = exhaustion_report(ClosedModel("flat-torus"), [0.5, 0.1, 0.01])
    assert {r["integral"] for r in rep.rows} == {0.0}
    assert all(r["gap"] == 0 for r in rep.rows)
    assert rep.verdict == MATCH


def test_exhaustion_rejects_bad_input():
    with pytest.raises(ConfigurationError):
        exhaustion_report(ModularCurveModel(), [0.1, 0.2])

    class Shrinking(ModularCurveModel):
        def contains(self, pts, eps):
            return np.asarray(pts)[:, 1] <= eps * 10

    with pytest.raises(ModelConsistencyError):
        exhaustion_report(Shrinking(), [0.5, 0.1])
