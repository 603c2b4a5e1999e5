import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbmoduli.errors import ConfigurationError, InconsistencyError
from gbmoduli.integrate import QuadratureSpec, monte_carlo, quad_box, quad_region
from gbmoduli.regions import quarter_disk, thin_strip


def test_polynomial_is_exact():
    r = quad_box(lambda x: x[0] ** 2, [(0.0, 1.0)])
    assert abs(r.value - 1 / 3) < 1e-12
    assert r.error < 1e-12
    assert r.converged


def test_sphere_area():
    r = quad_box(lambda p: math.sin(p[0]), [(0.0, math.pi), (0.0, 2 * math.pi)])
    assert abs(r.value - 4 * math.pi) < 1e-9
    assert r.error < 1e-9


def test_modular_domain_area():
    # b from sqrt(1-a^2) to infinity, substituted as b = h / s
    r = quad_box(lambda p: 1.0 / math.sqrt(1 - p[0] ** 2), [(-0.5, 0.5), (0.0, 1.0)])
    assert abs(r.value - math.pi / 3) < 1e-8


def test_deterministic_bit_identical():
    f = lambda p: math.exp(p[0] * p[1]) * math.cos(3 * p[0])
    a = quad_box(f, [(0, 2), (0, 1)])
    b = quad_box(f, [(0, 2), (0, 1)])
    assert a.value == b.value and a.error == b.error and a.n_cells == b.n_cells


def test_depth_exhaustion_is_inconclusive_not_raised():
    spec = QuadratureSpec(max_depth=2, abs_tol=1e-14, rel_tol=1e-14)
    r = quad_box(lambda x: abs(x[0] - 0.3141) ** 0.5, [(0.0, 1.0)], spec)
    assert not r.converged
    assert r.error > 0


@pytest.mark.parametrize("kw", [{"order": 1}, {"abs_tol": 0.0}, {"rel_tol": -1.0}])
def test_spec_validation(kw):
    with pytest.raises(ConfigurationError):
        QuadratureSpec(**kw)


def test_error_estimate_conservative_on_random_polynomials():
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(100):
        deg = int(rng.integers(1, 35))
        c = rng.normal(size=deg + 1)
        a, b = sorted(rng.uniform(-2, 2, 2))
        poly = np.polynomial.Polynomial(c)
        exact = poly.integ()(b) - poly.integ()(a)
        r = quad_box(lambda x: poly(x[0]), [(a, b)])
        hits += abs(r.value - exact) <= r.error
    assert hits >= 95


def test_monte_carlo_reproducible_and_rate():
    f = lambda x: x[:, 0] ** 2
    assert monte_carlo(f, [(0, 1)], 1000, seed=3).value == monte_carlo(f, [(0, 1)], 1000, seed=3).value
    ns = [10**3, 10**4, 10**5, 10**6]
    rms = []
    for n in ns:
        errs = [monte_carlo(f, [(0, 1)], n, seed=s).value - 1 / 3 for s in range(24)]
        rms.append(math.sqrt(np.mean(np.square(errs))))
    slope = np.polyfit(np.log(ns), np.log(rms), 1)[0]
    assert abs(slope + 0.5) < 0.1


def test_quad_region_full_box_equals_quad_box():
    region = thin_strip(1.0)
    f = lambda p: math.exp(-3 * p[0])
    r = quad_region(f, region)
    assert abs(r.value - quad_box(f, region.integration_box()).value) < 1e-12


def test_quad_region_quarter_disk():
    r = quad_region(lambda p: 1.0, quarter_disk(), QuadratureSpec(abs_tol=1e-6, rel_tol=1e-6))
    assert abs(r.value - math.pi / 4) < 1e-4
    assert set(r.details) >= {"box_value", "mc_value"}
    assert r.error >= r.details["box_error"]


def test_quad_region_thin_strip_density():
    u0 = 2.0
    region = thin_strip(u0)
    # density -9/2pi times volume element exp(-3u)
    r = quad_region(lambda p: -9 / (2 * math.pi) * math.exp(-3 * p[0]), region)
    assert abs(r.value - (-(9 / (2 * math.pi)) * (1 - math.exp(-3 * u0)) / 3)) < 1e-8


def test_quad_region_inconsistency_raises():
    class Lying:
        # box quadrature sees the indicator, Monte Carlo sees a different one
        def integration_box(self):
            return ((0.0, 1.0),)

        calls = 0

        def indicator(self, x):
            x = np.asarray(x)
            Lying.calls += 1
            if x.shape[0] == QuadratureSpec().mc_samples:
                return np.zeros(x.shape[:-1], dtype=bool)
            return np.ones(x.shape[:-1], dtype=bool)

    with pytest.raises(InconsistencyError):
        quad_region(lambda p: 1.0, Lying())


@given(st.floats(-3, 3), st.floats(0.1, 3))
def test_linear_functions_exact(a, w):
    r = quad_box(lambda x: 2 * x[0] + 1, [(a, a + w)])
    exact = (a + w) ** 2 + (a + w) - a * a - a
    assert abs(r.value - exact) <= 1e-12 * max(1, abs(exact))
