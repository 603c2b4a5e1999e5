import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbmoduli.catalog import get_metric, model_thin, s2xs2, sphere
from gbmoduli.chart import FINITE_DIFFERENCE
from gbmoduli.errors import CapabilityError, NumericalQualityError
from gbmoduli.euler_form import (
    gb_density,
    gb_density_perm,
    gb_density_pfaffian,
    random_curvature_tensor,
    rotate_frame,
)


def test_constant_curvature_densities():
    assert gb_density(sphere(), [1.0, 1.0]).value == pytest.approx(1 / (2 * math.pi), rel=1e-12)
    assert gb_density(sphere(2.0), [1.0, 1.0]).value == pytest.approx(1 / (8 * math.pi), rel=1e-12)
    assert gb_density(model_thin(), [1.0, 0.5]).value == pytest.approx(-9 / (2 * math.pi), rel=1e-12)
    assert gb_density(s2xs2(), [1.0, 1.0, 2.0, 2.0]).value == pytest.approx(1 / (4 * math.pi ** 2), rel=1e-10)
    assert gb_density(get_metric("s4"), [1.0, 1.2, 0.8, 0.5]).value == pytest.approx(3 / (4 * math.pi ** 2),
                                                                                    rel=1e-10)


def test_fd_density_on_product():
    d = gb_density(s2xs2(mode=FINITE_DIFFERENCE), [1.0, 1.0, 2.0, 2.0])
    assert d.value == pytest.approx(1 / (4 * math.pi ** 2), rel=1e-7)
    assert d.cross_check == pytest.approx(d.value, rel=1e-9)


def test_odd_dimension_vanishes():
    assert gb_density(sphere(1.0, 3), [1.0, 1.0, 1.0]).value == 0.0
    assert gb_density_perm(np.zeros((3, 3, 3, 3))).value == 0.0


@pytest.mark.parametrize("n", [2, 4, 6])
def test_routes_agree_on_random_tensors(n):
    rng = np.random.default_rng(n)
    for _ in range(5 if n == 6 else 20):
        r = random_curvature_tensor(n, rng)
        a, b = gb_density_perm(r).value, gb_density_pfaffian(r).value
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_density_is_frame_invariant(seed):
    rng = np.random.default_rng(seed)
    r = random_curvature_tensor(4, rng)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    assert gb_density_perm(rotate_frame(r, q)).value == pytest.approx(gb_density_perm(r).value, rel=1e-9,
                                                                     abs=1e-12)


def test_linear_in_surface_curvature():
    r = np.zeros((2, 2, 2, 2))
    r[0, 1, 0, 1] = r[1, 0, 1, 0] = 3.0
    r[0, 1, 1, 0] = r[1, 0, 0, 1] = -3.0
    assert gb_density_perm(r).value == pytest.approx(3 / (2 * math.pi))


def test_guards():
    with pytest.raises(CapabilityError):
        gb_density_perm(np.zeros((8, 8, 8, 8)))
    with pytest.raises(CapabilityError):
        gb_density_pfaffian(np.zeros((10, 10, 10, 10)))
    bad = np.ones((4, 4, 4, 4))
    with pytest.raises(NumericalQualityError):
        gb_density_pfaffian(bad)


def test_pfaffian_eight_dimensional_product():
    # S2 x S2 x S2 x S2: density (1/2pi)^4 as a product of surface densities
    r = np.zeros((8, 8, 8, 8))
    for k in range(4):
        a, b = 2 * k, 2 * k + 1
        r[a, b, a, b] = r[b, a, b, a] = 1.0
        r[a, b, b, a] = r[b, a, a, b] = -1.0
    assert gb_density_pfaffian(r).value == pytest.approx((1 / (2 * math.pi)) ** 4, rel=1e-12)
