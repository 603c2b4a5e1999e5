import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbmoduli.assembly import check_nesting
from gbmoduli.errors import CapabilityError, ConfigurationError, DomainError
from gbmoduli.moduli import (
    FrickeTriple,
    PuncturedTorusModel,
    ThinCoords,
    chi_from_area,
    fibre_volume_slope,
    fn_to_fricke,
    fricke_reduce,
    get_model,
    grad_length_norm,
    level_set_ii,
    min_trace,
    modular_thick_area,
    outer_cone,
    random_exact_triple,
    systole,
    thick_membership,
    thin_fibre_volume,
    thin_model_metric,
    trace_to_length,
    tree_search_min_trace,
)

SYS_333 = 2 * math.acosh(1.5)


def test_reduction_examples():
    assert fricke_reduce(FrickeTriple(3, 3, 3)).moves == 0
    r = fricke_reduce(FrickeTriple(3, 3, 6))
    assert r.triple.as_tuple() == (3, 3, 3) and r.moves == 1
    r = fricke_reduce(FrickeTriple(3, 6, 15))
    assert r.triple.as_tuple() == (3, 3, 3) and r.moves == 2


def test_systole_examples():
    assert systole(FrickeTriple(3.0, 3.0, 3.0)) == pytest.approx(1.92485, abs=1e-5)
    assert systole(FrickeTriple(3.0, 3.0, 6.0)) == pytest.approx(SYS_333, abs=1e-12)
    assert trace_to_length(10) == pytest.approx(2 * math.acosh(5), abs=1e-12)
    # reduced triples never have smallest trace above 3, so the trace-10 case
    # is exercised through the length formula only
    rng = np.random.default_rng(5)
    for _ in range(200):
        t = fn_to_fricke(rng.uniform(0.05, 8.0), rng.uniform(-5, 5))
        assert min_trace(t) <= 3.0 + 1e-9
    assert 2 * math.acosh(5) == pytest.approx(4.58486, abs=1e-5)


def test_triple_validation():
    with pytest.raises(DomainError):
        FrickeTriple(3.0, 3.0, 4.0)
    with pytest.raises(DomainError):
        FrickeTriple(Fraction(3), Fraction(3), Fraction(4))
    with pytest.raises(DomainError):
        FrickeTriple(2.0, 2.0, 2.0)


def test_thick_membership():
    t = FrickeTriple(3.0, 3.0, 3.0)
    assert thick_membership(t, 1.0) and not thick_membership(t, 2.0)
    with pytest.raises(DomainError):
        thick_membership(t, 0.0)


@given(st.floats(0.05, 6.0), st.floats(-4.0, 4.0), st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_membership_monotone_and_fn_relation(length, twist, e1, e2):
    t = fn_to_fricke(length, twist)
    lo, hi = sorted((e1, e2))
    if thick_membership(t, hi):
        assert thick_membership(t, lo)


@given(st.floats(0.05, 1.0), st.floats(-3.0, 3.0))
def test_fn_systole_short_curve(length, twist):
    # for l <= 1 the collar lemma makes the chosen curve the shortest
    assert systole(fn_to_fricke(length, twist)) == pytest.approx(length, rel=1e-9)


@given(st.floats(0.05, 4.0), st.floats(-3.0, 3.0))
def test_dehn_twist_invariance(length, twist):
    assert systole(fn_to_fricke(length, twist - length / 2)) == pytest.approx(
        systole(fn_to_fricke(length, twist)), rel=1e-9)


def test_moves_preserve_relation_and_permutation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(200):
        t = random_exact_triple(rng)
        cur = t
        for i in rng.integers(0, 3, 6):
            cur = cur.move(int(i))  # construction re-validates exactly
        base = min(fricke_reduce(t).triple.as_tuple())
        assert min(fricke_reduce(cur).triple.as_tuple()) == base
        for perm in itertools.permutations(t.as_tuple()):
            assert min(fricke_reduce(FrickeTriple(*perm)).triple.as_tuple()) == base
        red = fricke_reduce(t).triple
        assert fricke_reduce(red).moves == 0


def test_float_triple_moves_keep_relation():
    t = fn_to_fricke(0.7, 0.4)
    for i in [0, 1, 2, 0, 1, 2]:
        t = t.move(i)
        x, y, z = t.as_tuple()
        assert abs(x * x + y * y + z * z - x * y * z) <= 1e-9 * max(1.0, x * y * z)


def test_tree_search_oracle_small():
    assert tree_search_min_trace(FrickeTriple(3, 6, 15), 4) == 3


def test_thin_model_metric():
    assert np.array_equal(thin_model_metric(0.0), np.eye(2))
    assert thin_model_metric(1.0)[1, 1] == pytest.approx(math.exp(-6))
    with pytest.raises(DomainError):
        thin_model_metric(-1.0)


def test_grad_length():
    assert grad_length_norm(0.0) == pytest.approx(2.0, rel=1e-10)
    assert grad_length_norm(1.0, 0.7) == pytest.approx(2 * math.exp(-2), rel=1e-10)


@pytest.mark.parametrize("u0", [0.0, 5.0])
def test_level_set_ii(u0):
    ii = level_set_ii(u0)
    assert ii.closed_form == 3.0
    assert abs(ii.numeric - 3.0) < 1e-6


def test_fibre_volumes():
    assert thin_fibre_volume(1e-2, 1).value == pytest.approx(1e-3, rel=1e-10)
    assert thin_fibre_volume(1e-2, 2).value == pytest.approx(1e-6, rel=1e-10)
    v = thin_fibre_volume(1e-2, 3)
    assert (v.exponent, v.proof_exponent) == (4.5, 9.0)
    assert abs(fibre_volume_slope([10.0 ** -k for k in range(1, 6)], 1) - 1.5) < 0.01
    with pytest.raises(DomainError):
        thin_fibre_volume(1.5)


def test_thin_coords_and_cone():
    c = ThinCoords.from_fn(math.exp(-2), 0.25)
    assert c.u == pytest.approx(1.0)
    assert c.theta == pytest.approx(0.25 / (math.exp(-2) / 2) % 1.0)
    cone = outer_cone(ThinCoords(1.0, 0.3), math.exp(-2))
    assert cone.apex_u == pytest.approx(1.0)
    assert cone.contains(ThinCoords(2.0, 0.3)) and not cone.contains(ThinCoords(0.5, 0.3))
    assert not cone.contains(ThinCoords(2.0, 0.4))
    assert cone.retract(ThinCoords(1.0, 0.3)) == ThinCoords(1.0, 0.3)
    assert cone.retract(ThinCoords(4.0, 0.3)).u == pytest.approx(1.0)
    with pytest.raises(DomainError):
        outer_cone(ThinCoords(2.0, 0.3), math.exp(-2))
    with pytest.raises(DomainError):
        ThinCoords(0.0, 1.0)


def test_modular_area():
    assert modular_thick_area(math.inf, 1).area == pytest.approx(math.pi / 3, abs=1e-10)
    r = modular_thick_area(10.0, 1)
    assert r.area == pytest.approx(math.pi / 3 - 0.1, abs=1e-8)
    assert r.tail == pytest.approx(0.1)
    assert modular_thick_area(10.0, 12).area == pytest.approx(12 * (math.pi / 3 - 0.1), abs=1e-8)
    with pytest.raises(DomainError):
        modular_thick_area(0.5)


def test_chi_from_area():
    assert chi_from_area(math.pi / 3) == pytest.approx(-1 / 6)
    assert chi_from_area(4 * math.pi) == pytest.approx(-2)
    assert chi_from_area(0.0) == 0.0


def test_model_registry():
    assert get_model("modular-curve", index=12).expected_chi == -2
    assert get_model("modular-curve", index=1).expected_chi is None
    with pytest.raises(ConfigurationError):
        get_model("genus-five")
    with pytest.raises(CapabilityError):
        PuncturedTorusModel().thick_integral(0.1)


def test_punctured_torus_thick_parts_nested():
    assert check_nesting(PuncturedTorusModel(), [1.5, 1.0, 0.5, 0.1], n_samples=1000) == 1000
