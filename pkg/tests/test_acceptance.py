"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line, repeated in
the terminal summary."""
import json
import math
import re
import time
from fractions import Fraction
from math import prod

import numpy as np

from gbmoduli import cli
from gbmoduli.assembly import MATCH, exhaustion_report, gauss_bonnet_2d_region, gauss_bonnet_closed
from gbmoduli.catalog import flat_torus, s2xs2, sphere
from gbmoduli.chart import FINITE_DIFFERENCE
from gbmoduli.chi import bernoulli, chi_closed, chi_punctured, chi_sp, zeta_neg
from gbmoduli.euler_form import gb_density_perm, gb_density_pfaffian, random_curvature_tensor
from gbmoduli.moduli import (
    ModularCurveModel,
    fibre_volume_slope,
    fricke_reduce,
    grad_length_norm,
    level_set_ii,
    random_exact_triple,
    tree_search_min_trace,
)
from gbmoduli.regions import get_polygon

RESULTS: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, line


def test_criterion_1_closed_manifolds():
    t0 = time.perf_counter()
    s2 = gauss_bonnet_closed(sphere())
    t_s2 = time.perf_counter() - t0
    torus = gauss_bonnet_closed(flat_torus())
    t0 = time.perf_counter()
    prod4 = gauss_bonnet_closed(s2xs2(mode=FINITE_DIFFERENCE))
    t_prod = time.perf_counter() - t0
    ok = (abs(s2.total - 2) < 1e-6 and t_s2 < 1.0 and abs(torus.total) < 1e-12
          and abs(prod4.total - 4) < 1e-3 and t_prod < 60.0)
    report(1, ok, f"S2 {s2.total:.12f} ({t_s2:.2f} s), torus {torus.total:.1e}, "
                  f"S2xS2 fd {prod4.total:.9f} ({t_prod:.1f} s)")


def test_criterion_2_density_routes():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        n = 2 if i % 2 == 0 else 4
        r = random_curvature_tensor(n, rng)
        worst = max(worst, abs(gb_density_perm(r).value - gb_density_pfaffian(r).value))
    report(2, worst <= 1e-10, f"max |perm - pfaffian| over 100 tensors = {worst:.2e}")


EXPECTED_BREAKDOWN = {
    "square": (0.0, 0.0, 1.0),
    "spherical-triangle": (0.25, 0.0, 0.75),
    "hyperbolic-pentagon": (-0.25, 0.0, 1.25),
}


def test_criterion_3_polygons():
    parts, ok = [], True
    for name, expected in EXPECTED_BREAKDOWN.items():
        rep = gauss_bonnet_2d_region(get_polygon(name))
        b = rep.extra["breakdown"]
        got = (b["interior"], b["edges"], b["corners"])
        ok &= abs(rep.total - 1) < 1e-6 and all(abs(g - e) < 1e-6 for g, e in zip(got, expected))
        parts.append(f"{name} {got[0]:+.7f}/{got[1]:+.1e}/{got[2]:.7f} = {rep.total:.9f}")
    report(3, ok, "; ".join(parts))


def test_criterion_4_level_sets_and_gradient():
    iis = {u0: level_set_ii(u0).numeric for u0 in (0.0, 1.0, 5.0, 10.0)}
    worst_ii = max(abs(v - 3.0) for v in iis.values())
    pts = np.random.default_rng(4).uniform(0.0, 10.0, (50, 2))
    worst_grad = max(abs(grad_length_norm(u, th) / math.exp(-2 * u) - 2.0) for u, th in pts)
    report(4, worst_ii < 1e-6 and worst_grad < 1e-9,
           f"max |II - 3| = {worst_ii:.1e} at u0 in (0, 1, 5, 10); max |grad l / l - 2| = {worst_grad:.1e}")


def test_criterion_5_fibre_decay():
    eps = [10.0 ** -k for k in range(1, 6)]
    slopes = {m: fibre_volume_slope(eps, m) for m in (1, 2)}
    ok = all(abs(s - 1.5 * m) <= 0.01 for m, s in slopes.items()) and slopes[1] > 1.0
    report(5, ok, f"slopes m=1 {slopes[1]:.6f}, m=2 {slopes[2]:.6f}")


def test_criterion_6_modular_exhaustion():
    cutoffs = [2.0, 5.0, 10.0, 20.0, 50.0]
    rep = exhaustion_report(ModularCurveModel(12), [1 / y for y in cutoffs])
    ok = rep.verdict == MATCH
    worst = 0.0
    for y, row in zip(cutoffs, rep.rows):
        bound = 6 / (math.pi * y)
        ok &= row["gap"] <= 1.1 * bound and row["residual"] >= row["gap"]
        if y >= 10:
            ok &= row["nearest"] == -2
        worst = max(worst, row["gap"] / bound)
    report(6, ok, f"last integral {rep.rows[-1]['integral']:.9f}, max gap / (6/(pi Y)) = {worst:.6f}, "
                  f"residual dominates at every row")


def _denominator(m):
    primes = [p for p in range(2, m + 2) if all(p % q for q in range(2, int(p ** 0.5) + 1))]
    return prod(p for p in primes if m % (p - 1) == 0)


def test_criterion_7_exact_oracles():
    ok = (chi_punctured(2) == Fraction(1, 120) and chi_closed(2) == Fraction(-1, 240)
          and chi_sp(1) == Fraction(-1, 12) and chi_sp(2) == Fraction(-1, 1440))
    ok &= all(zeta_neg(g) == -bernoulli(2 * g) / (2 * g) for g in range(1, 21))
    ok &= all(bernoulli(m).denominator == _denominator(m) for m in range(2, 41, 2))
    report(7, ok, "chi values, zeta(1-2g) for g <= 20, von Staudt-Clausen for 2g <= 40")


def test_criterion_8_descent_vs_tree_search():
    rng = np.random.default_rng(8)
    mismatches, moves = 0, 0
    for _ in range(200):
        t = random_exact_triple(rng)
        red = fricke_reduce(t)
        moves = max(moves, red.moves)
        if min(red.triple.as_tuple()) != tree_search_min_trace(t, depth=12):
            mismatches += 1
    report(8, mismatches == 0, f"200 exact triples, {mismatches} mismatches, deepest descent {moves} moves")


CLI_RUNS = [
    ["verify-closed", "--metric", "sphere"],
    ["verify-closed", "--metric", "flat-torus", "--format", "csv"],
    ["polygon", "--polygon", "hyperbolic-pentagon"],
    ["exhaust", "--model", "modular-curve", "--cutoffs", "2,5,10,20"],
    ["exhaust", "--model", "thin-strip", "--eps", "0.5,0.1"],
    ["exhaust", "--model", "punctured-torus", "--eps", "1.0,0.5,0.1", "--seed", "3"],
    ["chi", "--family", "sp", "--n", "3"],
    ["chi", "--family", "teich", "--g", "2", "--p", "1"],
    ["model-check"],
]

_STAMP = re.compile(r'\n  "timestamp": \{[^}]*\},?')


def test_criterion_9_cli_determinism(tmp_path, capsys):
    cfg = tmp_path / "base.cfg"
    cfg.write_text("seed = 7\n")
    differing = []
    for argv in CLI_RUNS:
        outs = []
        for k in range(2):
            out = tmp_path / f"r{k}.txt"
            code = cli.run([*argv, "--config", str(cfg), "--out", str(out)])
            outs.append((code, _STAMP.sub("", out.read_text())))
        capsys.readouterr()
        if outs[0] != outs[1] or outs[0][0] != 0:
            differing.append(argv[0])
        if "--format" not in argv:
            assert "timestamp" in json.loads(out.read_text())
    report(9, not differing, f"{len(CLI_RUNS)} commands run twice, identical modulo timestamp"
           + (f"; differing: {differing}" if differing else ""))
