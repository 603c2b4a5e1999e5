"""Command-line front end.

Every subcommand builds a JSON report ``{command, config_echo, rows,
verdict, versions, timestamp}``; ``timestamp`` is the only field that
changes between identical runs. ``--format csv`` writes the rows only.

Exit codes: 0 match/success, 1 usage error, 2 mismatch, 3 inconclusive,
4 model inconsistency.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import platform
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .assembly import (
    INCONCLUSIVE,
    MATCH,
    MISMATCH,
    check_nesting,
    exhaustion_report,
    gauss_bonnet_2d_region,
    gauss_bonnet_closed,
)
from .catalog import get_metric, model_thin
from .chart import ANALYTIC, gauss_curvature
from .chi import chi_closed, chi_finite_cover, chi_punctured, chi_sp, format_rational, teich_dim, zeta_neg
from .errors import CapabilityError, ConfigurationError, DomainError, GBError, ModelConsistencyError, RangeError
from .integrate import QuadratureSpec
from .moduli import PuncturedTorusModel, fibre_volume_slope, get_model, grad_length_norm, level_set_ii
from .regions import get_polygon

EXIT = {MATCH: 0, "success": 0, MISMATCH: 2, INCONCLUSIVE: 3}
EXIT_USAGE, EXIT_MODEL = 1, 4

DEFAULT_EPS = {"modular-curve": "0.5,0.2,0.1,0.05"}  # cutoffs 2, 5, 10, 20
FALLBACK_EPS = "0.5,0.1,0.01"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; command-line flags win")
    p.add_argument("--order", type=int, help="Gauss-Legendre order per axis")
    p.add_argument("--tol", type=float, help="absolute quadrature tolerance")
    p.add_argument("--seed", type=int, help="seed for sampling steps")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    p.add_argument("--out", help="write the report here and print a one-line summary")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gbmoduli", description="Gauss-Bonnet checks and moduli-space models.")
    parser.add_argument("--version", action="version", version=f"gbmoduli {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("verify-closed", help="integrate the density over a closed manifold")
    p.add_argument("--metric", help="catalog metric (default sphere)")
    p.add_argument("--radius", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--mode", choices=("analytic", "finite-difference"))
    _common(p)

    p = sub.add_parser("polygon", help="planar Gauss-Bonnet on a builtin polygon")
    p.add_argument("--polygon", help="square, spherical-triangle or hyperbolic-pentagon")
    _common(p)

    p = sub.add_parser("exhaust", help="exhaustion table on a moduli model")
    p.add_argument("--model", help="modular-curve, thin-strip, closed or punctured-torus")
    p.add_argument("--metric", help="metric for the closed model")
    p.add_argument("--index", type=int, help="covering index for the modular-curve model")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps", help="comma list, strictly decreasing")
    g.add_argument("--cutoffs", help="comma list of horocycle heights (modular-curve), increasing")
    _common(p)

    p = sub.add_parser("chi", help="exact Euler characteristics")
    p.add_argument("--family", help="punctured, closed, sp, zeta, cover or teich")
    p.add_argument("--g", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--index", type=int)
    p.add_argument("--chi-orb", dest="chi_orb", help="rational such as -1/6 (family cover)")
    _common(p)

    p = sub.add_parser("model-check", help="invariants of the thin-part model metric")
    _common(p)
    return parser


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_TYPES = {"order": int, "seed": int, "index": int, "g": int, "n": int, "p": int, "dim": int,
          "tol": float, "radius": float}


def merged_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < flags."""
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    cfg = read_config(args.config) if args.config else {}
    known = set(vars(args))
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in cfg.items():
        if key in _TYPES:
            try:
                cfg[key] = _TYPES[key](value)
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {value!r}") from None
    conf = {"format": "json", "seed": 0}
    conf.update(cfg)
    conf.update(flags)
    return conf


def _spec(conf: dict) -> QuadratureSpec | None:
    if conf.get("order") is None and conf.get("tol") is None:
        return None
    return QuadratureSpec(order=conf.get("order"), abs_tol=conf.get("tol"), seed=int(conf.get("seed", 0)))


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# ------------------------------------------------------------------ commands


def cmd_verify_closed(conf: dict):
    name = conf.get("metric", "sphere")
    params = {"mode": conf.get("mode", ANALYTIC)}
    if "radius" in conf:
        params["radius"] = conf["radius"]
    if "dim" in conf:
        params["dim"] = conf["dim"]
    chart = get_metric(name, **params)
    rep = gauss_bonnet_closed(chart, _spec(conf))
    row = {"metric": chart.name, "mode": chart.derivative_mode, "interior": rep.interior_integral,
           "error": rep.interior_error, "cap_correction": rep.extra.get("cap_correction", 0.0),
           "total": rep.total, "nearest": int(round(rep.total)), "expected_chi": rep.expected_chi}
    return [row], rep.verdict, f"{name}: total {rep.total:.9f}, expected {rep.expected_chi}, {rep.verdict}"


def cmd_polygon(conf: dict):
    region = get_polygon(conf.get("polygon", "square"))
    rep = gauss_bonnet_2d_region(region, _spec(conf))
    b = rep.extra["breakdown"]
    rows = [{"term": "interior", "value": b["interior"]}, {"term": "edges", "value": b["edges"]},
            {"term": "corners", "value": b["corners"]}, {"term": "total", "value": rep.total},
            {"term": "expected", "value": rep.expected_chi}]
    rows += [{"term": t["kind"], "face": t["face"], "value": t["value"]} for t in rep.boundary_terms]
    return rows, rep.verdict, (f"{region.name}: {b['interior']:.9f} + {b['edges']:.9f} + {b['corners']:.9f} "
                               f"= {rep.total:.9f}, {rep.verdict}")


def cmd_exhaust(conf: dict):
    name = conf.get("model", "modular-curve")
    params = {}
    if name == "modular-curve" and "index" in conf:
        params["index"] = conf["index"]
    if name == "closed" and "metric" in conf:
        params["metric"] = conf["metric"]
    model = get_model(name, **params)
    if "cutoffs" in conf:
        if name != "modular-curve":
            raise UsageError("--cutoffs applies to the modular-curve model; use --eps")
        cutoffs = _float_list(conf["cutoffs"])
        if any(c <= 0 for c in cutoffs):
            raise UsageError("cutoffs must be positive")
        eps = [1.0 / c for c in cutoffs]
    else:
        eps = _float_list(conf.get("eps", DEFAULT_EPS.get(name, FALLBACK_EPS)))
    seed = int(conf.get("seed", 0))
    if isinstance(model, PuncturedTorusModel):
        n = check_nesting(model, eps, seed=seed)
        rows = [{"eps": e, "thick_fraction": float(np.mean(model.contains(
            model.sample(n, np.random.default_rng(seed), min(eps)), e)))} for e in eps]
        return rows, "success", f"punctured-torus: nesting verified on {n} samples (integrals need a metric)"
    rep = exhaustion_report(model, eps, _spec(conf), seed=seed)
    last = rep.rows[-1]
    return rep.rows, rep.verdict, (f"{name}: last integral {last['integral']:.9f} -> {rep.target}, "
                                   f"gap {last['gap']:.3e} <= residual {last['residual']:.3e}: {rep.verdict}")


def _need(conf, key):
    if key not in conf:
        raise UsageError(f"--{key.replace('_', '-')} is required for this family")
    return conf[key]


def cmd_chi(conf: dict):
    family = conf.get("family", "punctured")
    if family == "punctured":
        g = _need(conf, "g")
        value, label = chi_punctured(g), f"chi(Mod(S_{g},1))"
    elif family == "closed":
        g = _need(conf, "g")
        value, label = chi_closed(g), f"chi(Mod(S_{g}))"
    elif family == "sp":
        n = _need(conf, "n")
        value, label = chi_sp(n), f"chi(Sp({2 * n},Z))"
    elif family == "zeta":
        g = _need(conf, "g")
        value, label = zeta_neg(g), f"zeta({1 - 2 * g})"
    elif family == "cover":
        try:
            orb = Fraction(str(_need(conf, "chi_orb")))
        except ValueError:
            raise UsageError("--chi-orb must be a rational such as -1/6") from None
        index = _need(conf, "index")
        value, label = chi_finite_cover(orb, index), f"{index} * {format_rational(orb)}"
    elif family == "teich":
        dims = teich_dim(_need(conf, "g"), _need(conf, "p"))
        row = {"family": family, "d": dims.d, "dim_T": dims.dim_T, "dim_C": dims.dim_C}
        return [row], "success", f"d = {dims.d}, dim T = {dims.dim_T}, dim C = {dims.dim_C}"
    else:
        raise UsageError(f"unknown family {family!r}")
    text = format_rational(value)
    return [{"family": family, "quantity": label, "value": text}], "success", text


def cmd_model_check(conf: dict):
    seed = int(conf.get("seed", 0))
    rng = np.random.default_rng(seed)
    rows = []
    for u0 in (0.0, 1.0, 5.0, 10.0):
        ii = level_set_ii(u0)
        rows.append({"check": "level-set II", "u0": u0, "value": ii.numeric, "expected": 3.0,
                     "ok": abs(ii.numeric - 3.0) < 1e-6})
    us = rng.uniform(0.0, 10.0, 50)
    worst = max(abs(grad_length_norm(u) / math.exp(-2 * u) - 2.0) for u in us)
    rows.append({"check": "|grad l| / l", "samples": 50, "value": 2.0 + worst, "expected": 2.0, "ok": worst < 1e-9})
    chart = model_thin()
    ks = [gauss_curvature(chart, np.array([u, 0.5])) for u in us[:10]]
    worst_k = max(abs(k + 9.0) for k in ks)
    rows.append({"check": "Gauss curvature", "samples": 10, "value": -9.0 + worst_k, "expected": -9.0,
                 "ok": worst_k < 1e-8})
    eps = [10.0 ** -k for k in range(1, 6)]
    for m in (1, 2):
        slope = fibre_volume_slope(eps, m)
        rows.append({"check": "fibre volume slope", "m": m, "value": slope, "expected": 1.5 * m,
                     "proof_exponent": 3.0 * m, "ok": abs(slope - 1.5 * m) <= 0.01})
    n = check_nesting(PuncturedTorusModel(), [1.5, 1.0, 0.5, 0.1], seed=seed)
    rows.append({"check": "thick parts nested", "samples": n, "ok": True})
    ok = all(r["ok"] for r in rows)
    verdict = MATCH if ok else MISMATCH
    return rows, verdict, f"model-check: {sum(r['ok'] for r in rows)}/{len(rows)} invariants hold"


COMMANDS = {
    "verify-closed": cmd_verify_closed,
    "polygon": cmd_polygon,
    "exhaust": cmd_exhaust,
    "chi": cmd_chi,
    "model-check": cmd_model_check,
}


def versions() -> dict:
    return {"gbmoduli": __version__, "numpy": np.__version__, "python": platform.python_version()}


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        rows = report["rows"]
        keys: list[str] = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in keys})
        return buf.getvalue()
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        conf = merged_config(args)
        rows, verdict, summary = COMMANDS[args.command](conf)
    except (UsageError, ConfigurationError, RangeError, DomainError, CapabilityError) as exc:
        print(f"gbmoduli {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelConsistencyError as exc:
        print(f"gbmoduli {args.command}: model inconsistency: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except GBError as exc:
        print(f"gbmoduli {args.command}: inconclusive: {exc}", file=sys.stderr)
        return EXIT[INCONCLUSIVE]
    report = {
        "command": args.command,
        "config_echo": _clean({k: v for k, v in sorted(conf.items()) if k not in ("out", "format")}),
        "rows": _clean(rows),
        "verdict": verdict,
        "versions": versions(),
        "timestamp": {"utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                      "runtime_ms": round(1000 * (time.perf_counter() - started), 3)},
    }
    text = render(report, conf["format"])
    if conf.get("out"):
        with open(conf["out"], "w", encoding="utf-8") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
    return EXIT[verdict]


def main(argv=None) -> None:
    sys.exit(run(argv))
