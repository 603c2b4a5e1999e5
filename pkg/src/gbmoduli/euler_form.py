"""Gauss-Bonnet-Chern density from orthonormal curvature components.

Two independent routes:

* :func:`gb_density_perm` is the double sum over permutations
  ``mu, nu`` of ``sign(mu) sign(nu) R[mu1 mu2 nu1 nu2] ... R[..]`` with
  prefactor ``1 / ((2 pi)^(n/2) 2^n (n/2)!)``.
* :func:`gb_density_pfaffian` expands the Pfaffian of the curvature
  2-form matrix ``Omega_ab = sum_{c<d} R_abcd e^c ^ e^d`` in the exterior
  algebra and divides by ``(2 pi)^(n/2)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chart import CurvatureTensor, MetricChart, _perm_sign, riemann_orthonormal, totally_antisymmetric_part
from .errors import CapabilityError, NumericalQualityError

PERMUTATION_SUM = "permutation-sum"
PFAFFIAN = "pfaffian"

MAX_PERM_DIM = 6
MAX_PFAFFIAN_DIM = 8


@dataclass
class EulerDensity:
    value: float
    method: str
    cross_check: float | None = None
    warnings: list = field(default_factory=list)

    def __float__(self):
        return float(self.value)


def _components(r) -> np.ndarray:
    return r.components if isinstance(r, CurvatureTensor) else np.asarray(r, dtype=float)


def gb_prefactor(n: int) -> float:
    return 1.0 / ((2 * math.pi) ** (n // 2) * 2 ** n * math.factorial(n // 2))


@lru_cache(maxsize=None)
def _perm_tables(n: int):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    signs = np.array([_perm_sign(p) for p in perms], dtype=float)
    return perms, signs


def gb_density_perm(r) -> EulerDensity:
    """Permutation-sum density; guarded to n <= 6 ((n!)^2 terms)."""
    comp = _components(r)
    n = comp.shape[0]
    if n % 2:
        return EulerDensity(0.0, PERMUTATION_SUM)
    if n > MAX_PERM_DIM:
        raise CapabilityError(
            f"permutation sum is capped at n = {MAX_PERM_DIM} ({math.factorial(n) ** 2} terms at n = {n}); "
            "use gb_density_pfaffian")
    perms, signs = _perm_tables(n)
    prod = np.outer(signs, signs)
    for t in range(n // 2):
        mu1 = perms[:, 2 * t][:, None]
        mu2 = perms[:, 2 * t + 1][:, None]
        nu1 = perms[:, 2 * t][None, :]
        nu2 = perms[:, 2 * t + 1][None, :]
        prod = prod * comp[mu1, mu2, nu1, nu2]
    return EulerDensity(gb_prefactor(n) * math.fsum(prod.ravel()), PERMUTATION_SUM)


def _wedge(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            if set(ka) & set(kb):
                continue
            merged = ka + kb
            out_key = tuple(sorted(merged))
            sign = _perm_sign([out_key.index(i) for i in merged])
            out[out_key] = out.get(out_key, 0.0) + sign * va * vb
    return out


def _pfaffian_forms(omega, idx: tuple) -> dict:
    if not idx:
        return {(): 1.0}
    first, rest = idx[0], idx[1:]
    total: dict = {}
    for j, other in enumerate(rest):
        sub = _pfaffian_forms(omega, rest[:j] + rest[j + 1:])
        term = _wedge(omega[first][other], sub)
        sign = -1.0 if j % 2 else 1.0
        for k, v in term.items():
            total[k] = total.get(k, 0.0) + sign * v
    return total


def gb_density_pfaffian(r) -> EulerDensity:
    """Pfaffian density; the input must be pair-antisymmetric to 1e-6."""
    comp = _components(r)
    n = comp.shape[0]
    if n % 2:
        return EulerDensity(0.0, PFAFFIAN)
    if n > MAX_PFAFFIAN_DIM:
        raise CapabilityError(f"Pfaffian expansion is capped at n = {MAX_PFAFFIAN_DIM}")
    scale = max(1.0, float(np.max(np.abs(comp))))
    resid = max(np.max(np.abs(comp + np.swapaxes(comp, 0, 1))),
                np.max(np.abs(comp + np.swapaxes(comp, 2, 3)))) / scale
    if resid > 1e-6:
        raise NumericalQualityError(f"curvature antisymmetry residual {resid:.2e} exceeds 1e-6")
    omega = [[{(c, d): float(comp[a, b, c, d]) for c in range(n) for d in range(c + 1, n)}
              for b in range(n)] for a in range(n)]
    top = _pfaffian_forms(omega, tuple(range(n)))
    pf = top.get(tuple(range(n)), 0.0)
    return EulerDensity(pf / (2 * math.pi) ** (n // 2), PFAFFIAN)


def gb_density(chart: MetricChart, p) -> EulerDensity:
    """Density of the Gauss-Bonnet-Chern form at ``p``.

    The permutation sum is primary up to n = 4, the Pfaffian from n = 6 on;
    both are evaluated (and the other one kept as ``cross_check``) while
    n <= 6.
    """
    n = chart.dimension
    if n % 2:
        return EulerDensity(0.0, PERMUTATION_SUM)
    curv = riemann_orthonormal(chart, p)
    if n <= 4:
        primary = gb_density_perm(curv)
        primary.cross_check = gb_density_pfaffian(curv).value
    elif n <= MAX_PERM_DIM:
        primary = gb_density_pfaffian(curv)
        primary.cross_check = gb_density_perm(curv).value
    else:
        primary = gb_density_pfaffian(curv)
    primary.warnings.extend(curv.warnings)
    if primary.cross_check is not None:
        gap = abs(primary.value - primary.cross_check)
        if gap > 1e-9 * max(1.0, abs(primary.value)):
            primary.warnings.append(f"density routes disagree by {gap:.2e}")
    return primary


def random_curvature_tensor(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random tensor with every algebraic symmetry of a curvature tensor.

    A random symmetric matrix on the basis of index pairs ``i < j`` gives
    pair antisymmetry and pair symmetry; removing the totally antisymmetric
    part then enforces the first Bianchi identity.
    """
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    m = len(pairs)
    a = rng.normal(scale=scale, size=(m, m))
    s = 0.5 * (a + a.T)
    r = np.zeros((n, n, n, n))
    for p, (i, j) in enumerate(pairs):
        for q, (k, l) in enumerate(pairs):
            v = s[p, q]
            r[i, j, k, l] = v
            r[j, i, k, l] = -v
            r[i, j, l, k] = -v
            r[j, i, l, k] = v
    if n >= 4:
        r = r - totally_antisymmetric_part(r)
    return r


def rotate_frame(r: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Components of the same tensor in the frame rotated by orthogonal ``q``."""
    return np.einsum("ijkl,ia,jb,kc,ld->abcd", r, q, q, q, q, optimize=True)
