"""Closed-form spectra and eigenfunctions from the Bessel characteristic equations.

With ``x = mu l^2 / (4 hbar |tau|)`` every eigenvalue is ``+-mu l^2 / (4 hbar r)``
for a positive root ``r`` of one of the characteristic functions below. The
eigenfunctions are built from two blocks in ``y = r q^2 / l^2``::

    E(q) = exp(-iy) (4y)^(3/4) [J_{-3/4}(y) - i J_{1/4}(y)]      (even)
    O(q) = q exp(-iy) (4y)^(1/4) [J_{-1/4}(y) - i J_{3/4}(y)]    (odd)

evaluated through ``x^(-nu) J_nu`` so ``q = 0`` is regular.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .kernel import PhysicalParams
from .nystrom import SpectralEntry, SpectralSet, fix_phase
from .quadrature import GridFunction, QuadratureRule, gauss_legendre, rescale
from .specfun import bessel_j, bessel_j_scaled, find_roots

__all__ = [
    "CASES",
    "cases_for",
    "characteristic_fn",
    "family_roots",
    "eigenvalues",
    "AnalyticEigenfunction",
    "eigenfunction",
    "normalize",
    "parity",
    "time_reverse",
    "analytic_spectrum",
    "symmetry_report",
]

CASES = ("general", "antiperiodic_even", "antiperiodic_odd", "periodic_odd", "periodic_even")
_C34 = 4.0**0.75
_C14 = 4.0**0.25


def cases_for(p: PhysicalParams) -> tuple:
    if p.gamma == 0.0:
        return ("periodic_odd", "periodic_even")
    if p.gamma == math.pi / 2:
        return ("antiperiodic_odd", "antiperiodic_even")
    return ("general",)


def _check_case(case: str, p: PhysicalParams | None):
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    if case == "general":
        if p is None:
            raise ValueError("the general case needs parameters for gamma")
        if math.sin(p.gamma) == 0.0:
            raise ValueError("general case requires sin(gamma) != 0")


def characteristic_fn(case: str, x, p: PhysicalParams | None = None):
    """Characteristic function whose positive roots give ``r``.

    The general-gamma function is the determinant divided by ``1 + cot^2``,
    i.e. ``sin^2 J_{-3/4} J_{-1/4} - cos^2 J_{3/4} J_{1/4}``, which stays
    bounded as gamma approaches 0.
    """
    _check_case(case, p)
    x = np.asarray(x, dtype=float)
    if case == "general":
        s2, c2 = math.sin(p.gamma) ** 2, math.cos(p.gamma) ** 2
        return s2 * bessel_j(-0.75, x) * bessel_j(-0.25, x) - c2 * bessel_j(
            0.75, x
        ) * bessel_j(0.25, x)
    if case == "antiperiodic_even":
        return bessel_j(-0.75, x)
    if case in ("antiperiodic_odd", "periodic_odd"):
        return bessel_j(-0.25, x)
    return bessel_j(-0.75, x) + (2.0 / 3.0) * bessel_j(1.25, x) + bessel_j(0.25, x) / x


def family_roots(case: str, count: int, p: PhysicalParams | None = None) -> np.ndarray:
    """The ``count`` smallest positive roots of one characteristic function."""
    _check_case(case, p)
    if count < 1:
        raise ValueError("count must be >= 1")
    # roots depend on gamma alone, and only in the general case
    gamma = p.gamma if case == "general" else None
    return _roots(case, count, gamma).copy()


@functools.lru_cache(maxsize=256)
def _roots(case: str, count: int, gamma: float | None) -> np.ndarray:
    p = PhysicalParams(gamma=gamma) if gamma is not None else None
    x_max = (count + 2) * math.pi + 5.0
    for _ in range(8):
        roots = find_roots(lambda x: characteristic_fn(case, x, p), x_max).roots
        if len(roots) >= count:
            return roots[:count]
        x_max *= 2.0
    raise RuntimeError(f"could not find {count} roots for case {case!r}")


def eigenvalues(p: PhysicalParams, case: str, count: int) -> list:
    """``(n, r, tau_plus, tau_minus)`` for the first ``count`` roots of ``case``."""
    roots = family_roots(case, count, p)
    ts = p.time_scale
    return [(i + 1, float(r), ts / r, -ts / r) for i, r in enumerate(roots)]


def _even_block(y: np.ndarray) -> np.ndarray:
    return np.exp(-1j * y) * _C34 * (
        bessel_j_scaled(-0.75, y) - 1j * y * bessel_j_scaled(0.25, y)
    )


def _odd_block(q: np.ndarray, y: np.ndarray) -> np.ndarray:
    return q * np.exp(-1j * y) * _C14 * (
        bessel_j_scaled(-0.25, y) - 1j * y * bessel_j_scaled(0.75, y)
    )


@dataclass(frozen=True)
class AnalyticEigenfunction:
    """Unnormalized closed-form eigenfunction; call it on position samples."""

    params: PhysicalParams
    case: str
    n: int
    sign: int
    root: float

    @property
    def tau(self) -> float:
        return self.sign * self.params.time_scale / self.root

    def _plus(self, q: np.ndarray) -> np.ndarray:
        p, r, l = self.params, self.root, self.params.l
        y = r * q * q / (l * l)
        if self.case in ("periodic_odd", "antiperiodic_odd"):
            return _odd_block(q, y)
        if self.case == "antiperiodic_even":
            return _even_block(y).astype(complex)
        if self.case == "periodic_even":
            const = 4.0 * np.exp(-1j * r) * bessel_j(0.25, r) / (4.0 * r) ** 0.25
            return _even_block(y) + const
        cot = math.cos(p.gamma) / math.sin(p.gamma)
        a_even = bessel_j(-0.25, r) - cot * bessel_j(0.75, r)
        a_odd = 2.0 * math.sqrt(r) / l * (bessel_j(-0.75, r) - cot * bessel_j(0.25, r))
        return a_even * _even_block(y) + a_odd * _odd_block(q, y)

    def __call__(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self.sign > 0:
            return self._plus(q)
        if self.case == "general":
            return np.conj(self._plus(-q))
        return np.conj(self._plus(q))


def eigenfunction(p: PhysicalParams, case: str, n: int, sign: int = 1) -> AnalyticEigenfunction:
    """Eigenfunction for the ``n``-th root (1-based) of ``case``.

    For the negative eigenvalue the general case uses time-reversal composed
    with parity; the periodic and antiperiodic families use time reversal.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    r = family_roots(case, n, p)[n - 1]
    return AnalyticEigenfunction(p, case, n, sign, float(r))


def normalize(f, rule: QuadratureRule) -> GridFunction:
    """Sample on ``rule``, scale to unit norm, and fix the global phase."""
    g = GridFunction(rule, f(rule.nodes))
    nrm = g.norm()
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero function")
    return GridFunction(rule, fix_phase(g.values / nrm))


def parity(f):
    return lambda q: f(-np.asarray(q, dtype=float))


def time_reverse(f):
    return lambda q: np.conj(f(q))


def analytic_spectrum(
    p: PhysicalParams, count: int, rule: QuadratureRule | None = None
) -> SpectralSet:
    """The ``count`` largest eigenvalues of each sign, merged over families."""
    pool = []
    for case in cases_for(p):
        for i, r in enumerate(family_roots(case, count, p)):
            pool.append((float(r), case, i + 1))
    pool.sort()
    entries = []
    for sign in (1, -1):
        for rank, (r, case, fam_n) in enumerate(pool[:count]):
            ef = AnalyticEigenfunction(p, case, fam_n, sign, r)
            g = normalize(ef, rule) if rule is not None else None
            entries.append(SpectralEntry(rank + 1, sign, ef.tau, g, root=r, case=case))
    return SpectralSet(p, tuple(entries), "analytic")


def _prob_residual(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2)))


def _kdens_residual(a: tuple, b: tuple, flip: int) -> float:
    """Compare momentum densities ``rho_a(p)`` and ``rho_b(flip * p)`` on shared momenta."""
    (pa, ra), (pb, rb) = a, b
    ka = np.rint(pa * 1e6).astype(np.int64)
    kb = np.rint(flip * pb * 1e6).astype(np.int64)
    common, ia, ib = np.intersect1d(ka, kb, return_indices=True)
    if len(common) == 0:
        raise ValueError("momentum grids do not overlap")
    return float(np.max(np.abs(ra[ia] - rb[ib])))


def symmetry_report(
    p: PhysicalParams, m: int, N: int = 400, K: int = 100
) -> dict:
    """Largest violation of each probability-density symmetry.

    Densities are compared for unit-norm eigenfunctions of the ``m`` largest
    eigenvalues. Each side of every position-space relation is built by an
    independent route (the opposite gamma, or evaluation at ``-q``) so none
    holds by construction. The ``_k`` entries compare momentum densities
    from plane-wave coefficients, keyed by momentum value.
    """
    from .evolution import PlaneWaveBasis, project

    rule = rescale(gauss_legendre(N), p.l)
    q = rule.nodes
    special = p.gamma == 0.0 or p.gamma == math.pi / 2

    def unit(f, x):
        scale = math.sqrt(float(np.dot(rule.weights, np.abs(f(q)) ** 2)))
        return f(x) / scale

    def kdens(params, f):
        basis = PlaneWaveBasis(params, K)
        st = project(GridFunction(rule, unit(f, q)), basis)
        # dimensionless momentum in units of hbar/l
        return basis.momenta * p.l / p.hbar, np.abs(st.coeffs) ** 2

    names = ("prob1", "prob4") if special else ("prob1", "prob2", "prob3")
    res = {k: 0.0 for n in names for k in (n, n + "_k")}

    def bump(key, val):
        res[key] = max(res[key], val)

    for e in analytic_spectrum(p, m).select(1):
        plus = AnalyticEigenfunction(p, e.case, _family_n(p, e), 1, e.root)
        if special:
            minus = AnalyticEigenfunction(p, e.case, plus.n, -1, e.root)
            kp, km = kdens(p, plus), kdens(p, minus)
            bump("prob1", _prob_residual(unit(plus, q), unit(minus, -q)))
            bump("prob4", _prob_residual(unit(plus, q), unit(minus, q)))
            bump("prob1_k", _kdens_residual(km, kp, 1))
            bump("prob4_k", _kdens_residual(km, kp, -1))
            continue
        pm = p.with_gamma(-p.gamma)
        plus_m = AnalyticEigenfunction(pm, "general", plus.n, 1, e.root)
        minus_m = AnalyticEigenfunction(pm, "general", plus.n, -1, e.root)
        # minus for +gamma built independently, as the time reverse of the -gamma solution
        minus = time_reverse(plus_m)
        kp, km = kdens(p, plus), kdens(p, minus)
        kpm, kmm = kdens(pm, plus_m), kdens(pm, minus_m)
        bump("prob1", _prob_residual(unit(plus, q), unit(minus, -q)))
        bump("prob2", _prob_residual(unit(plus_m, q), unit(minus, q)))
        bump("prob3", _prob_residual(unit(plus_m, q), unit(plus, -q)))
        bump("prob3", _prob_residual(unit(minus_m, q), unit(minus, -q)))
        bump("prob1_k", _kdens_residual(km, kp, 1))
        bump("prob2_k", _kdens_residual(kpm, km, -1))
        bump("prob3_k", _kdens_residual(kpm, kp, -1))
        bump("prob3_k", _kdens_residual(kmm, km, -1))
    return res


def _family_n(p: PhysicalParams, e: SpectralEntry) -> int:
    roots = family_roots(e.case, e.n, p)
    return int(np.argmin(np.abs(roots - e.root))) + 1
