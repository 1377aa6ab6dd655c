"""Fractional-order Bessel functions of the first kind and a bracketing root finder.

``J_nu`` is evaluated from the ascending series below ``SERIES_CROSSOVER`` and
from the Hankel large-argument expansion above it. The series runs in
extended precision with Neumaier-compensated summation; the alternating terms
grow like ``exp(x)/sqrt(x)`` before cancelling, which is what limits how far
the series can be pushed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SERIES_CROSSOVER",
    "RootFindingError",
    "RootList",
    "bessel_j",
    "bessel_j_scaled",
    "find_roots",
]

SERIES_CROSSOVER = 15.0

_LD = np.longdouble
_LD_EPS = float(np.finfo(np.longdouble).eps)
_MAX_SERIES_TERMS = 200
_MAX_ASYMPTOTIC_TERMS = 80


class RootFindingError(ArithmeticError):
    pass


def _check_order(nu: float):
    if nu + 1.0 <= 0 and float(nu + 1.0).is_integer():
        raise ValueError(f"order {nu} gives a Gamma pole in the series")


def _series_scaled(nu: float, x: np.ndarray) -> np.ndarray:
    """x^(-nu) J_nu(x) from the ascending series (entire in x)."""
    x = x.astype(_LD)
    z = -(x * x) / _LD(4)
    term = np.full_like(x, _LD(1) / (_LD(2) ** _LD(nu) * _LD(math.gamma(nu + 1.0))))
    total = term.copy()
    comp = np.zeros_like(x)
    for k in range(1, _MAX_SERIES_TERMS):
        term = term * z / (_LD(k) * (_LD(k) + _LD(nu)))
        t = total + term
        # Neumaier: recover the low-order bits lost in t
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        if k > 2 and np.all(np.abs(term) <= _LD_EPS * np.abs(total + comp)):
            break
    return (total + comp).astype(float)


def _hankel_pq(nu: float, x: np.ndarray):
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    a = 1.0
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _MAX_ASYMPTOTIC_TERMS):
        a *= (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = a / x**k
        mag = np.abs(term)
        # stop each point at its smallest term (optimal truncation)
        active &= mag < prev
        if not np.any(active):
            break
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            q += (-1) ** ((k - 1) // 2) * contrib
        else:
            p += (-1) ** (k // 2) * contrib
        prev = np.where(active, mag, prev)
        active &= mag > 1e-18
        if a == 0.0:
            break
    return p, q


def _asymptotic(nu: float, x: np.ndarray) -> np.ndarray:
    p, q = _hankel_pq(nu, x)
    # cos/sin of x - (nu/2 + 1/4) pi, with the phase split to keep x exact
    phase = (0.5 * nu + 0.25) * math.pi
    c, s = np.cos(x), np.sin(x)
    cw = c * math.cos(phase) + s * math.sin(phase)
    sw = s * math.cos(phase) - c * math.sin(phase)
    return np.sqrt(2.0 / (math.pi * x)) * (p * cw - q * sw)


def bessel_j(nu: float, x):
    """Bessel function ``J_nu(x)`` for real order and ``x >= 0``.

    ``x = 0`` is allowed only for ``nu >= 0``.
    """
    _check_order(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("bessel_j requires x >= 0")
    if np.any(xa == 0) and nu < 0:
        raise ValueError(f"J_{nu} diverges at x = 0")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    lo = flat < SERIES_CROSSOVER
    if np.any(lo):
        xs = flat[lo]
        with np.errstate(divide="ignore"):
            power = np.where(xs > 0, xs**nu, 1.0 if nu == 0 else 0.0)
        out[lo] = _series_scaled(nu, xs) * power
    if np.any(~lo):
        out[~lo] = _asymptotic(nu, flat[~lo])
    out = out.reshape(np.shape(xa))
    return float(out) if out.ndim == 0 else out


def bessel_j_scaled(nu: float, x):
    """``x^(-nu) J_nu(x)``, finite at ``x = 0`` for every order.

    Eigenfunctions carry factors like ``y^(3/4) J_{-3/4}(y)``; this form lets
    them be evaluated through ``y = 0`` without a removable 0 * inf.
    """
    _check_order(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("bessel_j_scaled requires x >= 0")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    lo = flat < SERIES_CROSSOVER
    if np.any(lo):
        out[lo] = _series_scaled(nu, flat[lo])
    if np.any(~lo):
        xs = flat[~lo]
        out[~lo] = _asymptotic(nu, xs) * xs ** (-nu)
    out = out.reshape(np.shape(xa))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RootList:
    roots: np.ndarray
    residuals: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def _eval(f: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        v = np.asarray(f(xs), dtype=float)
        if v.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        v = np.array([float(f(x)) for x in xs])
    return v


def _scan_grid(x_max: float, scan_step: float, x_min: float | None) -> np.ndarray:
    # geometric lead-in resolves roots far below one scan step (tiny-gamma case)
    if x_min is None:
        x_min = scan_step * 1e-7
    head = np.geomspace(x_min, scan_step, 96)
    body = np.arange(2, int(math.floor(x_max / scan_step)) + 1) * scan_step
    grid = np.concatenate([head, body])
    if grid[-1] < x_max:
        grid = np.append(grid, x_max)
    return grid[grid <= x_max]


def _refine(f: Callable, a: float, b: float, fa: float, fb: float, tol: float):
    """Shrink a sign-change bracket with the Illinois variant of false position.

    A bisection step replaces any interpolated point that fails to land
    strictly inside the bracket, so progress is guaranteed.
    """
    side = 0
    for _ in range(400):
        if b - a <= tol * abs(b):
            break
        m = b - fb * (b - a) / (fb - fa)
        if not a < m < b:
            m = 0.5 * (a + b)
            if not a < m < b:
                break
        fm = float(_eval(f, np.array([m]))[0])
        if not math.isfinite(fm):
            raise RootFindingError(f"non-finite function value at x = {m!r}")
        if fm == 0.0:
            return m, m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = m, fm
            if side == 1:
                fa *= 0.5
            side = 1
    return a, b


def find_roots(
    f: Callable,
    x_max: float,
    scan_step: float = math.pi / 16,
    x_min: float | None = None,
    tol: float = 1e-15,
    max_residual: float = 1e-10,
) -> RootList:
    """All sign-change roots of ``f`` on ``(0, x_max]``.

    Sign changes are located on a scan grid and each bracket is narrowed by
    safeguarded false position until its width relative to the root is below
    ``tol`` or no representable interior point remains. A bracket
    whose midpoint residual exceeds ``max_residual`` is treated as a pole and
    reported as an error.
    """
    if not x_max > 0 or not scan_step > 0:
        raise ValueError("x_max and scan_step must be positive")
    xs = _scan_grid(x_max, scan_step, x_min)
    vals = _eval(f, xs)
    if not np.all(np.isfinite(vals)):
        bad = xs[~np.isfinite(vals)][0]
        raise RootFindingError(f"non-finite function value at x = {bad!r}")

    roots, residuals = [], []
    for i in np.flatnonzero(vals[:-1] == 0.0):
        roots.append(xs[i])
        residuals.append(0.0)
    sign = np.sign(vals)
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        a, b = _refine(f, xs[i], xs[i + 1], vals[i], vals[i + 1], tol)
        r = 0.5 * (a + b)
        res = abs(float(_eval(f, np.array([r]))[0]))
        if res > max_residual:
            raise RootFindingError(
                f"sign change near x = {r:.15g} has residual {res:.3e}; likely a pole"
            )
        roots.append(r)
        residuals.append(res)
    order = np.argsort(roots)
    return RootList(np.asarray(roots, float)[order], np.asarray(residuals, float)[order])
