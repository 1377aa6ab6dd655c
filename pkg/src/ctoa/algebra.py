"""Canonical commutation of the Hamiltonian and the arrival-time operator.

Test vectors are ``phi = d/dq[(l^2 - q^2)^3 h(q)]`` for polynomial ``h``, so
``phi`` and ``phi'`` vanish at both walls and ``phi`` integrates to zero.

Applying ``T`` splits the kernel at the diagonal::

    (T phi)(q) = A(q) int_{-l}^{q} (q + s) phi(s) ds + B(q) int_{q}^{l} (q + s) phi(s) ds + ...

and both pieces reduce to running integrals ``F0 = int phi`` and
``F1 = int s phi``. ``apply_T`` computes them exactly for the Legendre
interpolant on a Gauss rule; the commutator check uses the trapezoid rule on a
uniform grid so that ``H(T phi)`` can be taken by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .kernel import PhysicalParams, kernel_matrix, split_form
from .quadrature import (
    GridFunction,
    QuadratureRule,
    gauss_legendre,
    rescale,
    running_integral_matrix,
)

__all__ = [
    "CanonicalTestVector",
    "make_canonical_vector",
    "boundary_test_vector",
    "probe_vector",
    "apply_T",
    "apply_H",
    "commutator_residual",
    "commutator_defect",
    "predicted_boundary_defect",
]

INTERIOR_FRACTION = 0.05
_FD8 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])


@dataclass(frozen=True)
class CanonicalTestVector:
    params: PhysicalParams
    phi: Polynomial
    periodic: bool
    h: Polynomial | None = None

    def __call__(self, q):
        return self.phi(np.asarray(q, dtype=float)).astype(complex)

    def d1(self, q):
        return self.phi.deriv(1)(np.asarray(q, dtype=float)).astype(complex)

    def d2(self, q):
        return self.phi.deriv(2)(np.asarray(q, dtype=float)).astype(complex)

    def on(self, rule: QuadratureRule) -> GridFunction:
        return GridFunction(rule, self(rule.nodes))


def _as_poly(h) -> Polynomial:
    if isinstance(h, Polynomial):
        return Polynomial(np.asarray(h.coef, dtype=complex))
    return Polynomial(np.atleast_1d(np.asarray(h, dtype=complex)))


def _wall_poly(l: float, power: int) -> Polynomial:
    return Polynomial([l * l, 0.0, -1.0]) ** power


def make_canonical_vector(p: PhysicalParams, h, periodic: bool = False) -> CanonicalTestVector:
    """``d/dq[(l^2 - q^2)^3 h]`` with its domain conditions checked.

    ``h`` is a polynomial or its ascending coefficients. The periodic domain
    also needs a vanishing first moment, which holds for odd ``h``.
    """
    hp = _as_poly(h).trim()
    if not np.any(hp.coef != 0):
        raise ValueError("h must be nonzero")
    if periodic and np.any(hp.coef[0::2] != 0):
        raise ValueError("periodic canonical vectors need odd h")
    phi = (_wall_poly(p.l, 3) * hp).deriv()
    v = CanonicalTestVector(p, phi, periodic, hp)

    l = p.l
    scale = max(1.0, float(np.max(np.abs(v(np.linspace(-l, l, 257))))))
    edge = max(abs(v(-l)), abs(v(l)), abs(v.d1(-l)), abs(v.d1(l)))
    if edge > 1e-13 * scale:
        raise ValueError(f"endpoint conditions violated ({edge:.3e})")
    rule = rescale(gauss_legendre(64), l)
    m0 = abs(rule.integrate(v(rule.nodes)))
    m1 = abs(rule.integrate(rule.nodes * v(rule.nodes)))
    if m0 > 1e-12 * scale * l:
        raise ValueError(f"zeroth moment {m0:.3e} is not zero")
    if periodic and m1 > 1e-12 * scale * l * l:
        raise ValueError(f"first moment {m1:.3e} is not zero")
    return v


def boundary_test_vector(p: PhysicalParams, h) -> CanonicalTestVector:
    """``d/dq[(l^2 - q^2)^2 h]``: zero at the walls, but ``phi'(+-l) != 0``.

    With ``h = (l + q) + exp(-2i gamma)(l - q)`` it also satisfies
    ``phi'(-l) = exp(-2i gamma) phi'(l)``, so it lies in the domain of the
    Hamiltonian without being a canonical vector.
    """
    phi = (_wall_poly(p.l, 2) * _as_poly(h)).deriv()
    return CanonicalTestVector(p, phi, p.gamma == 0.0, _as_poly(h))


def probe_vector(p: PhysicalParams, phi) -> CanonicalTestVector:
    """Wrap an arbitrary polynomial without any domain checks."""
    return CanonicalTestVector(p, _as_poly(phi), p.gamma == 0.0)


def apply_T(p: PhysicalParams, f: GridFunction, method: str = "spectral") -> GridFunction:
    """Image of ``f`` under the arrival-time operator.

    ``"spectral"`` integrates the Legendre interpolant of ``f`` exactly on
    each side of the diagonal, so the kernel's jump costs nothing.
    ``"nystrom"`` is the plain weighted sum ``sum_j w_j K(q_i, q_j) f_j``,
    exactly Hermitian in the discrete inner product but only ``O(N^-2)``
    accurate.
    """
    rule = f.rule
    if not math.isclose(rule.half_length, p.l, rel_tol=1e-12):
        raise ValueError("quadrature interval does not match the box half-length")
    q, v = rule.nodes, f.values
    if method == "nystrom":
        return GridFunction(rule, kernel_matrix(p, q) @ (rule.weights * v))
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    S, total = running_integral_matrix(rule.order)
    S, total = S * p.l, total * p.l
    F0, F1 = S @ v, S @ (q * v)
    T0, T1, T2 = total @ v, total @ (q * v), total @ (q * q * v)
    return GridFunction(rule, split_form(p, q, F0, F1, T0, T1, T2))


def apply_H(v: CanonicalTestVector, rule: QuadratureRule | None = None) -> GridFunction:
    """``-(hbar^2 / 2 mu) phi''`` from the exact second derivative."""
    p = v.params
    if rule is None:
        rule = rescale(gauss_legendre(2000), p.l)
    return GridFunction(rule, -(p.hbar**2) / (2.0 * p.mu) * v.d2(rule.nodes))


def _cumtrapz(y: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * h * (y[1:] + y[:-1]))
    return out


def _T_uniform(p: PhysicalParams, q: np.ndarray, h: float, y: np.ndarray) -> np.ndarray:
    F0, F1, F2 = _cumtrapz(y, h), _cumtrapz(q * y, h), _cumtrapz(q * q * y, h)
    return split_form(p, q, F0, F1, F0[-1], F1[-1], F2[-1])


def commutator_defect(p: PhysicalParams, v: CanonicalTestVector, N_fine: int):
    """``(HT - TH) phi - i hbar phi`` on interior points of a uniform grid.

    Returns ``(q, defect, phi)`` restricted to ``|q| <= (1 - 0.05) l``.
    """
    if N_fine < 2000:
        raise ValueError("N_fine must be >= 2000")
    l = p.l
    q = np.linspace(-l, l, N_fine + 1)
    h = q[1] - q[0]
    c = -(p.hbar**2) / (2.0 * p.mu)
    phi = v(q)
    t_phi = _T_uniform(p, q, h, phi)
    th_phi = _T_uniform(p, q, h, c * v.d2(q))
    ht_phi = np.full_like(t_phi, np.nan)
    ht_phi[4:-4] = c * np.convolve(t_phi, _FD8, mode="valid") / (h * h)
    defect = ht_phi - th_phi - 1j * p.hbar * phi
    keep = np.abs(q) <= (1.0 - INTERIOR_FRACTION) * l + 1e-12 * l
    return q[keep], defect[keep], phi[keep]


def commutator_residual(p: PhysicalParams, v: CanonicalTestVector, N_fine: int = 4000) -> float:
    """``||(HT - TH) phi - i hbar phi|| / ||i hbar phi||`` over the interior."""
    _, d, phi = commutator_defect(p, v, N_fine)
    res = float(np.linalg.norm(d) / (p.hbar * np.linalg.norm(phi)))
    if not math.isfinite(res):
        raise ArithmeticError("commutator residual is not finite")
    return res


def predicted_boundary_defect(p: PhysicalParams, v: CanonicalTestVector) -> complex:
    """Constant defect left by ``phi'(-l) != 0`` when ``gamma != 0``.

    Integrating ``T H phi`` by parts leaves wall terms; on the domain of the
    Hamiltonian they collapse to ``-hbar l exp(i gamma) phi'(-l) / (4 sin gamma)``.
    """
    if math.sin(p.gamma) == 0.0:
        raise ValueError("the closed form applies to gamma != 0")
    return complex(-p.hbar * p.l * np.exp(1j * p.gamma) * v.d1(-p.l) / (4.0 * math.sin(p.gamma)))
