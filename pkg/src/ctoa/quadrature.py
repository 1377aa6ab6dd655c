"""Gauss-Legendre quadrature on symmetric intervals and grid-sampled functions.

Everything downstream (the Nystrom matrices, eigenfunction normalisation,
plane-wave projections) integrates over ``[-l, l]`` with a rule produced here.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureError",
    "QuadratureRule",
    "GridFunction",
    "legendre_eval",
    "gauss_legendre",
    "rescale",
    "inner_product",
    "integrate",
    "running_integral_matrix",
]

_MAX_NEWTON = 100


class QuadratureError(RuntimeError):
    """Raised when node computation fails to converge."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of an ``order``-point rule on ``[-half_length, half_length]``."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    half_length: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.nodes.shape != (self.order,) or self.weights.shape != (self.order,):
            raise ValueError("nodes and weights must both have length `order`")

    def same_grid(self, other: "QuadratureRule") -> bool:
        if self is other:
            return True
        return (
            self.order == other.order
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def integrate(self, values) -> complex | float:
        return np.dot(self.weights, values)


def legendre_eval(n: int, x):
    """Return ``(P_n(x), P_n'(x))`` by the three-term recurrence.

    ``x`` may be a scalar or an array. At ``x = +-1`` the derivative is taken
    from the closed form ``(+-1)^(n-1) n(n+1)/2``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(1, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if n == 0:
        dp = np.zeros_like(x)
    else:
        edge = np.abs(x) == 1.0
        denom = np.where(edge, 1.0, x * x - 1.0)
        dp = n * (x * p - p_prev) / denom
        if np.any(edge):
            dp = np.where(edge, np.sign(x) ** (n - 1) * n * (n + 1) / 2.0, dp)
    if dp.ndim == 0:
        return float(p), float(dp)
    return p, dp


def _legendre_pair(n: int, x: np.ndarray):
    """P_n, P_{n-1} and P_n' at interior points."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(1, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, p_prev, dp


@functools.lru_cache(maxsize=32)
def gauss_legendre(N: int) -> QuadratureRule:
    """N-point Gauss-Legendre rule on [-1, 1].

    Roots of P_N are polished by Newton iteration started from the asymptotic
    cosine estimate; only the non-negative half is iterated and the rest is
    mirrored, so the rule is exactly symmetric. Weights use
    ``w_j = 2 / ((1 - x_j^2) P_N'(x_j)^2)``, which equals
    ``2 / (N P_{N-1}(x_j) P_N'(x_j))`` at the roots but loses less to rounding.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return QuadratureRule(1, [0.0], [2.0])

    m = (N + 1) // 2  # roots in [0, 1)
    i = np.arange(1, m + 1)
    theta = math.pi * (i - 0.25) / (N + 0.5)
    x = (1.0 - 1.0 / (8.0 * N**2) + 1.0 / (8.0 * N**3)) * np.cos(theta)
    if N % 2 == 1:
        x[-1] = 0.0

    tol = 4.0 * np.finfo(float).eps
    for it in range(_MAX_NEWTON):
        p, _, dp = _legendre_pair(N, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise QuadratureError(
            f"Newton iteration for P_{N} roots did not converge in {_MAX_NEWTON} steps "
            f"(last max |dx| = {np.max(np.abs(dx)):.3e})"
        )
    _, _, dp = _legendre_pair(N, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if N % 2 == 1:
        x[-1] = 0.0

    # x is descending from near 1; assemble ascending with exact mirror symmetry
    pos_x, pos_w = x[::-1], w[::-1]
    if N % 2 == 1:
        nodes = np.concatenate([-x, pos_x[1:]])
        weights = np.concatenate([w, pos_w[1:]])
    else:
        nodes = np.concatenate([-x, pos_x])
        weights = np.concatenate([w, pos_w])
    return QuadratureRule(N, nodes + 0.0, weights)


def rescale(rule: QuadratureRule, l: float) -> QuadratureRule:
    """Scale a symmetric rule by ``l`` (nodes and weights both multiply by ``l``)."""
    if not l > 0:
        raise ValueError(f"scale factor must be positive, got {l!r}")
    return QuadratureRule(rule.order, rule.nodes * l, rule.weights * l, rule.half_length * l)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A complex function sampled at the nodes of a quadrature rule."""

    rule: QuadratureRule
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.rule.order,):
            raise ValueError("one value per quadrature node is required")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    def norm(self) -> float:
        return math.sqrt(float(np.dot(self.rule.weights, np.abs(self.values) ** 2)))

    def scaled(self, c: complex) -> "GridFunction":
        return GridFunction(self.rule, c * self.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self, other)
        return GridFunction(self.rule, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self, other)
        return GridFunction(self.rule, self.values - other.values)


def _check_same(f: GridFunction, g: GridFunction):
    if not f.rule.same_grid(g.rule):
        raise ValueError("grid functions live on different quadrature rules")


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """Discrete ``<f|g> = sum_i w_i conj(f_i) g_i``."""
    _check_same(f, g)
    return complex(np.dot(f.rule.weights, np.conj(f.values) * g.values))


def integrate(rule: QuadratureRule, fn) -> complex | float:
    """Integrate a vectorised callable over the rule's interval."""
    return rule.integrate(fn(rule.nodes))


@functools.lru_cache(maxsize=4)
def running_integral_matrix(N: int):
    """``(S, total)`` on the N-point rule over [-1, 1].

    ``(S @ f)_i`` is the integral from -1 to ``x_i`` of the degree ``N-1``
    Legendre interpolant of the samples ``f``; ``total @ f`` is the full
    integral. Both are exact for polynomials of degree below ``N``.
    """
    leg = np.polynomial.legendre
    r = gauss_legendre(N)
    x = r.nodes
    proj = (leg.legvander(x, N - 1) * r.weights[:, None]).T
    proj *= ((2 * np.arange(N) + 1) / 2.0)[:, None]
    anti = leg.legint(np.eye(N), lbnd=-1, axis=0) @ proj
    S = leg.legvander(x, N) @ anti
    total = anti.sum(axis=0)  # P_k(1) = 1
    S.setflags(write=False)
    total.setflags(write=False)
    return S, total
