"""Nystrom discretization of the kernel operators and their numeric spectra.

The quadrature-weighted matrix ``A_ij = w_j K(q_i, q_j)`` is similar to the
Hermitian ``B = W^(1/2) K W^(1/2)``, so eigenpairs come from ``eigh`` on ``B``
and eigenvectors are mapped back by dividing by ``sqrt(w)``.

The kernel jumps across the diagonal, which caps Gauss-Legendre accuracy at
``O(N^-2)`` for the eigenvalues. That error is smooth in ``N``, so one
Richardson step against the ``N/2`` spectrum removes it.

``method="product"`` instead integrates the kernel exactly against the
Legendre interpolant of the unknown (product integration). The kernel is
linear in ``q'`` on each side of the diagonal, so this discretization is
spectrally accurate for eigenvalues and eigenvectors alike.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import PhysicalParams, kernel_matrix, split_form
from .quadrature import (
    GridFunction,
    QuadratureRule,
    gauss_legendre,
    rescale,
    running_integral_matrix,
)

__all__ = [
    "EigenSolverError",
    "DiscretizedOperator",
    "SpectralEntry",
    "SpectralSet",
    "discretize",
    "hermitian_eigen",
    "numeric_spectrum",
    "fix_phase",
]

HERMITICITY_TOL = 1e-10


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    params: PhysicalParams
    rule: QuadratureRule
    matrix: np.ndarray  # symmetrized B
    method: str = "gauss"

    @property
    def sqrt_w(self) -> np.ndarray:
        return np.sqrt(self.rule.weights)


@dataclass(frozen=True)
class SpectralEntry:
    n: int  # 1-based rank within its sign (or family)
    sign: int
    tau: float
    eigenfunction: GridFunction | None = field(default=None, repr=False)
    tau_raw: float | None = None
    root: float | None = None
    case: str | None = None


@dataclass(frozen=True)
class SpectralSet:
    params: PhysicalParams
    entries: tuple
    provenance: str  # "numeric" or "analytic"

    def select(self, sign: int) -> list:
        return [e for e in self.entries if e.sign == sign]

    def taus(self, sign: int = 1) -> np.ndarray:
        return np.array([e.tau for e in self.select(sign)])


METHODS = ("gauss", "product")


def discretize(p: PhysicalParams, N: int, method: str = "gauss") -> DiscretizedOperator:
    p.check_window()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    rule = rescale(gauss_legendre(N), p.l)
    s = np.sqrt(rule.weights)
    q = rule.nodes
    if method == "gauss":
        B = s[:, None] * kernel_matrix(p, q) * s[None, :]
        return DiscretizedOperator(p, rule, B, method)
    S, total = running_integral_matrix(N)
    S, total = S * p.l, total * p.l
    M = split_form(p, q[:, None], S, S * q, total, total * q, total * q * q)
    B = s[:, None] * M / s[None, :]
    # Hermitian up to the interpolation error, which is at roundoff here
    _check_hermitian(B)
    return DiscretizedOperator(p, rule, 0.5 * (B + B.conj().T), method)


def _check_hermitian(A: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(A))))
    dev = float(np.max(np.abs(A - A.conj().T)))
    if dev > HERMITICITY_TOL * scale:
        raise EigenSolverError(f"matrix is not Hermitian (max deviation {dev:.3e})")


def hermitian_eigen(A: np.ndarray, vectors: bool = True):
    """Eigenvalues in ascending order (and eigenvectors) of a Hermitian matrix."""
    _check_hermitian(A)
    try:
        if vectors:
            return np.linalg.eigh(A)
        return np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc


def fix_phase(values: np.ndarray) -> np.ndarray:
    """Rotate so the largest-modulus sample is real and positive."""
    k = int(np.argmax(np.abs(values)))
    return values * (abs(values[k]) / values[k])


def _extremes(vals: np.ndarray, m: int):
    """Indices of the m largest positive and m most negative eigenvalues."""
    order = np.argsort(-np.abs(vals))
    pos = [i for i in order if vals[i] > 0][:m]
    neg = [i for i in order if vals[i] < 0][:m]
    return pos, neg


def numeric_spectrum(
    p: PhysicalParams, N: int, m: int, extrapolate: bool = True, method: str = "gauss"
) -> SpectralSet:
    """Largest-magnitude ``m`` eigenvalues of each sign with eigenfunctions.

    With ``extrapolate`` (Gauss-Legendre Nystrom only) the reported ``tau`` is
    ``tau_N + (tau_N - tau_{N/2})/3``; ``tau_raw`` always holds the plain
    ``N``-point value that pairs with the stored eigenvector.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if N < 2 * m + 2:
        raise ValueError("N too small for the requested number of eigenvalues")
    op = discretize(p, N, method)
    vals, vecs = hermitian_eigen(op.matrix)
    pos, neg = _extremes(vals, m)

    coarse = None
    if extrapolate and method == "gauss":
        cvals = hermitian_eigen(discretize(p, N // 2).matrix, vectors=False)
        cpos, cneg = _extremes(cvals, m)
        coarse = {1: cvals[cpos], -1: cvals[cneg]}

    sw = op.sqrt_w
    entries = []
    for sign, idx in ((1, pos), (-1, neg)):
        for rank, i in enumerate(idx):
            v = vecs[:, i] / sw
            f = GridFunction(op.rule, v)
            f = GridFunction(op.rule, fix_phase(v / f.norm()))
            raw = float(vals[i])
            tau = raw
            if coarse is not None and rank < len(coarse[sign]):
                tau = raw + (raw - float(coarse[sign][rank])) / 3.0
            entries.append(SpectralEntry(rank + 1, sign, tau, f, tau_raw=raw))
    return SpectralSet(p, tuple(entries), f"numeric:{method}")
