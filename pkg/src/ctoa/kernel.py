"""Position-space kernels of the confined time-of-arrival operators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhysicalParams",
    "kernel_nonperiodic",
    "kernel_periodic",
    "kernel",
    "kernel_matrix",
    "kernel_zero_mode",
    "split_form",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, action scale, half-length of the box and boundary phase.

    Defaults are atomic units. ``gamma == 0`` selects the periodic operator.
    Any real ``gamma`` is accepted so the kernel can be evaluated at
    ``-gamma`` for symmetry checks; operator construction calls
    :meth:`check_window`.
    """

    mu: float = 1.0
    hbar: float = 1.0
    l: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("mu", "hbar", "l"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")

    @property
    def periodic(self) -> bool:
        return self.gamma == 0.0

    @property
    def antiperiodic(self) -> bool:
        return self.gamma == math.pi / 2

    @property
    def time_scale(self) -> float:
        """``mu l^2 / (4 hbar)``: eigenvalues are this divided by a root."""
        return self.mu * self.l**2 / (4.0 * self.hbar)

    def check_window(self) -> "PhysicalParams":
        if not (-math.pi / 2 < self.gamma <= math.pi / 2):
            raise ValueError(f"gamma={self.gamma} outside (-pi/2, pi/2]")
        return self

    def with_gamma(self, gamma: float) -> "PhysicalParams":
        return PhysicalParams(self.mu, self.hbar, self.l, gamma)


def kernel_nonperiodic(p: PhysicalParams, q, q2):
    """Kernel for ``gamma != 0``; the Heaviside step is 1/2 on the diagonal."""
    s = math.sin(p.gamma)
    if s == 0.0:
        raise ValueError("kernel_nonperiodic needs sin(gamma) != 0; use kernel_periodic")
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    step = np.heaviside(q - q2, 0.5)
    phase = np.exp(1j * p.gamma) * step + np.exp(-1j * p.gamma) * (1.0 - step)
    out = -p.mu * (q + q2) / (4.0 * p.hbar * s) * phase
    return complex(out) if np.ndim(out) == 0 else out


def kernel_periodic(p: PhysicalParams, q, q2):
    """Kernel for ``gamma == 0`` with ``sgn(0) = 0``."""
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    c = p.mu / (4j * p.hbar)
    out = c * (q + q2) * np.sign(q - q2) - c / p.l * (q * q - q2 * q2)
    return complex(out) if np.ndim(out) == 0 else out


def kernel(p: PhysicalParams, q, q2):
    if p.gamma == 0.0:
        return kernel_periodic(p, q, q2)
    return kernel_nonperiodic(p, q, q2)


def kernel_matrix(p: PhysicalParams, nodes: np.ndarray) -> np.ndarray:
    """``K(q_i, q_j)`` on a node set."""
    nodes = np.asarray(nodes, dtype=float)
    return kernel(p, nodes[:, None], nodes[None, :])


def kernel_zero_mode(p: PhysicalParams, q, q2):
    """Contribution of the lowest momentum mode (k = 0) to the gamma != 0 kernel.

    It carries the 1/gamma divergence; subtracting it leaves a kernel that
    tends to the periodic one as gamma -> 0.
    """
    q = np.asarray(q, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    g = p.gamma
    out = -p.mu / (4.0 * p.hbar * g) * (q + q2) * np.exp(1j * g * (q - q2) / p.l)
    return complex(out) if np.ndim(out) == 0 else out


def split_form(p: PhysicalParams, q, F0, F1, T0, T1, T2):
    """Assemble ``(T f)(q)`` from running integrals of ``f``.

    ``F0, F1`` are ``int_{-l}^{q} f`` and ``int_{-l}^{q} s f``; ``T0, T1, T2``
    are the full integrals of ``f, s f, s^2 f``. On each side of the diagonal
    the kernel is linear in ``s`` (plus the periodic ``s^2`` term), so these
    five numbers determine the image exactly. Inputs broadcast, so passing
    matrices of running-integral weights yields the operator matrix.
    """
    left = q * F0 + F1
    right = q * (T0 - F0) + (T1 - F1)
    if p.gamma == 0.0:
        c = p.mu / (4j * p.hbar)
        return c * (left - right) - c / p.l * (q * q * T0 - T2)
    c = -p.mu / (4.0 * p.hbar * math.sin(p.gamma))
    return c * (np.exp(1j * p.gamma) * left + np.exp(-1j * p.gamma) * right)
