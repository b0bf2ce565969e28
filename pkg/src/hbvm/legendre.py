"""Shifted orthonormal Legendre polynomials on [0, 1] and Gauss-Legendre rules.

The polynomials are normalized so that ``int_0^1 P_i P_j dx = delta_ij``.
"""
from dataclasses import dataclass

import numpy as np

MAX_NODES = 64


class NonConvergence(RuntimeError):
    """Newton iteration for a Gauss node did not converge."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Legendre rule on [0, 1]: ``k`` nodes ``c`` and weights ``b``."""

    k: int
    c: np.ndarray
    b: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        return np.diag(self.b)

    def integrate(self, f) -> float:
        return float(np.dot(self.b, f(self.c)))


def _legendre_table(n: int, t: np.ndarray) -> np.ndarray:
    """Standard Legendre L_0..L_n at points t in [-1, 1], shape (len(t), n + 1)."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (n + 1,))
    out[..., 0] = 1.0
    if n >= 1:
        out[..., 1] = t
    for j in range(1, n):
        out[..., j + 1] = ((2 * j + 1) * t * out[..., j] - j * out[..., j - 1]) / (j + 1)
    return out


def shifted_legendre_table(n: int, x) -> np.ndarray:
    """Orthonormal shifted Legendre P_0..P_n at x, shape ``x.shape + (n + 1,)``."""
    vals = _legendre_table(n, 2.0 * np.asarray(x, dtype=float) - 1.0)
    return vals * np.sqrt(2.0 * np.arange(n + 1) + 1.0)


def shifted_legendre_eval(j: int, x):
    """Degree-``j`` orthonormal shifted Legendre polynomial at ``x``."""
    if j < 0:
        raise ValueError("degree must be non-negative")
    vals = shifted_legendre_table(j, x)[..., j]
    return float(vals) if np.ndim(vals) == 0 else vals


def shifted_legendre_primitive_table(n: int, c) -> np.ndarray:
    """``int_0^c P_j(x) dx`` for j = 0..n, shape ``c.shape + (n + 1,)``.

    Uses ``int_0^c P_j = (L_{j+1}(t) - L_{j-1}(t)) / (2 sqrt(2j+1))`` with
    ``t = 2c - 1``; the lower limit contributes nothing since
    ``L_{j+1}(-1) = L_{j-1}(-1)``.
    """
    c = np.asarray(c, dtype=float)
    leg = _legendre_table(n + 1, 2.0 * c - 1.0)
    out = np.empty(c.shape + (n + 1,))
    out[..., 0] = c
    j = np.arange(1, n + 1)
    out[..., 1:] = (leg[..., 2:] - leg[..., :-2]) / (2.0 * np.sqrt(2.0 * j + 1.0))
    return out


def shifted_legendre_primitive(j: int, c):
    """``int_0^c P_j(x) dx``; zero at ``c = 1`` for every ``j >= 1``."""
    if j < 0:
        raise ValueError("degree must be non-negative")
    vals = shifted_legendre_primitive_table(j, c)[..., j]
    return float(vals) if np.ndim(vals) == 0 else vals


def _legendre_and_derivative(k: int, t: np.ndarray):
    p_prev = np.ones_like(t)
    p = t.copy()
    for j in range(1, k):
        p_prev, p = p, ((2 * j + 1) * t * p - j * p_prev) / (j + 1)
    # L_k'(t) = k (t L_k - L_{k-1}) / (t^2 - 1); nodes never touch +-1
    dp = k * (t * p - p_prev) / (t * t - 1.0)
    return p, dp


def gauss_legendre_rule(k: int, max_iter: int = 100) -> QuadratureRule:
    """k-point Gauss-Legendre rule on [0, 1], exact up to degree 2k - 1.

    Roots of L_k are found by Newton iteration from Chebyshev-like initial
    guesses; only the non-negative half is iterated and the rest mirrored,
    so the rule is symmetric to the last bit.
    """
    if not 1 <= k <= MAX_NODES:
        raise ValueError(f"k must lie in [1, {MAX_NODES}], got {k}")
    if k == 1:
        return QuadratureRule(1, np.array([0.5]), np.array([1.0]))

    half = k // 2
    i = np.arange(1, half + 1)
    t = np.cos(np.pi * (4 * i - 1) / (4 * k + 2))  # descending, all > 0
    for _ in range(max_iter):
        p, dp = _legendre_and_derivative(k, t)
        dt = p / dp
        t = t - dt
        if np.max(np.abs(dt)) <= 4 * np.finfo(float).eps:
            break
    else:
        raise NonConvergence(f"Gauss nodes for k={k} did not converge")
    _, dp = _legendre_and_derivative(k, t)
    w = 2.0 / ((1.0 - t * t) * dp * dp)

    # assemble ascending roots in [-1, 1] from the positive half
    if k % 2:
        _, dp0 = _legendre_and_derivative(k, np.zeros(1))
        w0 = 2.0 / dp0**2
        roots = np.concatenate([-t, [0.0], t[::-1]])
        weights = np.concatenate([w, w0, w[::-1]])
    else:
        roots = np.concatenate([-t, t[::-1]])
        weights = np.concatenate([w, w[::-1]])

    c = 0.5 * (1.0 + roots)
    c[k - half:] = 1.0 - c[:half][::-1]
    b = 0.5 * weights
    c.setflags(write=False)
    b.setflags(write=False)
    return QuadratureRule(k, c, b)
