"""Fourier semi-discretization on a periodic interval and three Hamiltonian systems.

Orthonormal basis on ``[a, b]`` (``L = b - a``, ``kappa = 2 pi / L``)::

    c_0 = 1/sqrt(L),  c_j = sqrt(2/L) cos(kappa j (x - a)),  s_j = sqrt(2/L) sin(kappa j (x - a))

Coefficient layouts:

* ``"wave"`` (sine-Gordon, NLSE): ``(alpha_0, beta_1, alpha_1, beta_2, alpha_2, ...)``,
  length ``2N + 1`` per component.
* ``"kdv"``: ``(alpha_1, beta_1, alpha_2, beta_2, ...)``, length ``2N``; the
  mean is carried separately and is constant in time.

Space integrals use the composite trapezoidal rule on ``x_i = a + i L / m``,
``i = 0..m``.  Transforms go through real FFTs of length ``m``; the dense
basis matrix is kept as a reference route.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp


class LayoutMismatch(ValueError):
    pass


class AliasingRisk(UserWarning):
    pass


@dataclass(frozen=True)
class FourierBasis:
    a: float
    b: float
    N: int
    m: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")
        if self.N < 1 or self.m < 1:
            raise ValueError("need N >= 1 and m >= 1")
        if self.m < 2 * self.N + 1:
            warnings.warn(f"m={self.m} < 2N+1={2 * self.N + 1}: trapezoidal projection aliases",
                          AliasingRisk, stacklevel=3)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def kappa(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return self.a + np.arange(self.m + 1) * (self.length / self.m)

    @property
    def aliasing_free(self) -> bool:
        return self.m >= 2 * self.N + 1

    @cached_property
    def frequencies(self) -> np.ndarray:
        """kappa * j for each slot of the wave layout (0 for the constant mode)."""
        j = (np.arange(2 * self.N + 1) + 1) // 2
        return self.kappa * j

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense ``(m + 1) x (2N + 1)`` matrix of basis values ``w(x_i)^T``."""
        L = self.length
        theta = np.outer(self.x - self.a, self.kappa * np.arange(1, self.N + 1))
        W = np.empty((self.m + 1, 2 * self.N + 1))
        W[:, 0] = 1.0 / np.sqrt(L)
        W[:, 1::2] = np.sqrt(2.0 / L) * np.sin(theta)
        W[:, 2::2] = np.sqrt(2.0 / L) * np.cos(theta)
        return W

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.m + 1, self.length / self.m)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def trapezoid(self, g) -> np.ndarray:
        """Composite trapezoidal rule over the last axis (``m + 1`` values)."""
        g = np.asarray(g, dtype=float)
        if g.shape[-1] != self.m + 1:
            raise LayoutMismatch(f"expected {self.m + 1} grid values, got {g.shape[-1]}")
        h = self.length / self.m
        return h * (g[..., 1:-1].sum(axis=-1) + 0.5 * (g[..., 0] + g[..., -1]))

    # -- transforms, wave layout -----------------------------------------

    def evaluate(self, q) -> np.ndarray:
        """Grid values ``w(x_i)^T q`` for ``q`` of shape ``(..., 2N + 1)``."""
        q = np.asarray(q, dtype=float)
        if q.shape[-1] != 2 * self.N + 1:
            raise LayoutMismatch(f"expected {2 * self.N + 1} coefficients, got {q.shape[-1]}")
        if not self.aliasing_free:
            return q @ self.matrix.T
        m, L = self.m, self.length
        X = np.zeros(q.shape[:-1] + (m // 2 + 1,), dtype=complex)
        X[..., 0] = q[..., 0] * (m / np.sqrt(L))
        scale = m / np.sqrt(2.0 * L)
        X[..., 1:self.N + 1] = scale * (q[..., 2::2] - 1j * q[..., 1::2])
        u = np.fft.irfft(X, n=m, axis=-1)
        return np.concatenate([u, u[..., :1]], axis=-1)

    def project(self, g) -> np.ndarray:
        """Trapezoidal inner products of grid data with every basis function."""
        g = np.asarray(g, dtype=float)
        if g.shape[-1] != self.m + 1:
            raise LayoutMismatch(f"expected {self.m + 1} grid values, got {g.shape[-1]}")
        if not self.aliasing_free:
            return (g * self.weights) @ self.matrix
        m, L = self.m, self.length
        gp = g[..., :m].copy()
        gp[..., 0] = 0.5 * (g[..., 0] + g[..., m])
        G = np.fft.rfft(gp, axis=-1)
        q = np.empty(g.shape[:-1] + (2 * self.N + 1,))
        q[..., 0] = G[..., 0].real * (np.sqrt(L) / m)
        scale = np.sqrt(2.0 * L) / m
        q[..., 2::2] = scale * G[..., 1:self.N + 1].real
        q[..., 1::2] = -scale * G[..., 1:self.N + 1].imag
        return q

    # -- kdv layout ------------------------------------------------------

    def kdv_to_wave(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != 2 * self.N:
            raise LayoutMismatch(f"expected {2 * self.N} coefficients, got {y.shape[-1]}")
        q = np.zeros(y.shape[:-1] + (2 * self.N + 1,))
        q[..., 2::2] = y[..., 0::2]
        q[..., 1::2] = y[..., 1::2]
        return q

    def wave_to_kdv(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        y = np.empty(q.shape[:-1] + (2 * self.N,))
        y[..., 0::2] = q[..., 2::2]
        y[..., 1::2] = q[..., 1::2]
        return y

    @cached_property
    def D(self) -> sp.csr_matrix:
        """Skew block-diagonal ``kappa * diag(0, 1 J2, 2 J2, ...)`` in the wave layout."""
        n = 2 * self.N + 1
        j = np.arange(1, self.N + 1)
        rows = np.concatenate([2 * j - 1, 2 * j])
        cols = np.concatenate([2 * j, 2 * j - 1])
        vals = np.concatenate([self.kappa * j, -self.kappa * j])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def eval_on_grid(basis: FourierBasis, coeffs, layout: str = "wave", mean: float = 0.0) -> np.ndarray:
    """Grid values of one component; for the kdv layout ``mean`` is added."""
    if layout == "wave":
        return basis.evaluate(coeffs)
    if layout == "kdv":
        return mean + basis.evaluate(basis.kdv_to_wave(coeffs))
    raise LayoutMismatch(f"unknown layout {layout!r}")


def project_to_coefficients(basis: FourierBasis, grid, layout: str = "wave") -> np.ndarray:
    q = basis.project(grid)
    return basis.wave_to_kdv(q) if layout == "kdv" else q


def trapezoid(basis: FourierBasis, grid) -> float:
    return float(basis.trapezoid(grid))


class _SemiDiscrete:
    basis: FourierBasis
    dim: int
    linear_operator: sp.csr_matrix

    def linear_part(self, y):
        y = np.asarray(y, dtype=float)
        return (self.linear_operator @ y.reshape(-1, self.dim).T).T.reshape(y.shape)

    def invariants(self, y) -> dict[str, float]:
        return {}


class WaveSystem(_SemiDiscrete):
    """Semilinear wave equation ``u_tt = u_xx - f'(u)``; state ``(q, p)``.

    Defaults to sine-Gordon with ``f(u) = 1 - cos u`` so that ``f(0) = 0``.
    """

    layout = "wave"

    def __init__(self, basis: FourierBasis,
                 f: Callable = lambda u: 1.0 - np.cos(u),
                 fprime: Callable = np.sin):
        self.basis = basis
        self.f = f
        self.fprime = fprime
        self.n = 2 * basis.N + 1
        self.dim = 2 * self.n
        self.dtd = basis.frequencies**2
        n = self.n
        self.linear_operator = sp.bmat([[None, sp.identity(n)],
                                        [sp.diags(-self.dtd), None]], format="csr")

    def split(self, y):
        y = np.asarray(y, dtype=float)
        return y[..., :self.n], y[..., self.n:]

    def grid(self, y) -> np.ndarray:
        """u on the grid."""
        return self.basis.evaluate(self.split(y)[0])

    def rhs(self, y):
        q, p = self.split(y)
        nl = self.basis.project(self.fprime(self.basis.evaluate(q)))
        return np.concatenate([p, -self.dtd * q - nl], axis=-1)

    def gradient(self, y):
        q, p = self.split(y)
        nl = self.basis.project(self.fprime(self.basis.evaluate(q)))
        return np.concatenate([self.dtd * q + nl, p], axis=-1)

    def hamiltonian(self, y) -> float:
        q, p = self.split(y)
        u = self.basis.evaluate(q)
        return float(0.5 * (p @ p + q @ (self.dtd * q)) + self.basis.trapezoid(self.f(u)))


class NLSSystem(_SemiDiscrete):
    """Real form of the NLSE ``u_t = -v_xx - f'(u^2+v^2) v``, ``v_t = u_xx + f'(u^2+v^2) u``.

    Defaults to the cubic case ``f(r) = r^2``, ``f'(r) = 2 r``.
    """

    layout = "wave"

    def __init__(self, basis: FourierBasis,
                 f: Callable = lambda r: r * r,
                 fprime: Callable = lambda r: 2.0 * r):
        self.basis = basis
        self.f = f
        self.fprime = fprime
        self.n = 2 * basis.N + 1
        self.dim = 2 * self.n
        self.dtd = basis.frequencies**2
        d = sp.diags(self.dtd)
        self.linear_operator = sp.bmat([[None, d], [-d, None]], format="csr")

    def split(self, y):
        y = np.asarray(y, dtype=float)
        return y[..., :self.n], y[..., self.n:]

    def grids(self, y):
        q, p = self.split(y)
        return self.basis.evaluate(q), self.basis.evaluate(p)

    def _nonlinear(self, y):
        u, v = self.grids(y)
        g = self.fprime(u * u + v * v)
        return self.basis.project(g * u), self.basis.project(g * v)

    def rhs(self, y):
        q, p = self.split(y)
        gu, gv = self._nonlinear(y)
        return np.concatenate([self.dtd * p - gv, -self.dtd * q + gu], axis=-1)

    def gradient(self, y):
        q, p = self.split(y)
        gu, gv = self._nonlinear(y)
        return np.concatenate([self.dtd * q - gu, self.dtd * p - gv], axis=-1)

    def hamiltonian(self, y) -> float:
        q, p = self.split(y)
        u, v = self.grids(y)
        quad = p @ (self.dtd * p) + q @ (self.dtd * q)
        return float(0.5 * (quad - self.basis.trapezoid(self.f(u * u + v * v))))

    def invariants(self, y) -> dict[str, float]:
        return dict(zip(("M1", "M2"), nls_invariants(self, *self.split(y))))


class KdVSystem(_SemiDiscrete):
    """``u_t = nu u_xxx + mu u u_x`` as ``y' = kappa (Dhat (x) J2) grad H(y)``.

    ``mean`` is the (constant) value of the zero mode, ``u = mean + w_hat^T y``.
    The derivative factor ``kappa = 2 pi / (b - a)`` is kept explicit so the
    interval need not have length ``2 pi``.
    """

    layout = "kdv"

    def __init__(self, basis: FourierBasis, nu: float, mu: float, mean: float = 0.0):
        self.basis = basis
        self.nu = nu
        self.mu = mu
        self.mean = float(mean)
        self.dim = 2 * basis.N
        j = np.repeat(np.arange(1, basis.N + 1), 2).astype(float)
        kappa = basis.kappa
        self.stiffness = -nu * (kappa * j) ** 2  # diagonal of the quadratic form
        # skew K = kappa (Dhat (x) J2)
        idx = np.arange(basis.N)
        rows = np.concatenate([2 * idx, 2 * idx + 1])
        cols = np.concatenate([2 * idx + 1, 2 * idx])
        vals = np.concatenate([kappa * (idx + 1), -kappa * (idx + 1)])
        self.K = sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))
        self.linear_operator = (self.K @ sp.diags(self.stiffness)).tocsr()

    def grid(self, y) -> np.ndarray:
        return eval_on_grid(self.basis, y, "kdv", self.mean)

    def gradient(self, y):
        y = np.asarray(y, dtype=float)
        u = self.grid(y)
        nl = self.basis.wave_to_kdv(self.basis.project(u * u))
        return self.stiffness * y + 0.5 * self.mu * nl

    def rhs(self, y):
        g = self.gradient(y)
        return (self.K @ g.reshape(-1, self.dim).T).T.reshape(g.shape)

    def hamiltonian(self, y) -> float:
        y = np.asarray(y, dtype=float)
        u = self.grid(y)
        return float(0.5 * (y @ (self.stiffness * y)) + self.mu / 6.0 * self.basis.trapezoid(u**3))


def wave_rhs(system: WaveSystem, q, p):
    out = system.rhs(np.concatenate([q, p], axis=-1))
    return system.split(out)


def nls_rhs(system: NLSSystem, q, p):
    out = system.rhs(np.concatenate([q, p], axis=-1))
    return system.split(out)


def kdv_rhs(system: KdVSystem, y):
    return system.rhs(y)


def hamiltonian(system, y) -> float:
    return system.hamiltonian(y)


def nls_invariants(system: NLSSystem, q, p) -> tuple[float, float]:
    """Mass ``M1 = int u^2 + v^2`` and momentum ``M2 = 2 q^T D p``."""
    b = system.basis
    u, v = b.evaluate(q), b.evaluate(p)
    M1 = float(b.trapezoid(u * u + v * v))
    M2 = float(2.0 * (np.asarray(q) @ (b.D @ np.asarray(p))))
    return M1, M2
