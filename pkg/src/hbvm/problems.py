"""The sine-Gordon, NLSE and KdV soliton benchmarks and their error metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral import (AliasingRisk, FourierBasis, KdVSystem, NLSSystem,
                       WaveSystem, eval_on_grid)

KDV_EPS = 0.0013020833
KDV_SPEED = 1.0 / 3.0


def sech(x):
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(x)


def sine_gordon_exact(x, t):
    return 4.0 * np.arctan(t * sech(x))


def sine_gordon_velocity(x, t):
    s = sech(x)
    return 4.0 * s / (1.0 + (t * s) ** 2)


def nlse_exact(x, t):
    env = sech(x - 4.0 * t)
    phase = 2.0 * x - 3.0 * t
    return env * np.cos(phase), env * np.sin(phase)


def periodic_wrap(xi, a: float, b: float):
    """Map ``xi`` into ``[a, b]`` by the period ``b - a``; points inside are untouched."""
    xi = np.asarray(xi, dtype=float)
    period = b - a
    out = np.where(xi > b, a + np.fmod(xi - a, period),
                   np.where(xi < a, b - np.fmod(b - xi, period), xi))
    return float(out) if out.ndim == 0 else out


def kdv_exact(x, t, eps: float = KDV_EPS, c: float = KDV_SPEED, a: float = -3.0, b: float = 5.0):
    z = periodic_wrap(np.asarray(x, dtype=float) - c * t, a, b)
    return 3.0 * c * sech(math.sqrt(c / (4.0 * eps)) * z) ** 2


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    a: float
    b: float
    T: float
    N: int
    m: int
    tol: float  # default spectral-controller tolerance
    nu_poly: int | None  # polynomial degree of H, if any
    params: dict = field(default_factory=dict)

    @property
    def components(self) -> int:
        return 2 if self.name == "nlse" else 1

    def basis(self, N: int | None = None, m: int | None = None) -> FourierBasis:
        return FourierBasis(self.a, self.b, N or self.N, m or self.m)

    def exact(self, x, t) -> np.ndarray:
        """Exact solution, shape ``(components, len(x))``."""
        if self.name == "sine-gordon":
            return sine_gordon_exact(x, t)[None]
        if self.name == "nlse":
            return np.stack(nlse_exact(x, t))
        return kdv_exact(x, t, self.params["eps"], self.params["c"], self.a, self.b)[None]

    def build_system(self, basis: FourierBasis, mean: float = 0.0):
        if self.name == "sine-gordon":
            return WaveSystem(basis)
        if self.name == "nlse":
            return NLSSystem(basis)
        # u_t + eps u_xxx + u u_x = 0, i.e. nu = -eps, mu = -1
        return KdVSystem(basis, nu=-self.params["eps"], mu=-1.0, mean=mean)

    def numerical(self, system, y) -> np.ndarray:
        """Numerical solution on the grid, shape ``(components, m + 1)``."""
        if self.name == "nlse":
            return np.stack(system.grids(y))
        return system.grid(y)[None]


SINE_GORDON = BenchmarkProblem("sine-gordon", -50.0, 50.0, 100.0, 300, 601, 1e-11, None)
NLSE = BenchmarkProblem("nlse", -40.0, 80.0, 10.0, 300, 601, 1e-14, 4)
KDV = BenchmarkProblem("kdv", -3.0, 5.0, 24.0, 300, 901, 1e-11, 3,
                       {"eps": KDV_EPS, "c": KDV_SPEED})

PROBLEMS = {p.name: p for p in (SINE_GORDON, NLSE, KDV)}


def get_problem(name: str) -> BenchmarkProblem:
    key = name.lower().replace("_", "-")
    aliases = {"sg": "sine-gordon", "sinegordon": "sine-gordon", "nls": "nlse"}
    key = aliases.get(key, key)
    if key not in PROBLEMS:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}")
    return PROBLEMS[key]


@dataclass
class InitialState:
    system: object
    y0: np.ndarray
    residual: float


def initial_state(problem: BenchmarkProblem, N: int | None = None, m: int | None = None) -> InitialState:
    """Project the exact data at t = 0 and report the worst grid mismatch."""
    basis = problem.basis(N, m)
    if not basis.aliasing_free:
        import warnings
        warnings.warn("initial projection with m < 2N + 1", AliasingRisk, stacklevel=2)
    x = basis.x
    if problem.name == "sine-gordon":
        grids = [sine_gordon_exact(x, 0.0), sine_gordon_velocity(x, 0.0)]
        coeffs = [basis.project(g) for g in grids]
        system = problem.build_system(basis)
        y0 = np.concatenate(coeffs)
    elif problem.name == "nlse":
        grids = list(nlse_exact(x, 0.0))
        coeffs = [basis.project(g) for g in grids]
        system = problem.build_system(basis)
        y0 = np.concatenate(coeffs)
    else:
        u0 = problem.exact(x, 0.0)[0]
        mean = float(basis.trapezoid(u0)) / basis.length
        system = problem.build_system(basis, mean)
        y0 = basis.wave_to_kdv(basis.project(u0))
        grids = [u0]
        coeffs = [y0]
    if problem.name == "kdv":
        back = [eval_on_grid(basis, y0, "kdv", system.mean)]
    else:
        back = [basis.evaluate(c) for c in coeffs]
    residual = max(float(np.max(np.abs(r - g))) for r, g in zip(back, grids))
    return InitialState(system, y0, residual)


@dataclass
class ErrorReport:
    e_u: float = 0.0
    e_H: float = 0.0
    e_1: float | None = None
    e_2: float | None = None
    steps: int = 0


class ErrorAccumulator:
    """Running maxima of solution and invariant errors along a trajectory.

    Nothing but the maxima is stored, so arbitrarily long runs are fine.
    """

    def __init__(self, problem: BenchmarkProblem, system, y0,
                 hamiltonian: Callable | None = None):
        self.problem = problem
        self.system = system
        self.x = system.basis.x
        self._H = hamiltonian or system.hamiltonian
        self.H0 = self._H(y0)
        self.inv0 = system.invariants(y0)
        self.report = ErrorReport(
            e_1=0.0 if "M1" in self.inv0 else None,
            e_2=0.0 if "M2" in self.inv0 else None,
        )
        self.update(0.0, y0, count=False)

    def update(self, t: float, y, count: bool = True):
        r = self.report
        diff = self.problem.numerical(self.system, y) - self.problem.exact(self.x, t)
        r.e_u = max(r.e_u, float(np.max(np.abs(diff))))
        r.e_H = max(r.e_H, abs(self._H(y) - self.H0))
        if self.inv0:
            inv = self.system.invariants(y)
            if r.e_1 is not None:
                r.e_1 = max(r.e_1, abs(inv["M1"] - self.inv0["M1"]))
            if r.e_2 is not None:
                r.e_2 = max(r.e_2, abs(inv["M2"] - self.inv0["M2"]))
        if count:
            r.steps += 1


def measure_errors(trajectory, problem: BenchmarkProblem, system,
                   hamiltonian: Callable | None = None) -> ErrorReport:
    """Errors of a stored trajectory given as ``(t_n, y_n)`` pairs, starting at t = 0."""
    it = iter(trajectory)
    t0, y0 = next(it)
    acc = ErrorAccumulator(problem, system, y0, hamiltonian)
    for t, y in it:
        acc.update(t, y)
    return acc.report


def convergence_rate(e_coarse: float, e_fine: float, n_coarse: int, n_fine: int) -> float:
    return math.log2(e_coarse / e_fine) / math.log2(n_fine / n_coarse)
