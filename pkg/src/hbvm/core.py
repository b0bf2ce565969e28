"""HBVM(k, s) methods: tableau, gamma-form step solver, adaptive choice of s.

The discrete problem of one step is posed in the ``s`` Legendre coefficients
``gamma_0..gamma_{s-1}`` of the vector field on ``[t0, t0 + h]``:

    gamma = (Ps^T Omega (x) I) phi(1 (x) y0 + h (Is (x) I) gamma),
    y1    = y0 + h gamma_0,

so the unknowns have block size ``s`` whatever the number ``k`` of stages.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Protocol

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .legendre import (MAX_NODES, QuadratureRule, gauss_legendre_rule,
                       shifted_legendre_primitive_table,
                       shifted_legendre_table)

UNIT_ROUNDOFF = 2.22e-16


class InvalidParams(ValueError):
    pass


class NoConvergence(RuntimeError):
    """The nonlinear iteration for one step exhausted its budget or blew up."""

    def __init__(self, iterations: int, last_residual: float, step_index: int | None = None):
        self.iterations = iterations
        self.last_residual = last_residual
        self.step_index = step_index
        where = "" if step_index is None else f" at step {step_index}"
        super().__init__(f"no convergence{where} after {iterations} iterations "
                         f"(last residual {last_residual:.3e})")


class SMaxExceeded(UserWarning):
    """The adaptive controller wanted more than ``s_max`` basis functions."""


@dataclass(frozen=True, eq=False)
class HbvmTableau:
    k: int
    s: int
    rule: QuadratureRule
    Is: np.ndarray  # k x s, int_0^{c_i} P_j
    Ps: np.ndarray  # k x s, P_j(c_i)
    A: np.ndarray   # k x k Butcher matrix

    @property
    def c(self) -> np.ndarray:
        return self.rule.c

    @property
    def b(self) -> np.ndarray:
        return self.rule.b

    @property
    def PsT_Omega(self) -> np.ndarray:
        """s x k matrix mapping stage values of phi to the gammas."""
        return self.Ps.T * self.rule.b

    @property
    def X(self) -> np.ndarray:
        """s x s matrix Ps^T Omega Is (exactly the Legendre integration matrix)."""
        return self.PsT_Omega @ self.Is


@lru_cache(maxsize=None)
def build_tableau(k: int, s: int) -> HbvmTableau:
    if not 1 <= s <= k:
        raise InvalidParams(f"need 1 <= s <= k, got k={k}, s={s}")
    if k > MAX_NODES:
        raise InvalidParams(f"k={k} exceeds the cap {MAX_NODES}")
    rule = gauss_legendre_rule(k)
    Is = shifted_legendre_primitive_table(s - 1, rule.c)
    Ps = shifted_legendre_table(s - 1, rule.c)
    A = Is @ (Ps.T * rule.b)
    for arr in (Is, Ps, A):
        arr.setflags(write=False)
    return HbvmTableau(k, s, rule, Is, Ps, A)


def k_rule(s: int, nu: int | None = None) -> int:
    """Number of stages for a given ``s``.

    Without ``nu`` use the generic choice ``max(s + 2, 20)``; for a polynomial
    Hamiltonian of degree ``nu`` return the smallest ``k`` making the
    quadrature of the energy balance exact.
    """
    if s < 1:
        raise InvalidParams("s must be >= 1")
    if nu is None:
        return max(s + 2, 20)
    return max(math.ceil(nu * s / 2), s)


class HamiltonianSystem(Protocol):
    """What the step solver needs from a problem.

    ``rhs`` must accept stacked states of shape ``(..., dim)``.
    ``linear_operator`` is the (sparse) matrix of the linear part of ``rhs``,
    used as the approximate Jacobian.
    """

    dim: int
    linear_operator: sp.spmatrix

    def rhs(self, y: np.ndarray) -> np.ndarray: ...

    def linear_part(self, y: np.ndarray) -> np.ndarray: ...

    def hamiltonian(self, y: np.ndarray) -> float: ...

    def invariants(self, y: np.ndarray) -> dict[str, float]: ...


class SolverMode(enum.Enum):
    FIXED_POINT = "fixed-point"
    LINEAR_NEWTON = "linear-newton"


@dataclass(frozen=True)
class SolverConfig:
    mode: SolverMode = SolverMode.LINEAR_NEWTON
    nonlinear_tol: float = 1e-14
    max_iters: int = 100
    u: float = UNIT_ROUNDOFF
    # once the increments stop decreasing, accept if within this factor of tol
    plateau_factor: float = 1e3

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", SolverMode(self.mode))
        if not self.nonlinear_tol > 0:
            raise InvalidParams("nonlinear_tol must be positive")
        if self.max_iters < 1:
            raise InvalidParams("max_iters must be >= 1")


@dataclass
class GammaSolution:
    gammas: np.ndarray  # s x dim
    rho: float
    iterations: int
    converged: bool
    residual: float = 0.0

    @property
    def s(self) -> int:
        return self.gammas.shape[0]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.gammas, axis=1)


def rho_ratio(gammas) -> float:
    """``||gamma_{s-1}|| / max_i ||gamma_i||`` with Euclidean norms; 0 if all vanish."""
    norms = np.array([np.linalg.norm(g) for g in gammas], dtype=float)
    return _rho_from_norms(norms)


def _rho_from_norms(norms: np.ndarray) -> float:
    top = norms.max()
    if top == 0.0:
        return 0.0
    return float(norms[-1] / top)


def tail_settled(norms: np.ndarray, tol: float, plateau: float = 100.0) -> bool:
    """True if the gamma tail is below ``tol`` or has stalled at round-off.

    Stalled means: within ``plateau * tol`` and the last norm is not below
    half of the two before it, so adding coefficients would only add noise.
    """
    rho = _rho_from_norms(norms)
    if rho <= tol:
        return True
    if len(norms) < 3 or rho > plateau * tol:
        return False
    return bool(norms[-1] > 0.5 * max(norms[-3], norms[-2]))


class JacobianCache:
    """Sparse LU factors of ``I - h X_s (x) L``, one per (h, k, s)."""

    def __init__(self, system: HamiltonianSystem):
        self.system = system
        self._L = sp.csr_matrix(system.linear_operator)
        self._factors: dict = {}

    def solver(self, h: float, tab: HbvmTableau):
        key = (float(h), tab.k, tab.s)
        lu = self._factors.get(key)
        if lu is None:
            n = tab.s * self.system.dim
            M = sp.identity(n, format="csc") - h * sp.kron(sp.csr_matrix(tab.X), self._L, format="csc")
            lu = splu(M.tocsc())
            self._factors[key] = lu
        return lu


def _pad_guess(guess: GammaSolution | np.ndarray | None, s: int, dim: int) -> np.ndarray:
    if guess is None:
        return np.zeros((s, dim))
    g = guess.gammas if isinstance(guess, GammaSolution) else np.asarray(guess, dtype=float)
    out = np.zeros((s, dim))
    n = min(s, g.shape[0])
    out[:n] = g[:n]
    return out


def solve_gamma(system: HamiltonianSystem, y0: np.ndarray, h: float, tab: HbvmTableau,
                cfg: SolverConfig = SolverConfig(), guess=None,
                cache: JacobianCache | None = None) -> GammaSolution:
    """Solve the gamma-form discrete problem of one step.

    ``iterations`` counts evaluations of the discrete map; LinearNewton on a
    linear problem therefore reports 2 (one correction, one confirming
    evaluation).  The convergence test is on the max-norm of the correction,
    which for FixedPoint equals the raw residual ``gamma - Phi(gamma)``.
    """
    if h == 0:
        raise InvalidParams("step size must be nonzero")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (system.dim,):
        raise InvalidParams(f"state has shape {y0.shape}, system dim is {system.dim}")
    newton = cfg.mode is SolverMode.LINEAR_NEWTON
    if newton:
        lu = (cache or JacobianCache(system)).solver(h, tab)

    W = tab.PsT_Omega
    hIs = h * tab.Is
    gamma = _pad_guess(guess, tab.s, system.dim)
    prev = np.inf
    for it in range(1, cfg.max_iters + 1):
        Y = y0 + hIs @ gamma
        G = gamma - W @ system.rhs(Y)
        delta = lu.solve(G.ravel()).reshape(G.shape) if newton else G
        gamma = gamma - delta
        err = float(np.max(np.abs(delta)))
        scale = cfg.nonlinear_tol * (1.0 + float(np.max(np.abs(gamma))))
        if not np.isfinite(err):
            raise NoConvergence(it, err)
        if err <= scale or (err >= prev and err <= cfg.plateau_factor * scale):
            return GammaSolution(gamma, _rho_from_norms(np.linalg.norm(gamma, axis=1)),
                                 it, True, err)
        prev = err
    raise NoConvergence(cfg.max_iters, err)


def step(system: HamiltonianSystem, y0: np.ndarray, h: float, tab: HbvmTableau,
         cfg: SolverConfig = SolverConfig(), guess=None,
         cache: JacobianCache | None = None) -> tuple[np.ndarray, GammaSolution]:
    sol = solve_gamma(system, y0, h, tab, cfg, guess, cache)
    return np.asarray(y0, dtype=float) + h * sol.gammas[0], sol


@dataclass
class ControllerState:
    """Adaptive choice of ``s``: the (k, s) to use on the next step."""

    s: int
    tol: float
    s_min: int = 2
    s_max: int = 40
    nu: int | None = None
    delta: int = 2
    k: int = field(default=0)
    s_max_hit: bool = False

    def __post_init__(self):
        if not 1 <= self.s_min <= self.s_max:
            raise InvalidParams("need 1 <= s_min <= s_max")
        self.s = min(max(self.s, self.s_min), self.s_max)
        if not self.k:
            self.k = k_rule(self.s, self.nu)


def adaptive_step(system: HamiltonianSystem, y0: np.ndarray, h: float,
                  state: ControllerState, cfg: SolverConfig = SolverConfig(),
                  guess=None, cache: JacobianCache | None = None):
    """Step with the current (k, s), then pick (k, s) for the next step.

    Grows ``s`` when the last gamma is not negligible, shrinks it when the
    truncation two coefficients earlier would already have been enough.
    The current step is never redone.  Returns ``(y1, sol, new_state)``;
    ``sol.s`` is the value actually used.
    """
    tab = build_tableau(state.k, state.s)
    y1, sol = step(system, y0, h, tab, cfg, guess, cache)
    norms = sol.norms
    s = state.s
    hit = False
    if state.tol >= 1.0:
        pass  # every basis is accepted, nothing to adapt
    elif not tail_settled(norms, state.tol):
        if s + state.delta > state.s_max:
            if s < state.s_max:
                s = state.s_max
            else:
                hit = True
                warnings.warn(f"rho_{s} = {sol.rho:.2e} > tol with s at s_max={state.s_max}",
                              SMaxExceeded, stacklevel=2)
        else:
            s += state.delta
    elif s - state.delta >= state.s_min and _rho_from_norms(norms[: s - state.delta]) <= state.tol:
        s -= state.delta
    new = replace(state, s=s, k=k_rule(s, state.nu), s_max_hit=state.s_max_hit or hit)
    return y1, sol, new


def startup_step(system: HamiltonianSystem, y0: np.ndarray, h: float,
                 state: ControllerState, cfg: SolverConfig = SolverConfig(),
                 cache: JacobianCache | None = None):
    """First step of an adaptive run: raise ``s`` until the gammas meet ``tol``.

    Unlike later steps this one is re-solved, so the run starts with a
    basis that is large enough instead of catching up over several
    inaccurate steps.  Returns ``(y1, sol, new_state)`` like ``adaptive_step``.
    """
    guess = None
    while True:
        tab = build_tableau(state.k, state.s)
        try:
            y1, sol = step(system, y0, h, tab, cfg, guess, cache)
        except NoConvergence:
            # a too-small basis can also stall the iteration; treat as rho > tol
            if state.s >= state.s_max:
                raise
            sol = None
        if sol is not None and (tail_settled(sol.norms, state.tol) or state.s >= state.s_max):
            break
        s = min(state.s + state.delta, state.s_max)
        state = replace(state, s=s, k=k_rule(s, state.nu))
        guess = sol if sol is not None else guess
    if not tail_settled(sol.norms, state.tol):
        warnings.warn(f"rho_{state.s} = {sol.rho:.2e} > tol with s at s_max={state.s_max}",
                      SMaxExceeded, stacklevel=2)
        state = replace(state, s_max_hit=True)
    return y1, sol, state


class Integrator:
    """Advances one trajectory with a fixed or adaptive HBVM, warm-starting each step."""

    def __init__(self, system: HamiltonianSystem, cfg: SolverConfig = SolverConfig()):
        self.system = system
        self.cfg = cfg
        self.cache = JacobianCache(system) if cfg.mode is SolverMode.LINEAR_NEWTON else None
        self.last: GammaSolution | None = None

    def step(self, y0, h, tab: HbvmTableau):
        y1, sol = step(self.system, y0, h, tab, self.cfg, self.last, self.cache)
        self.last = sol
        return y1, sol

    def adaptive_step(self, y0, h, state: ControllerState):
        y1, sol, new = adaptive_step(self.system, y0, h, state, self.cfg, self.last, self.cache)
        self.last = sol
        return y1, sol, new

    def startup_step(self, y0, h, state: ControllerState):
        y1, sol, new = startup_step(self.system, y0, h, state, self.cfg, self.cache)
        self.last = sol
        return y1, sol, new
