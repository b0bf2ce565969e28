"""Experiment runner: one (problem, method, n) run, tables with rates, grid dumps."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import (UNIT_ROUNDOFF, ControllerState, InvalidParams, Integrator,
                   NoConvergence, SMaxExceeded, SolverConfig, build_tableau,
                   k_rule)
from .problems import ErrorAccumulator, ErrorReport, get_problem, initial_state

log = logging.getLogger(__name__)

METHODS = ("gauss", "hbvm", "spectral")
CSV_COLUMNS = ["problem", "method", "k", "s", "n", "dt", "e_u", "rate_u", "e_H", "rate_H",
               "e_1", "e_2", "iters_avg", "wall_s"]
QUICK_N = 64

# default step counts per (problem, method); halving sequences
DEFAULT_N = {
    ("sine-gordon", "gauss"): [100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600],
    ("sine-gordon", "hbvm"): [100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600],
    ("sine-gordon", "spectral"): [100, 150, 200],
    ("nlse", "gauss"): [100, 200, 400, 800, 1600, 3200],
    ("nlse", "hbvm"): [100, 200, 400, 800, 1600, 3200],
    ("nlse", "spectral"): [100, 150, 200],
    ("kdv", "gauss"): [60, 120, 240, 480, 960, 1920, 3840, 7680, 15360],
    ("kdv", "hbvm"): [60, 120, 240, 480, 960, 1920, 3840, 7680, 15360],
    ("kdv", "spectral"): [60, 90, 120],
}
# order-6 runs stop one halving earlier, where the error has reached round-off
DEFAULT_N_LAST = {("sine-gordon", 3): 12800, ("nlse", 3): 1600, ("kdv", 3): 7680}


def default_n_list(problem: str, method: str, s: int | None = None, quick: bool = False) -> list[int]:
    name = get_problem(problem).name
    ns = DEFAULT_N[(name, method)]
    if method != "spectral" and s is not None:
        last = DEFAULT_N_LAST.get((name, s))
        if last:
            ns = [n for n in ns if n <= last]
    return ns[:3] if quick else list(ns)


@dataclass
class RunSpec:
    problem: str
    method: str
    n: int
    s: int | None = None
    k: int | None = None
    N: int | None = None
    m: int | None = None
    tol: float | None = None
    s_init: int = 2
    s_max: int = 40
    k_mode: str = "default"  # "default": max(s+2, 20); "poly": exact for polynomial H
    solver: str = "linear-newton"
    nonlinear_tol: float = 1e-14
    max_iters: int = 100
    quick: bool = False

    def __post_init__(self):
        self.problem = get_problem(self.problem).name
        if self.method not in METHODS:
            raise InvalidParams(f"method must be one of {METHODS}, got {self.method!r}")
        if self.n < 1:
            raise InvalidParams("n must be >= 1")
        if self.method == "gauss":
            if self.s is None:
                raise InvalidParams("gauss needs s")
            if self.k not in (None, self.s):
                raise InvalidParams("gauss(s) has k = s")
            self.k = self.s
        elif self.method == "hbvm":
            if self.s is None:
                raise InvalidParams("hbvm needs s")
            if self.k is None:
                self.k = k_rule(self.s, get_problem(self.problem).nu_poly)
        if self.s is not None and self.k is not None and not 1 <= self.s <= self.k <= 64:
            raise InvalidParams(f"need 1 <= s <= k <= 64, got k={self.k}, s={self.s}")
        if self.k_mode not in ("default", "poly"):
            raise InvalidParams("k_mode must be 'default' or 'poly'")
        if self.quick:
            self.N = self.N or QUICK_N
            self.m = self.m or (3 * self.N + 1 if self.problem == "kdv" else 2 * self.N + 1)
        try:
            SolverConfig(self.solver, self.nonlinear_tol, self.max_iters)
        except InvalidParams:
            raise
        except ValueError as exc:  # unknown solver name
            raise InvalidParams(f"solver must be 'fixed-point' or 'linear-newton': {exc}") from exc

    @property
    def label(self) -> str:
        if self.method == "gauss":
            return f"gauss({self.s})"
        if self.method == "hbvm":
            return f"hbvm({self.k},{self.s})"
        return f"spectral(tol={self.resolved_tol:g})"

    @property
    def resolved_tol(self) -> float:
        return self.tol if self.tol is not None else get_problem(self.problem).tol

    @classmethod
    def from_mapping(cls, data: dict) -> "RunSpec":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            key = key.strip().replace("-", "_")
            if key not in known:
                raise InvalidParams(f"unknown spec key {key!r}")
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)


def _coerce(key, value):
    if not isinstance(value, str):
        return value
    value = value.strip()
    if value.lower() in ("", "none"):
        return None
    if key in ("n", "s", "k", "N", "m", "s_init", "s_max", "max_iters"):
        return int(value)
    if key in ("tol", "nonlinear_tol"):
        return float(value)
    if key == "quick":
        return value.lower() in ("1", "true", "yes", "on")
    return value


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@dataclass
class RunReport:
    spec: RunSpec
    errors: ErrorReport
    k: int
    s: int
    s_min: int
    s_final: int
    iters_avg: float
    iters_max: int
    wall_s: float
    initial_residual: float
    u_scale: float
    H_scale: float
    completed: bool = True
    failed_step: int | None = None
    message: str = ""
    s_max_hit: bool = False
    rates: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return get_problem(self.spec.problem).T / self.spec.n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dt"] = self.dt
        return d

    def csv_row(self) -> dict:
        e = self.errors
        return {
            "problem": self.spec.problem, "method": self.spec.label, "k": self.k, "s": self.s,
            "n": self.spec.n, "dt": _fmt(self.dt), "e_u": _fmt(e.e_u),
            "rate_u": self.rates.get("u", ""), "e_H": _fmt(e.e_H), "rate_H": self.rates.get("H", ""),
            "e_1": _fmt(e.e_1), "e_2": _fmt(e.e_2), "iters_avg": f"{self.iters_avg:.2f}",
            "wall_s": f"{self.wall_s:.3f}",
        }


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6e}"


@dataclass
class _Run:
    report: RunReport
    snapshots: list


def _integrate(spec: RunSpec, stride: int | None = None) -> _Run:
    problem = get_problem(spec.problem)
    init = initial_state(problem, spec.N, spec.m)
    system, y = init.system, init.y0.copy()
    cfg = SolverConfig(spec.solver, spec.nonlinear_tol, spec.max_iters)
    integ = Integrator(system, cfg)
    acc = ErrorAccumulator(problem, system, y)
    h = problem.T / spec.n
    x = system.basis.x
    u_scale = float(np.max(np.abs(problem.exact(x, problem.T))))
    u_scale = max(u_scale, float(np.max(np.abs(problem.numerical(system, y)))))

    snapshots = []

    def snap(t, y):
        g = problem.numerical(system, y)
        snapshots.append((t, (g**2).sum(axis=0) if problem.components == 2 else g[0]))

    if stride:
        snap(0.0, y)

    adaptive = spec.method == "spectral"
    if adaptive:
        nu = problem.nu_poly if spec.k_mode == "poly" else None
        state = ControllerState(s=spec.s or spec.s_init, tol=spec.resolved_tol,
                                s_max=spec.s_max, nu=nu)
    else:
        tab = build_tableau(spec.k, spec.s)

    s_used, k_used, iters = [], [], []
    completed, failed, message, hit = True, None, "", False
    t0 = time.perf_counter()
    # a diverging iteration overflows before NoConvergence is raised
    with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
        warnings.simplefilter("ignore", SMaxExceeded)
        for i in range(spec.n):
            try:
                if adaptive:
                    k_now = state.k
                    stepper = integ.startup_step if i == 0 else integ.adaptive_step
                    y_new, sol, state = stepper(y, h, state)
                    if i == 0:
                        k_now = state.k if sol.s == state.s else k_rule(sol.s, state.nu)
                    hit = hit or state.s_max_hit
                else:
                    k_now = tab.k
                    y_new, sol = integ.step(y, h, tab)
            except NoConvergence as exc:
                exc.step_index = i + 1
                completed, failed, message = False, i + 1, str(exc)
                log.warning("%s %s n=%d: %s", spec.problem, spec.label, spec.n, message)
                break
            y = y_new
            s_used.append(sol.s)
            k_used.append(k_now)
            iters.append(sol.iterations)
            t = (i + 1) * h
            acc.update(t, y)
            if stride and ((i + 1) % stride == 0 or i + 1 == spec.n):
                snap(t, y)
    wall = time.perf_counter() - t0

    if s_used:
        top = int(np.argmax(s_used))
        k_sel, s_sel = k_used[top], s_used[top]
        s_min, s_final = min(s_used), s_used[-1]
    else:
        k_sel = spec.k or 0
        s_sel = s_min = s_final = spec.s or 0
    report = RunReport(
        spec=spec, errors=acc.report, k=k_sel, s=s_sel, s_min=s_min, s_final=s_final,
        iters_avg=float(np.mean(iters)) if iters else 0.0,
        iters_max=int(max(iters)) if iters else 0, wall_s=wall,
        initial_residual=init.residual, u_scale=u_scale, H_scale=abs(acc.H0),
        completed=completed, failed_step=failed, message=message, s_max_hit=hit,
    )
    return _Run(report, snapshots)


def run(spec: RunSpec) -> RunReport:
    """Integrate over ``n`` uniform steps; convergence failures are reported, not raised.

    For spectral runs ``k``/``s`` are the largest pair used (the basis the
    controller needed on the hardest step); ``s_min``/``s_final`` complete
    the summary.
    """
    return _integrate(spec).report


PLATEAU_ULPS = 100.0


def plateau_floor(scale: float) -> float:
    """Round-off floor of a quantity of magnitude ``scale``."""
    return PLATEAU_ULPS * UNIT_ROUNDOFF * max(scale, 1.0)


def rate_cell(e_coarse, e_fine, n_coarse, n_fine, floor) -> str:
    """Observed order between two runs, or ``**`` once the error has stopped improving."""
    if e_coarse is None or e_fine is None or e_coarse <= 0 or e_fine <= 0:
        return "**"
    if e_fine >= e_coarse or e_fine <= 10.0 * floor:
        return "**"
    r = math.log2(e_coarse / e_fine) / math.log2(n_fine / n_coarse)
    return f"{r:.1f}"


def attach_rates(reports: list[RunReport]) -> list[RunReport]:
    for r in reports:
        r.rates = {"u": "---", "H": "---"}
    for prev, cur in zip(reports, reports[1:]):
        if not (prev.completed and cur.completed):
            cur.rates = {"u": "", "H": ""}
            continue
        pn, cn = prev.spec.n, cur.spec.n
        cur.rates = {
            "u": rate_cell(prev.errors.e_u, cur.errors.e_u, pn, cn, plateau_floor(cur.u_scale)),
            "H": rate_cell(prev.errors.e_H, cur.errors.e_H, pn, cn, plateau_floor(cur.H_scale)),
        }
    return reports


def run_table(problem: str, method: str, n_list: list[int], jobs: int = 1, **overrides) -> list[RunReport]:
    """One run per ``n`` (ascending), with rates between consecutive rows."""
    if list(n_list) != sorted(n_list):
        raise InvalidParams("n list must be ascending")
    specs = [RunSpec(problem=problem, method=method, n=n, **overrides) for n in n_list]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(jobs) as pool:
            reports = list(pool.map(run, specs))
    else:
        reports = [run(sp) for sp in specs]
    return attach_rates(reports)


def write_csv(reports: list[RunReport], out=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text


def write_json(reports: list[RunReport], out=None) -> str:
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload[0] if len(payload) == 1 else payload, indent=2, default=str)
    if out is not None:
        Path(out).write_text(text + "\n", encoding="utf-8")
    return text


def dump_solution_grid(spec: RunSpec, stride: int, out) -> RunReport:
    """Write ``u(x_i, t_n)`` (``u^2 + v^2`` for the NLSE) every ``stride`` steps.

    First row: ``nan`` then the x grid; each further row: t then the values.
    """
    if stride < 1:
        raise InvalidParams("stride must be >= 1")
    result = _integrate(spec, stride)
    problem = get_problem(spec.problem)
    x = problem.basis(spec.N, spec.m).x
    table = np.empty((len(result.snapshots) + 1, len(x) + 1))
    table[0, 0] = np.nan
    table[0, 1:] = x
    for row, (t, vals) in enumerate(result.snapshots, 1):
        table[row, 0] = t
        table[row, 1:] = vals
    try:
        np.savetxt(out, table, fmt="%.16e", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write grid to {out}: {exc}") from exc
    return result.report


def load_grid(path):
    """Inverse of ``dump_solution_grid``: returns ``(t, x, values)``."""
    table = np.loadtxt(path)
    return table[1:, 0], table[0, 1:], table[1:, 1:]
