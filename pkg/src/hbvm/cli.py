"""Command line entry point: ``hbvm run|table|grid``."""
from __future__ import annotations

import argparse
import logging
import sys

from .core import InvalidParams
from .harness import (RunSpec, dump_solution_grid, default_n_list, read_config,
                      run, run_table, write_csv, write_json)

EXIT_OK, EXIT_INVALID, EXIT_NOCONV = 0, 2, 3

SPEC_KEYS = ("problem", "method", "s", "k", "N", "m", "tol", "s_init", "s_max", "k_mode",
             "solver", "nonlinear_tol", "max_iters", "quick")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--problem", choices=["sine-gordon", "nlse", "kdv"])
    common.add_argument("--method", choices=["gauss", "hbvm", "spectral"])
    common.add_argument("--s", type=int, help="gauss/hbvm: s; spectral: initial s")
    common.add_argument("--k", type=int, help="hbvm: quadrature nodes (default from s)")
    common.add_argument("--N", type=int, help="Fourier modes (default per problem)")
    common.add_argument("--m", type=int, help="grid intervals (default per problem)")
    common.add_argument("--tol", type=float, help="spectral controller tolerance")
    common.add_argument("--s-init", type=int, dest="s_init")
    common.add_argument("--s-max", type=int, dest="s_max")
    common.add_argument("--k-mode", choices=["default", "poly"], dest="k_mode")
    common.add_argument("--solver", choices=["fixed-point", "linear-newton"])
    common.add_argument("--nonlinear-tol", type=float, dest="nonlinear_tol")
    common.add_argument("--max-iters", type=int, dest="max_iters")
    common.add_argument("--quick", action="store_true", default=None,
                        help="N=64 and short n lists, for smoke runs")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hbvm", description="HBVM Fourier-space soliton benchmarks")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="one run, errors and cost")
    r.add_argument("--n", type=int, required=True, help="number of time steps")
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    t = sub.add_parser("table", parents=[common], help="runs over several n, with rates")
    t.add_argument("--n", type=int, nargs="+", help="step counts (default: the standard list for the problem)")
    t.add_argument("--format", choices=["csv", "json"], default="csv")
    t.add_argument("--jobs", type=int, default=1)
    g = sub.add_parser("grid", parents=[common], help="dump the numerical solution on the grid")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--stride", type=int, default=1, help="write every stride-th step")
    return p


def _spec_kwargs(args) -> dict:
    data = read_config(args.config) if args.config else {}
    data = {k.replace("-", "_"): v for k, v in data.items()}
    for key in SPEC_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    for key in ("problem", "method"):
        if key not in data:
            raise InvalidParams(f"--{key} is required")
    data.pop("n", None)
    return data


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        kw = _spec_kwargs(args)
        if args.command == "run":
            reports = [run(RunSpec.from_mapping({**kw, "n": args.n}))]
        elif args.command == "table":
            probe = RunSpec.from_mapping({**kw, "n": 1})
            n_list = args.n or default_n_list(probe.problem, probe.method, probe.s, bool(probe.quick))
            spec_kw = {k: v for k, v in vars(RunSpec.from_mapping({**kw, "n": 1})).items()
                       if k not in ("problem", "method", "n")}
            reports = run_table(probe.problem, probe.method, sorted(n_list), jobs=args.jobs, **spec_kw)
        else:
            if args.out is None:
                raise InvalidParams("grid needs --out")
            reports = [dump_solution_grid(RunSpec.from_mapping({**kw, "n": args.n}),
                                          args.stride, args.out)]
    except (InvalidParams, KeyError, ValueError) as exc:
        print(f"hbvm: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"hbvm: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.command != "grid":
        writer = write_json if args.format == "json" else write_csv
        _emit(writer(reports, args.out), args.out)
    failed = [r for r in reports if not r.completed]
    for r in failed:
        print(f"hbvm: {r.spec.label} n={r.spec.n}: no convergence at step {r.failed_step}: "
              f"{r.message}", file=sys.stderr)
    return EXIT_NOCONV if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
