#!/usr/bin/env python3
"""Regenerate the convergence and spectral tables as CSV files.

    python scripts/reproduce_tables.py --out results            # full size
    python scripts/reproduce_tables.py --out results --quick    # smoke run
    python scripts/reproduce_tables.py --only kdv
"""
import argparse
import logging
from pathlib import Path

from hbvm.harness import default_n_list, run_table, write_csv

# (file stem, problem, method, s, k); k=None picks the default for the problem
TABLES = [
    ("sg_gauss", "sine-gordon", "gauss", [1, 2, 3], None),
    ("sg_hbvm", "sine-gordon", "hbvm", [(5, 1), (6, 2), (6, 3)], None),
    ("sg_spectral", "sine-gordon", "spectral", [None], None),
    ("nlse_gauss", "nlse", "gauss", [1, 2, 3], None),
    ("nlse_hbvm", "nlse", "hbvm", [(2, 1), (4, 2), (6, 3)], None),
    ("nlse_spectral", "nlse", "spectral", [None], None),
    ("kdv_gauss", "kdv", "gauss", [1, 2, 3], None),
    ("kdv_hbvm", "kdv", "hbvm", [(2, 1), (3, 2), (5, 3)], None),
    ("kdv_spectral", "kdv", "spectral", [None], None),
]


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--out", default="results")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", help="problem name or table stem to restrict to")
    p.add_argument("--max-iters", type=int, default=500,
                   help="coarse KdV steps need a few hundred iterations for the low orders")
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for stem, problem, method, variants, _ in TABLES:
        if args.only and args.only not in (stem, problem):
            continue
        reports = []
        for v in variants:
            k, s = (v if isinstance(v, tuple) else (v, v))
            if method == "spectral":
                k = s = None
            ns = default_n_list(problem, method, s, args.quick)
            kw = dict(s=s, quick=args.quick, max_iters=args.max_iters)
            if method == "hbvm":
                kw["k"] = k
            logging.info("%s %s s=%s n=%s", problem, method, s, ns)
            reports += run_table(problem, method, ns, jobs=args.jobs, **kw)
        path = out / f"{stem}.csv"
        write_csv(reports, path)
        logging.info("wrote %s", path)


if __name__ == "__main__":
    main()
