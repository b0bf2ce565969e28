#!/usr/bin/env python3
"""Write the solution-surface data behind the three soliton plots.

Each file is a matrix: first row x (after a nan corner), first column t,
body u(x, t) (|psi|^2 for the NLSE).  Rendering is left to any plotting tool.
"""
import argparse
from pathlib import Path

from hbvm.harness import RunSpec, dump_solution_grid

FIGURES = [
    ("sine_gordon_surface.txt", RunSpec("sine-gordon", "spectral", 100), 1),
    ("nlse_surface.txt", RunSpec("nlse", "spectral", 100), 1),
    ("kdv_surface.txt", RunSpec("kdv", "spectral", 60), 1),
]


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec, stride in FIGURES:
        rep = dump_solution_grid(spec, stride, out / name)
        print(f"{out / name}: e_u={rep.errors.e_u:.2e} s={rep.s}")


if __name__ == "__main__":
    main()
