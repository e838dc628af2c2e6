"""Coverage and mean-length curves under the bivariate normal, as tidy CSV.

Writes ``{prefix}_n{n}_coverage.csv`` and ``{prefix}_n{n}_length.csv`` for
each n over rho = 0, 0.1, ..., 0.9, plus a monotonicity summary of the
lengths. Equivalent to ``rhoci figure``; see the README for a plotting recipe.

    python scripts/coverage_curves.py --prefix out/fig --reps 2000
"""

import argparse
import os
import sys

import numpy as np

from rhoci.cli import main as cli_main


def summarize(prefix, ns):
    lengths = {}
    for n in ns:
        data = np.genfromtxt(f"{prefix}_n{n}_length.csv", delimiter=",", names=True, dtype=None, encoding="utf-8")
        for rho, method, value in data:
            lengths.setdefault(method, {})[(n, float(rho))] = float(value)
    for method, cells in lengths.items():
        rhos = sorted({rho for _, rho in cells})
        in_n = all(np.all(np.diff([cells[n, rho] for n in ns]) < 0) for rho in rhos)
        in_rho = all(np.all(np.diff([cells[n, rho] for rho in rhos]) <= 0) for n in ns)
        print(f"{method:<18} shorter with n: {in_n!s:<5}  shorter with rho: {in_rho}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--prefix", default="figure")
    p.add_argument("--n", default="5,10,15,20")
    p.add_argument("--reps", type=int, default=2_000)
    p.add_argument("--inner-m", type=int, default=2_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = p.parse_args()

    code = cli_main(["figure", "--n", args.n, "--reps", str(args.reps), "--inner-m", str(args.inner_m),
                     "--seed", str(args.seed), "--threads", str(args.threads), "--out", args.prefix])
    if code:
        sys.exit(code)
    summarize(args.prefix, [int(x) for x in args.n.split(",")])


if __name__ == "__main__":
    main()
