"""All seventeen 95% intervals for the three worked examples, next to reference values.

The examples are known only through (r, n), so every method is run on the
standardized statistics; Muddapur1 needs the variance ratio of the raw data
and is shown with b = 1 for completeness.

    python scripts/example_intervals.py [--inner-m 100000] [--seed 0]
"""

import argparse

from rhoci import ALL_METHODS, MCConfig, RngStream, compute_all, stats_from_r

EXAMPLES = {
    "example 1": (-0.7786, 16),
    "example 2, grade 4": (0.9755, 11),
    "example 2, grade 8": (0.9738, 11),
}

REFERENCE = {
    "Exact": [(-0.913, -0.447), (0.897, 0.993), (0.890, 0.992)],
    "FisherZ": [(-0.919, -0.461), (0.905, 0.994), (0.899, 0.993)],
    "Hotelling1": [(-0.919, -0.463), (0.862, 0.996), (0.853, 0.996)],
    "Hotelling2": [(-0.919, -0.463), (0.907, 0.994), (0.901, 0.993)],
    "Hotelling3": [(-0.918, -0.465), (0.909, 0.994), (0.903, 0.993)],
    "Hotelling4": [(-0.918, -0.464), (0.909, 0.994), (0.903, 0.993)],
    "Ruben": [(-0.915, -0.440), (0.888, 0.993), (0.881, 0.993)],
    "Muddapur1": [(-0.010, -0.004), (0.899, 0.992), (0.732, 0.897)],
    "Muddapur2": [(-0.920, -0.459), (0.905, 0.993), (0.899, 0.993)],
    "SignedLR": [(-0.912, -0.494), (0.920, 0.993), (0.914, 0.992)],
    "ModifiedSignedLR": [(-0.913, -0.450), (0.909, 0.993), (0.901, 0.992)],
    "KrishnamoorthyGCI": [(-0.913, -0.448), (0.897, 0.993), (0.890, 0.992)],
    "WN1": [(0.067, 0.781), (0.999, 1.000), (0.999, 1.000)],
    "WN2": [(0.037, 0.792), (0.999, 1.000), (0.999, 1.000)],
    "HaddadProvost": [(-0.477, 0.487), (0.981, 0.999), (0.993, 1.000)],
    "NewGCI": [(-0.924, -0.484), (0.919, 0.994), (0.913, 0.994)],
    "PB": [(-0.919, -0.461), (0.906, 0.994), (0.900, 0.993)],
}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--inner-m", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=float, default=0.95)
    args = p.parse_args()

    cfg = MCConfig(args.inner_m, RngStream(args.seed))
    results = [compute_all(stats_from_r(r, n), 1 - args.level, ALL_METHODS, cfg) for r, n in EXAMPLES.values()]
    print(f"{'method':<18}" + "".join(f"{name:>36}" for name in EXAMPLES))
    for m in ALL_METHODS:
        cells = []
        for res, ref in zip(results, REFERENCE[m.value]):
            ci = res[m]
            got = "failed" if isinstance(ci, Exception) else f"{ci.lower:7.3f},{ci.upper:6.3f}"
            cells.append(f"{got:>16} [ref {ref[0]:6.3f},{ref[1]:6.3f}]")
        print(f"{m.value:<18}" + "".join(f"{c:>36}" for c in cells))


if __name__ == "__main__":
    main()
