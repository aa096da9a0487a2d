"""Density of states near zero for random hopping chains, with the log fit.

    python3 scripts/log_singularity.py --size 1000000 --samples 20 --seed 1 --out dos.csv
"""

import argparse
import time

from specden.hopping import decade_grid, dos_window, fit_log_exponent, law_name, parse_law
from specden.output import write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--law", default="trig3")
    ap.add_argument("--size", type=int, default=10 ** 6)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--first", type=float, default=1e-1)
    ap.add_argument("--last", type=float, default=1e-8)
    ap.add_argument("--out")
    args = ap.parse_args()

    law = parse_law(args.law)
    t = time.perf_counter()
    est = dos_window(law, args.size, args.samples, decade_grid(args.first, args.last), args.seed)
    print(f"{law_name(law)}: n={args.size} samples={args.samples} seed={args.seed} "
          f"({time.perf_counter() - t:.1f} s)")
    print(f"{'eps':>8} {'mu_hat':>12} {'stderr':>10}")
    for e, m, s in zip(est.epsilons, est.mu_hat, est.stderr):
        print(f"{e:8.0e} {m:12.5e} {s:10.2e}")
    if args.out:
        write_csv(args.out, est.rows())

    fit = fit_log_exponent(est)
    print(f"\nalpha = {fit.alpha:.3f}  R^2 = {fit.r_squared:.5f}"
          f"{'  (poor fit)' if fit.poor else ''}")
    for eta, ratios in fit.power_ratios.items():
        trend = "increasing" if fit.power_trend[eta] else "not increasing"
        print(f"mu/eps^{eta}: {trend}  " + " ".join(f"{r:.4g}" for r in ratios))


if __name__ == "__main__":
    main()
