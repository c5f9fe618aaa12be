"""Distinct saddles at one (v, gamma) point with their labels, actions and stationarity.

    python3 scripts/solve_point.py --v 1 --gamma 4
"""
import argparse
import time

from syksd.sweep import SweepSpec, solve_point


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--v", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=4.0)
    ap.add_argument("--J", type=float, default=5.0)
    ap.add_argument("--seeds", type=int, default=8)
    args = ap.parse_args()

    spec = SweepSpec(J=args.J, seeds_per_point=args.seeds)
    t0 = time.time()
    records = solve_point(spec.params(args.v, args.gamma), spec)
    print(f"v={args.v} gamma={args.gamma} J={args.J}: {len(records)} solutions in {time.time() - t0:.0f}s")
    print(f"{'label':>5} {'|G|':>8} {'Re S':>12} {'Im S':>10} {'stationarity':>12} {'Gamma_pp':>9} {'Omega_pp':>9}")
    for r in records:
        fit = r.fits[0]
        gamma_pp = f"{fit.decay_rate:9.4f}" if fit else f"{'-':>9}"
        omega_pp = f"{fit.frequency:9.4f}" if fit and fit.frequency else f"{'-':>9}"
        s = r.action.density
        print(f"{r.label.label.value:>5} {r.G.norm():8.3f} {s.real:12.5f} {s.imag:10.2e} {r.stationarity:12.2e} {gamma_pp} {omega_pp}")


if __name__ == "__main__":
    main()
