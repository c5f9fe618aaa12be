"""Phase diagram over the default (gamma, v) grid, printed as tables.

    python3 scripts/phase_diagram.py --workers 4

Each cell shows the labels with their counts; the second table shows the dominant saddle,
with '*' where it changes before the next v.
"""
import argparse
import time

from syksd.sweep import SweepSpec, phase_diagram


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--J", type=float, default=5.0)
    args = ap.parse_args()

    spec = SweepSpec(J=args.J)
    t0 = time.time()
    pts = phase_diagram(spec, workers=args.workers)
    cell = {(p.gamma, p.v): p for p in pts}
    vs = spec.v_values
    header = "gamma " + "".join(f"{v:>10g}" for v in vs)

    print("solutions (label followed by count)")
    print(header)
    for g in sorted(spec.gamma_values, reverse=True):
        row = []
        for v in vs:
            labels = sorted(r.label.label.value for r in cell[g, v].records)
            row.append(",".join(f"{l}{labels.count(l)}" for l in sorted(set(labels))) or "-")
        print(f"{g:5g} " + "".join(f"{c:>10}" for c in row))

    print("\ndominant")
    print(header)
    for g in sorted(spec.gamma_values, reverse=True):
        row = [
            (cell[g, v].dominant.value if cell[g, v].dominant else "-") + ("*" if cell[g, v].dominance_switch else "")
            for v in vs
        ]
        print(f"{g:5g} " + "".join(f"{c:>10}" for c in row))
    print(f"\n{time.time() - t0:.0f}s")


if __name__ == "__main__":
    main()
