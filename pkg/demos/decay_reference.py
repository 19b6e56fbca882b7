"""Burgers' equation with periodic data relaxes to its mean.

Starting from ``u0 = sin(2 pi x)`` the solution steepens into a sawtooth
with one shock per period.  A sawtooth of slope ``1/t`` has mean deviation
``1/(4t)``, so ``D(t) = mean|u - mean u0|`` should approach that curve.
This script prints ``D(t)`` next to the asymptotic value and, with
``--reference``, repeats the run on a fine grid (this produces the frozen
reference number used by the acceptance suite).

    python demos/decay_reference.py [--grid 1024] [--reference]
"""

import argparse
import time

from bohrlaw import Frequency, LiftSpec, PiecewiseFlux, RunConfig, TrigPoly, solve
from bohrlaw.diagnostics import decay_trace


def run(grid: int, T: float, entropy_k: int):
    t0 = time.perf_counter()
    rec = solve(TrigPoly.sin(1), LiftSpec([Frequency.scalar(1)]), PiecewiseFlux.burgers(),
                RunConfig(grid=grid, T=T, snapshots=(0.5, 1, 2, 5), entropy_k=entropy_k))
    return rec, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--T", type=float, default=10.0)
    ap.add_argument("--reference", action="store_true", help="also run N=8192 without the entropy check")
    args = ap.parse_args()

    rec, secs = run(args.grid, args.T, 32)
    tr = decay_trace(rec)
    print(f"N={args.grid}: {len(tr) - 1} steps in {secs:.1f}s")
    print(f"{'t':>6} {'D(t)':>10} {'1/(4t)':>10}")
    for snap in rec.snapshots:
        t = snap.t
        print(f"{t:6.2f} {tr.at(t):10.6f} {'' if t == 0 else f'{1 / (4 * t):10.6f}'}")
    print(f"D(T)/D(0) = {tr.ratio:.4f}, mass drift {tr.mass_drift():.1e}, "
          f"worst entropy residual {max(tr.entropy[1:]):.1e}")

    if args.reference:
        ref, secs = run(8192, args.T, 0)
        print(f"reference N=8192: D({args.T:g}) = {ref.steps[-1].D:.7f} ({secs:.1f}s)")


if __name__ == "__main__":
    main()
