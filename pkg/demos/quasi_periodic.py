"""Decay of quasi-periodic data through the torus lift.

``u0(x) = sin(2 pi x) + sin(2 pi sqrt(2) x)`` never repeats on the line, but
it is the trace of ``U(theta) = sin(2 pi theta_1) + sin(2 pi theta_2)``
along the direction ``(1, sqrt 2)``.  Solving on the 2-torus with fluxes
``psi_1 = u^2/2`` and ``psi_2 = sqrt(2) u^2/2`` gives the solution on the
whole line at once.  Burgers is non-degenerate on the frequency group, so
``D(t)`` falls; the values along ``x`` are read back by interpolation.

    python demos/quasi_periodic.py [--grid 128] [--T 2]
"""

import argparse

import numpy as np

from bohrlaw import Frequency, LiftSpec, PiecewiseFlux, RealBase, RunConfig, TrigPoly, solve
from bohrlaw.diagnostics import decay_trace
from bohrlaw.solver import restrict_to_line


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--T", type=float, default=2.0)
    args = ap.parse_args()

    B = RealBase.parse(["1", "sqrt2"])
    a, b = Frequency.scalar(1, base=B), Frequency.scalar(0, 1, base=B)
    p = TrigPoly.sin(a) + TrigPoly.sin(b)
    lift = LiftSpec.for_poly(p)
    print(f"torus dimension {lift.m}, basis {[float(v.real[0]) for v in lift.vectors]}")

    rec = solve(p, lift, PiecewiseFlux.burgers(), RunConfig(grid=args.grid, T=args.T,
                                                             snapshots=(0.25, 0.5, 1.0), entropy_k=8))
    tr = decay_trace(rec)
    for snap in rec.snapshots:
        print(f"t={snap.t:5.2f}  D={tr.at(snap.t):.5f}  range=[{snap.values.min():+.4f}, {snap.values.max():+.4f}]")
    x = np.linspace(0, 10, 6)
    print("u(T, x) at x =", x)
    print("   ", np.round(restrict_to_line(rec.final, lift, x), 4))


if __name__ == "__main__":
    main()
