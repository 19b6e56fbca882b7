"""When the flux is affine along a direction of the data, nothing decays.

The flux ``phi(u) = (u^2/2, u)`` is genuinely nonlinear in its first
component only.  For data depending on ``x_2`` alone the equation reduces
to ``u_t + u_{x_2} = 0``: the profile just travels, so its mean deviation
stays put.  The non-degeneracy check finds the offending direction
``xi = (0, 1)``, the traveling wave gives the exact ``D(t)``, and the
scheme's ``D(5)`` creeps up towards ``D(0)`` as the grid is refined
(the shrinking gap is numerical diffusion, not decay).

    python demos/degenerate_flux.py
"""

from fractions import Fraction

from bohrlaw import Frequency, PiecewiseFlux, RunConfig, TrigPoly, group_generated, nd_check
from bohrlaw.apcore import rational_base
from bohrlaw.diagnostics import decay_experiment


def unit(i):
    return Frequency.from_flat(rational_base(), 2, [int(i == j) for j in range(2)])


def main():
    phi = PiecewiseFlux.polynomial([0, 0, Fraction(1, 2)], [0, 1])
    G = group_generated([unit(0), unit(1)])
    report = nd_check(phi, G)
    w = report.witness
    print(f"non-degeneracy {report.verdict}: xi = {[float(v) for v in w.xi.real]}, "
          f"xi.phi(u) = {w.slope_value:g} u + const on {[float(v) for v in w.interval]}")

    # data along the witness only: the other direction is irrelevant
    print("for comparison, over the first axis alone:", nd_check(phi, group_generated([unit(0)])).verdict)

    v = decay_experiment(phi, G, TrigPoly.sin(unit(1)), RunConfig(grid=256, T=5.0),
                         refinement=(256, 512, 1024), sample_times=[1.0, 5.0, 10.0])
    print(f"verdict: {v.verdict}")
    for t, d in v.exact:
        print(f"  exact D({t:g}) = {d:.12f}")
    for N, d in v.refinement:
        print(f"  scheme N={N:5d}: D(5) = {d:.4f}")


if __name__ == "__main__":
    main()
