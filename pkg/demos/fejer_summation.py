"""Bochner-Fejer summation of a trigonometric polynomial.

The Fejer means damp each spectral line by a product of triangle weights
computed from the line's coordinates in a rational basis.  Raising the
order ``r`` widens the triangles, so the mean L1 distance to the original
polynomial shrinks, while the sup norm never grows.

    python demos/fejer_summation.py
"""

from fractions import Fraction

from bohrlaw import Frequency, LiftSpec, RealBase, TrigPoly
from bohrlaw.apcore import besicovitch_norm, ess_sup
from bohrlaw.fejer import FejerPlan, bochner_fejer, fejer_weights
from bohrlaw.specgroup import QBasis


def main():
    B = RealBase.parse(["1", "sqrt2"])
    a, b = Frequency.scalar(1, base=B), Frequency.scalar(0, 1, base=B)
    mid = Frequency.scalar(Fraction(1, 2), Fraction(1, 2), base=B)
    p = TrigPoly.cos(a) + TrigPoly.sin(b, amp=0.7) + TrigPoly.cos(mid, amp=0.5)
    qb = QBasis([a, b])
    lift = LiftSpec.for_poly(p)
    print(f"sup |p| = {ess_sup(p, lift):.4f}")
    print(f"{'r':>2} {'w(1)':>8} {'w((1+sqrt2)/2)':>15} {'N1(sigma_r p - p)':>18} {'sup|sigma_r p|':>15}")
    for r in range(1, 6):
        plan = FejerPlan(qb, r)
        W = fejer_weights(plan)
        s = bochner_fejer(p, plan)
        print(f"{r:2d} {float(W.at(a)):8.4f} {float(W.at(mid)):15.4f} "
              f"{besicovitch_norm(s - p, lift, grid=512):18.4f} {ess_sup(s, lift):15.4f}")


if __name__ == "__main__":
    main()
