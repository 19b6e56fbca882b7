"""JSON-compatible dictionaries for polynomials, fluxes, groups and reports.

Rationals are written as ``[num, den]`` pairs and accepted as pairs,
integers or ``"p/q"`` strings.  Only in-memory conversion lives here; the
command line module does the file I/O.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

from .apcore import Frequency, RealBase, TrigPoly
from .errors import InputError
from .flux import NDReport, PiecewiseFlux
from .specgroup import FreqGroup, QBasis, group_generated


def rat_to_json(q) -> list[int]:
    q = Fraction(q)
    return [q.numerator, q.denominator]


def rat_from_json(v) -> Fraction:
    try:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError(v)
            return Fraction(int(v[0]), int(v[1]))
        if isinstance(v, bool) or isinstance(v, float):
            raise ValueError(v)
        return Fraction(v)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"not an exact rational: {v!r}") from exc


def base_to_json(base: RealBase) -> list[str]:
    out = []
    for label, digits in zip(base.labels, base.digits):
        try:
            same = RealBase.parse([label]).digits[0] == digits
        except Exception:
            same = False
        out.append(label if same else digits)
    return out


def base_from_json(items) -> RealBase:
    if items is None:
        return RealBase.rational()
    if not isinstance(items, list) or not all(isinstance(s, (str, int)) for s in items):
        raise InputError("base must be a list of strings")
    return RealBase.parse([str(s) for s in items])


def frequency_to_json(lam: Frequency) -> list[list[int]]:
    return [rat_to_json(c) for c in lam.flat]


def frequency_from_json(v, base: RealBase, n: int) -> Frequency:
    if not isinstance(v, list):
        raise InputError(f"frequency coordinates must be a list, got {v!r}")
    return Frequency.from_flat(base, n, [rat_from_json(c) for c in v])


def trigpoly_to_json(p: TrigPoly) -> dict:
    return {
        "base": base_to_json(p.base),
        "dims": p.dims,
        "terms": [{"coords": frequency_to_json(lam), "re": float(a.real), "im": float(a.imag)}
                  for lam, a in p.terms.items()],
    }


def trigpoly_from_json(d: dict[str, Any]) -> TrigPoly:
    if not isinstance(d, dict) or "terms" not in d:
        raise InputError("polynomial JSON needs a 'terms' list")
    base = base_from_json(d.get("base"))
    n = int(d.get("dims", 1))
    terms: dict[Frequency, complex] = {}
    for t in d["terms"]:
        lam = frequency_from_json(t["coords"], base, n)
        terms[lam] = terms.get(lam, 0) + complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
    p = TrigPoly(base, n, terms)
    # files written from real data carry conjugate pairs; keep the exact flag
    return p._resym(True) if _conjugate_closed(p) else p


def _conjugate_closed(p: TrigPoly) -> bool:
    for lam, a in p.terms.items():
        b = p.terms.get(-lam)
        if b is None or abs(b - a.conjugate()) > 1e-15 * max(1.0, abs(a)):
            return False
    return True


def flux_to_json(phi: PiecewiseFlux) -> dict:
    return {
        "dims": phi.dims,
        "breakpoints": [rat_to_json(b) for b in phi.breakpoints],
        "pieces": [[[rat_to_json(c) for c in comp] for comp in piece] for piece in phi.pieces],
    }


def flux_from_json(d: dict[str, Any]) -> PiecewiseFlux:
    try:
        bps = [rat_from_json(b) for b in d["breakpoints"]]
        pieces = [[[rat_from_json(c) for c in comp] for comp in piece] for piece in d["pieces"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed flux JSON: {exc}") from exc
    phi = PiecewiseFlux(tuple(bps), tuple(tuple(tuple(c) for c in piece) for piece in pieces))
    if "dims" in d and int(d["dims"]) != phi.dims:
        raise InputError(f"flux declares {d['dims']} components but pieces have {phi.dims}")
    return phi


def group_to_json(G: FreqGroup) -> dict:
    return {
        "base": base_to_json(G.base),
        "dims": G.n,
        "generators": [frequency_to_json(g) for g in G.generators()],
    }


def group_from_json(d: dict[str, Any]) -> FreqGroup:
    base = base_from_json(d.get("base"))
    n = int(d.get("dims", 1))
    gens = d.get("generators")
    if gens == "standard":
        # Z^n over the first base value
        gens = [[[int(i == j and k == 0), 1] for j in range(n) for k in range(base.d)] for i in range(n)]
    if not isinstance(gens, list):
        raise InputError("group JSON needs a 'generators' list")
    return group_generated([frequency_from_json(g, base, n) for g in gens], base, n)


def qbasis_to_json(qb: QBasis) -> list[list[list[int]]]:
    return [frequency_to_json(v) for v in qb.vectors]


def nd_report_to_json(r: NDReport) -> dict:
    out: dict[str, Any] = {"verdict": r.verdict, "checked_pieces": list(r.checked_pieces)}
    if r.witness is not None:
        w = r.witness
        out["witness"] = {
            "xi": frequency_to_json(w.xi),
            "xi_real": [float(v) for v in w.xi.real],
            "certificate": list(w.certificate),
            "piece": w.piece,
            "interval": [rat_to_json(w.interval[0]), rat_to_json(w.interval[1])],
            "slope": [rat_to_json(c) for c in w.slope],
            "intercept": [rat_to_json(c) for c in w.intercept],
            "slope_value": w.slope_value,
        }
    return out


__all__ = [
    "rat_to_json", "rat_from_json", "base_to_json", "base_from_json", "frequency_to_json",
    "frequency_from_json", "trigpoly_to_json", "trigpoly_from_json", "flux_to_json",
    "flux_from_json", "group_to_json", "group_from_json", "qbasis_to_json", "nd_report_to_json",
]
