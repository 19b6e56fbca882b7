"""Piecewise polynomial flux vectors and the linear non-degeneracy test.

A flux is continuous on ``[u_0, u_K]`` and polynomial with rational
coefficients on each ``[u_{i-1}, u_i]``.  For a frequency group ``G`` the
non-degeneracy condition asks that ``u -> xi.phi(u)`` is affine on no
interval for every nonzero ``xi`` in ``G``.  Any interval contains a
sub-interval inside one piece, so the test reduces to: does some piece
admit a nonzero ``xi`` in ``G`` killing all of that piece's degree >= 2
coefficients?  That is an integer kernel computation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .apcore import Frequency, TrigPoly, evaluate
from .errors import ContinuityError, DomainError, InputError
from .specgroup import FreqGroup, hnf, integer_kernel

log = logging.getLogger(__name__)

RATIONALIZE_DENOMINATOR = 10**6


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (list, tuple)):
        return Fraction(int(x[0]), int(x[1]))
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def _poly_at(coefs: Sequence[Fraction], u: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coefs):
        acc = acc * u + c
    return acc


def _trim(coefs):
    coefs = list(coefs)
    while len(coefs) > 1 and coefs[-1] == 0:
        coefs.pop()
    return tuple(coefs)


def _real_roots(coefs: np.ndarray, a: float, b: float) -> list[float]:
    """Real roots of an ascending float polynomial inside ``[a, b]`` (Newton-polished)."""
    c = np.trim_zeros(np.asarray(coefs, dtype=float), "b")
    if len(c) <= 1:
        return []
    r = np.roots(c[::-1])
    out = []
    d = np.polynomial.polynomial.polyder(c)
    for z in r:
        if abs(z.imag) > 1e-9 * max(1.0, abs(z.real)):
            continue
        x = z.real
        for _ in range(4):
            dv = np.polynomial.polynomial.polyval(x, d)
            if dv == 0:
                break
            x -= np.polynomial.polynomial.polyval(x, c) / dv
        if a - 1e-12 <= x <= b + 1e-12:
            out.append(min(max(x, a), b))
    return out


def poly_abs_max(coefs, a: float, b: float) -> float:
    """``max |q|`` on ``[a, b]`` for an ascending float polynomial ``q``."""
    c = np.asarray(coefs, dtype=float)
    pts = [a, b] + _real_roots(np.polynomial.polynomial.polyder(c), a, b) if len(c) > 1 else [a, b]
    return float(np.max(np.abs(np.polynomial.polynomial.polyval(np.array(pts), c))))


@dataclass(frozen=True)
class PiecewiseFlux:
    """Continuous piecewise polynomial map ``R -> R^n`` with rational coefficients.

    ``pieces[i][c]`` holds the ascending coefficients of component ``c`` on
    ``[breakpoints[i], breakpoints[i+1]]``.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[tuple[tuple[Fraction, ...], ...], ...]

    def __post_init__(self):
        bps = tuple(_fr(b) for b in self.breakpoints)
        pcs = tuple(tuple(_trim(_fr(c) for c in comp) for comp in piece) for piece in self.pieces)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pcs)
        if len(bps) < 2 or any(b <= a for a, b in zip(bps, bps[1:])):
            raise InputError("breakpoints must be strictly increasing, at least two")
        if len(pcs) != len(bps) - 1:
            raise InputError("need exactly one polynomial piece per interval")
        dims = {len(p) for p in pcs}
        if len(dims) != 1 or 0 in dims:
            raise InputError("all pieces must have the same positive number of components")
        for i in range(1, len(pcs)):
            u = bps[i]
            for c in range(self.dims):
                left, right = _poly_at(pcs[i - 1][c], u), _poly_at(pcs[i][c], u)
                if left != right:
                    raise ContinuityError(
                        f"component {c} jumps at breakpoint {u}: {left} != {right}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def polynomial(cls, *components, domain=(-10, 10)) -> "PiecewiseFlux":
        """Single-piece flux; each component is an ascending coefficient list."""
        return cls((domain[0], domain[1]), (tuple(tuple(c) for c in components),))

    @classmethod
    def burgers(cls, domain=(-10, 10)) -> "PiecewiseFlux":
        return cls.polynomial([0, 0, Fraction(1, 2)], domain=domain)

    @classmethod
    def linear(cls, c=1, domain=(-10, 10)) -> "PiecewiseFlux":
        return cls.polynomial([0, c], domain=domain)

    @classmethod
    def cubic(cls, domain=(-10, 10)) -> "PiecewiseFlux":
        return cls.polynomial([0, 0, 0, Fraction(1, 3)], domain=domain)

    @classmethod
    def from_floats(cls, breakpoints, pieces, max_denominator: int = RATIONALIZE_DENOMINATOR):
        """Rationalize float coefficients (denominators <= ``max_denominator``)."""
        log.warning("rationalizing float flux coefficients with denominator bound %d", max_denominator)
        q = lambda v: Fraction(v).limit_denominator(max_denominator)  # noqa: E731
        return cls(tuple(q(b) for b in breakpoints),
                   tuple(tuple(tuple(q(c) for c in comp) for comp in piece) for piece in pieces))

    # -- queries --------------------------------------------------------------
    @property
    def dims(self) -> int:
        return len(self.pieces[0])

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    def piece_index(self, u) -> np.ndarray:
        inner = np.array([float(b) for b in self.breakpoints[1:-1]])
        return np.searchsorted(inner, np.asarray(u, dtype=float), side="right")

    def __call__(self, u) -> np.ndarray:
        """Values ``(..., n)``; end pieces extend polynomially outside the domain."""
        u = np.asarray(u, dtype=float)
        idx = self.piece_index(u)
        out = np.zeros(u.shape + (self.dims,))
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if not mask.any():
                continue
            for c, coefs in enumerate(piece):
                out[..., c] = np.where(mask, np.polynomial.polynomial.polyval(u, [float(v) for v in coefs]),
                                       out[..., c])
        return out

    def exact(self, u) -> tuple[Fraction, ...]:
        u = _fr(u)
        i = int(self.piece_index(float(u)))
        return tuple(_poly_at(c, u) for c in self.pieces[i])

    def overlapping_pieces(self, a, b) -> list[int]:
        """Pieces whose interval meets ``(a, b)`` in a set with nonempty interior."""
        a, b = _fr(a), _fr(b)
        return [i for i in range(len(self.pieces))
                if min(b, self.breakpoints[i + 1]) > max(a, self.breakpoints[i])]

    def check_range(self, a, b):
        lo, hi = self.domain
        if _fr(a) < lo or _fr(b) > hi or _fr(a) > _fr(b):
            raise DomainError(f"[{a}, {b}] is not inside the flux domain [{lo}, {hi}]")


def lipschitz_constant(phi: PiecewiseFlux, a, b) -> list[float]:
    """Per-component ``max |phi_i'|`` over ``[a, b]`` (endpoints and critical points)."""
    phi.check_range(a, b)
    a_f, b_f = float(a), float(b)
    L = [0.0] * phi.dims
    for i in phi.overlapping_pieces(a, b) or [int(phi.piece_index(a_f))]:
        lo = max(a_f, float(phi.breakpoints[i]))
        hi = min(b_f, float(phi.breakpoints[i + 1]))
        for c, coefs in enumerate(phi.pieces[i]):
            d = np.polynomial.polynomial.polyder([float(v) for v in coefs]) if len(coefs) > 1 else [0.0]
            L[c] = max(L[c], poly_abs_max(d, lo, hi))
    return L


# ---------------------------------------------------------------------------
# Non-degeneracy


@dataclass(frozen=True)
class NDWitness:
    """Nonzero ``xi`` in the group with ``xi.phi`` affine on piece ``piece``.

    ``slope``/``intercept`` are coordinates over the real base of the
    affine map ``xi.phi(u) = slope*u + intercept`` on that piece.
    """

    xi: Frequency
    certificate: tuple[int, ...]
    piece: int
    interval: tuple[Fraction, Fraction]
    slope: tuple[Fraction, ...]
    intercept: tuple[Fraction, ...]

    @property
    def slope_value(self) -> float:
        return float(sum(float(c) * b for c, b in zip(self.slope, self.xi.base.values)))


@dataclass(frozen=True)
class NDReport:
    holds: bool
    witness: NDWitness | None = None
    checked_pieces: tuple[int, ...] = field(default=())

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"


def _dot_coeffs(xi: Frequency, piece, degree: int) -> tuple[Fraction, ...]:
    """Base coordinates of the ``degree`` coefficient of ``xi.phi`` on one piece."""
    d = xi.base.d
    out = [Fraction(0)] * d
    for i, row in enumerate(xi.coords):
        coefs = piece[i]
        c = coefs[degree] if degree < len(coefs) else Fraction(0)
        if c:
            for k in range(d):
                out[k] += row[k] * c
    return tuple(out)


def affine_on_piece(phi: PiecewiseFlux, xi: Frequency, piece: int) -> bool:
    """Exact test: every degree >= 2 coefficient of ``xi.phi`` vanishes on ``piece``."""
    pc = phi.pieces[piece]
    deg = max(len(c) for c in pc)
    return all(not any(_dot_coeffs(xi, pc, k)) for k in range(2, deg))


def _constraint_matrix(phi: PiecewiseFlux, G: FreqGroup, piece: int) -> list[list[int]]:
    """Integer rows ``A`` with ``A m = 0`` iff ``xi = sum m_j g_j / D`` is affine on ``piece``."""
    d, n = G.base.d, G.n
    pc = phi.pieces[piece]
    deg = max(len(c) for c in pc)
    rows = []
    for k in range(2, deg):
        for b in range(d):
            # coefficient of base element b in degree k of (sum_j m_j g_j).phi
            row = []
            for g in G.gens:
                s = Fraction(0)
                for i in range(n):
                    coefs = pc[i]
                    if k < len(coefs):
                        s += g[i * d + b] * coefs[k]
                row.append(s)
            if any(row):
                den = 1
                for v in row:
                    den = lcm(den, v.denominator)
                rows.append([int(v * den) for v in row])
    return rows


def _witness_key(m: Sequence[int]):
    return (max(abs(v) for v in m), tuple(m))


def nd_check(phi: PiecewiseFlux, G: FreqGroup, interval=None) -> NDReport:
    """Decide the non-degeneracy condition for ``phi`` over group ``G`` on ``interval``."""
    if G.n != phi.dims:
        raise InputError(f"group lives in R^{G.n} but the flux has {phi.dims} components")
    a, b = interval if interval is not None else phi.domain
    phi.check_range(a, b)
    pieces = phi.overlapping_pieces(a, b)
    if G.rank == 0:
        return NDReport(True, None, tuple(pieces))
    for i in pieces:
        kern = integer_kernel(_constraint_matrix(phi, G, i), G.rank)
        if not kern:
            continue
        cands = []
        for row in hnf(kern):
            s = next(v for v in row if v)
            cands.append([-v for v in row] if s < 0 else list(row))
        m = min(cands, key=_witness_key)
        xi = G.element(m)
        pc = phi.pieces[i]
        slope = _dot_coeffs(xi, pc, 1)
        icpt = _dot_coeffs(xi, pc, 0)
        w = NDWitness(xi, tuple(m), i, (phi.breakpoints[i], phi.breakpoints[i + 1]), slope, icpt)
        return NDReport(False, w, tuple(pieces))
    return NDReport(True, None, tuple(pieces))


# ---------------------------------------------------------------------------
# Sharpness: traveling waves along a degenerate direction


@dataclass(frozen=True)
class TravelingWave:
    """Exact solution ``u(t, x) = W(xi.x - alpha t)`` along a degenerate direction."""

    profile: TrigPoly
    xi: Frequency
    alpha: float
    flux: PiecewiseFlux

    def initial(self) -> TrigPoly:
        return compose_profile(self.profile, self.xi)

    def at(self, t: float) -> TrigPoly:
        """``u(t, .)`` as a polynomial: line ``k xi`` picks up ``exp(-2 pi i k alpha t)``."""
        out = {}
        for k_lam, a in self.profile.terms.items():
            k = k_lam.coords[0][0]
            out[self.xi.scale(k)] = a * np.exp(-2j * np.pi * float(k) * self.alpha * t)
        q = TrigPoly(self.xi.base, self.xi.n, out)
        return q._resym(self.profile.real_valued)

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        if self.xi.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return evaluate(self.profile, x @ self.xi.real - self.alpha * np.asarray(t))

    def pde_residual(self, t, x) -> np.ndarray:
        """``u_t + sum_i phi_i'(u) u_{x_i}`` from exact derivatives of the profile."""
        x = np.asarray(x, dtype=float)
        if self.xi.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        s = x @ self.xi.real - self.alpha * np.asarray(t)
        u = evaluate(self.profile, s)
        dW = np.zeros_like(u)
        for lam, a in self.profile.terms.items():
            k = float(lam.coords[0][0])
            ph = 2 * np.pi * k * s
            dW = dW + (a * 2j * np.pi * k * np.exp(1j * ph)).real
        u_t = -self.alpha * dW
        idx = self.flux.piece_index(u)
        div = np.zeros_like(u)
        for c in range(self.flux.dims):
            dphi = np.zeros_like(u)
            for i, piece in enumerate(self.flux.pieces):
                coefs = [float(v) for v in piece[c]]
                der = np.polynomial.polynomial.polyder(coefs) if len(coefs) > 1 else [0.0]
                dphi = np.where(idx == i, np.polynomial.polynomial.polyval(u, der), dphi)
            div = div + dphi * dW * self.xi.real[c]
        return u_t + div


def compose_profile(W: TrigPoly, xi: Frequency) -> TrigPoly:
    """``x -> W(xi.x)`` for a 1-periodic profile ``W`` with integer frequencies."""
    out = {}
    for lam, a in W.terms.items():
        if W.dims != 1 or W.base.d != 1 or lam.coords[0][0].denominator != 1:
            raise InputError("profile must be a 1-periodic polynomial over the rational base")
        out[xi.scale(lam.coords[0][0])] = a
    return TrigPoly(xi.base, xi.n, out)._resym(W.real_valued)


def make_counterexample(phi: PiecewiseFlux, report: NDReport, profile: TrigPoly):
    """Initial data ``u0(x) = W(xi.x)`` and its exact non-decaying solution.

    This is the standard traveling-wave construction: with ``xi.phi(u) =
    alpha u + beta`` on the witness piece, ``u(t, x) = W(xi.x - alpha t)``
    is a smooth solution, so its mean deviation never changes.

    Requires a failing report; the range of ``W`` must lie in the witness
    piece so that ``xi.phi`` is affine along the whole orbit.
    """
    from .lift import LiftSpec  # local: lift imports specgroup which is already loaded

    if report.holds or report.witness is None:
        raise InputError("a counterexample needs a failing non-degeneracy report")
    w = report.witness
    if profile.terms and not profile.real_valued:
        raise InputError("profile must be real-valued")
    if profile.terms:
        from .apcore import trig_range
        lo, hi = trig_range(profile, LiftSpec.for_poly(profile))
    else:
        lo = hi = 0.0
    a, b = w.interval
    if lo < float(a) - 1e-12 or hi > float(b) + 1e-12:
        raise DomainError(f"profile range [{lo:.6g}, {hi:.6g}] leaves the affine interval [{a}, {b}]")
    wave = TravelingWave(profile, w.xi, w.slope_value, phi)
    return wave.initial(), wave


__all__ = [
    "PiecewiseFlux", "NDReport", "NDWitness", "TravelingWave", "lipschitz_constant",
    "nd_check", "affine_on_piece", "make_counterexample", "compose_profile", "poly_abs_max",
]
