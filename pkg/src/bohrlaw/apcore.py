"""Exact frequencies, trigonometric polynomials and mean-value analysis.

A frequency is stored as an ``n x d`` matrix of rationals over a declared
real base ``beta_1..beta_d``: the i-th real coordinate is
``sum_k coords[i][k] * beta_k``.  Rational linear relations between
frequencies are therefore decidable, which is all the group and Fejér
machinery needs.  Quadrature only appears in the torus functionals
(:func:`besicovitch_norm`, :func:`excess_mean`, :func:`ess_sup`) and in
:func:`numeric_mean`; exact mean values are read off the coefficients.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np
from scipy import optimize

from .errors import BaseMismatchError, DomainError, InputError

# Working precision for base constants (decimal digits).
BASE_DIGITS = 50
ESS_SUP_TOL = 1e-10
DEFAULT_GRID_1D = 4096
# Cap on torus samples for m >= 2 so the FFT grid stays desk-sized.
MAX_TORUS_POINTS = 2**22
GAUSS_ORDER = 8

_SQRT_RE = re.compile(r"^sqrt\(?\s*(\d+(?:/\d+)?)\s*\)?$")


def _parse_real(text: str) -> mpmath.mpf:
    s = str(text).strip().replace(" ", "")
    with mpmath.workdps(BASE_DIGITS + 10):
        m = _SQRT_RE.match(s)
        if m:
            return mpmath.sqrt(mpmath.mpf(Fraction(m.group(1)).numerator) / Fraction(m.group(1)).denominator)
        if s == "pi":
            return +mpmath.pi
        if s == "e":
            return +mpmath.e
        if "/" in s:
            q = Fraction(s)
            return mpmath.mpf(q.numerator) / q.denominator
        try:
            return mpmath.mpf(s)
        except (ValueError, TypeError) as exc:
            raise InputError(f"cannot parse base value {text!r}") from exc


@dataclass(frozen=True)
class RealBase:
    """Ordered real numbers asserted (never checked) to be Q-linearly independent.

    ``RealBase.parse(["1", "sqrt2"])`` accepts decimal strings, ``p/q``,
    ``sqrtN`` / ``sqrt(N)``, ``pi`` and ``e``.  Values are kept as
    50-digit decimal strings so equality is cheap and exact.
    """

    digits: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.digits) != len(self.labels):
            raise InputError("base labels and values differ in length")
        if not self.digits:
            raise InputError("a real base needs at least one value")
        vals = [mpmath.mpf(v) for v in self.digits]
        for v in vals:
            if not mpmath.isfinite(v) or v == 0:
                raise InputError("base values must be finite and nonzero")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InputError("base values must be strictly increasing")

    @classmethod
    def parse(cls, items: Sequence[str], labels: Sequence[str] | None = None) -> "RealBase":
        with mpmath.workdps(BASE_DIGITS + 10):
            vals = [_parse_real(s) for s in items]
            digits = tuple(mpmath.nstr(v, BASE_DIGITS, strip_zeros=False, min_fixed=-1e9, max_fixed=1e9)
                           for v in vals)
        return cls(digits, tuple(labels) if labels is not None else tuple(str(s) for s in items))

    @classmethod
    def rational(cls) -> "RealBase":
        return cls.parse(["1"])

    @property
    def d(self) -> int:
        return len(self.digits)

    @cached_property
    def mp_values(self) -> tuple:
        with mpmath.workdps(BASE_DIGITS + 10):
            return tuple(mpmath.mpf(v) for v in self.digits)

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([float(v) for v in self.mp_values])

    def __eq__(self, other):
        return isinstance(other, RealBase) and self.digits == other.digits

    def __hash__(self):
        return hash(self.digits)

    def __repr__(self):
        return f"RealBase({list(self.labels)})"


_BASE_1 = None


def rational_base() -> RealBase:
    global _BASE_1
    if _BASE_1 is None:
        _BASE_1 = RealBase.rational()
    return _BASE_1


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


class Frequency:
    """An exact frequency vector in R^n over a :class:`RealBase`."""

    __slots__ = ("base", "coords", "_hash", "_real")

    def __init__(self, base: RealBase, coords):
        rows = tuple(tuple(_fr(c) for c in row) for row in coords)
        if not rows or any(len(r) != base.d for r in rows):
            raise InputError(f"frequency coordinates must be n x {base.d}")
        self.base = base
        self.coords = rows
        self._hash = hash(rows)
        self._real = None

    @classmethod
    def zero(cls, base: RealBase, n: int) -> "Frequency":
        return cls(base, [[0] * base.d for _ in range(n)])

    @classmethod
    def from_flat(cls, base: RealBase, n: int, flat: Sequence) -> "Frequency":
        d = base.d
        if len(flat) != n * d:
            raise InputError(f"expected {n * d} coordinates, got {len(flat)}")
        return cls(base, [flat[i * d:(i + 1) * d] for i in range(n)])

    @classmethod
    def scalar(cls, *coeffs, base: RealBase | None = None) -> "Frequency":
        """One-dimensional frequency ``sum coeffs[k] * beta_k``."""
        base = base or rational_base()
        return cls(base, [list(coeffs) + [0] * (base.d - len(coeffs))])

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def flat(self) -> tuple[Fraction, ...]:
        return tuple(c for row in self.coords for c in row)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.flat)

    def _check(self, other: "Frequency"):
        if other.base != self.base:
            raise BaseMismatchError(f"frequencies over {self.base!r} and {other.base!r}")
        if other.n != self.n:
            raise InputError("frequencies of different dimension")

    def __add__(self, other: "Frequency") -> "Frequency":
        self._check(other)
        return Frequency(self.base, [[a + b for a, b in zip(r, s)] for r, s in zip(self.coords, other.coords)])

    def __neg__(self) -> "Frequency":
        return Frequency(self.base, [[-a for a in r] for r in self.coords])

    def __sub__(self, other: "Frequency") -> "Frequency":
        return self + (-other)

    def scale(self, q) -> "Frequency":
        q = _fr(q)
        return Frequency(self.base, [[q * a for a in r] for r in self.coords])

    def __eq__(self, other):
        return (isinstance(other, Frequency) and self._hash == other._hash
                and self.coords == other.coords and self.base == other.base)

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Frequency"):
        return self.flat < other.flat

    def is_positive(self) -> bool:
        """Lexicographic sign on the flat coordinates (picks one of +-lambda)."""
        for c in self.flat:
            if c:
                return c > 0
        return False

    def mp_real(self):
        with mpmath.workdps(BASE_DIGITS + 10):
            return [mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * b
                                for c, b in zip(row, self.base.mp_values)) for row in self.coords]

    @property
    def real(self) -> np.ndarray:
        """Real coordinates in R^n (float64, correctly rounded from 50 digits)."""
        if self._real is None:
            self._real = np.array([float(v) for v in self.mp_real()])
        return self._real

    def __repr__(self):
        def fmt(row):
            parts = []
            for c, lab in zip(row, self.base.labels):
                if c:
                    parts.append(f"{c}" if lab == "1" else f"{c}*{lab}")
            return "+".join(parts) or "0"
        inner = ", ".join(fmt(r) for r in self.coords)
        return f"Frequency({inner})"


def _as_freq(lam, base: RealBase, n: int) -> Frequency:
    if isinstance(lam, Frequency):
        return lam
    if n == 1 and not isinstance(lam, (list, tuple)):
        return Frequency(base, [[lam] + [0] * (base.d - 1)])
    return Frequency(base, lam)


class TrigPoly:
    """Finite sum ``sum a_lambda exp(2 pi i lambda.x)`` with exact frequencies.

    Real-valued polynomials are stored in full complex form (both +-lambda);
    :attr:`real_valued` records whether the conjugate symmetry holds exactly.
    """

    __slots__ = ("base", "dims", "terms", "real_valued")

    def __init__(self, base: RealBase, dims: int, terms: Mapping[Frequency, complex] | None = None):
        self.base = base
        self.dims = int(dims)
        clean: dict[Frequency, complex] = {}
        for lam, a in (terms or {}).items():
            if lam.base != base:
                raise BaseMismatchError(f"term over {lam.base!r} in polynomial over {base!r}")
            if lam.n != self.dims:
                raise InputError("term dimension differs from polynomial dimension")
            a = complex(a)
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise InputError("amplitudes must be finite")
            if a != 0:
                clean[lam] = a
        self.terms = dict(sorted(clean.items(), key=lambda kv: kv[0].flat))
        self.real_valued = all(
            (-lam) in self.terms and self.terms[-lam] == a.conjugate() for lam, a in self.terms.items())

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, base: RealBase | None = None, dims: int = 1) -> "TrigPoly":
        return cls(base or rational_base(), dims)

    @classmethod
    def constant(cls, c, base: RealBase | None = None, dims: int = 1) -> "TrigPoly":
        base = base or rational_base()
        return cls(base, dims, {Frequency.zero(base, dims): c})

    @classmethod
    def exp(cls, lam, amp=1.0, base: RealBase | None = None, dims: int = 1) -> "TrigPoly":
        base = lam.base if isinstance(lam, Frequency) else (base or rational_base())
        f = _as_freq(lam, base, dims)
        return cls(base, f.n, {f: amp})

    @classmethod
    def cos(cls, lam, amp=1.0, base: RealBase | None = None, dims: int = 1) -> "TrigPoly":
        """``amp * cos(2 pi lambda.x)``."""
        base = lam.base if isinstance(lam, Frequency) else (base or rational_base())
        f = _as_freq(lam, base, dims)
        if f.is_zero():
            return cls.constant(amp, base, f.n)
        return cls(base, f.n, {f: amp / 2, -f: amp / 2})

    @classmethod
    def sin(cls, lam, amp=1.0, base: RealBase | None = None, dims: int = 1) -> "TrigPoly":
        """``amp * sin(2 pi lambda.x)``."""
        base = lam.base if isinstance(lam, Frequency) else (base or rational_base())
        f = _as_freq(lam, base, dims)
        if f.is_zero():
            return cls.zero(base, f.n)
        return cls(base, f.n, {f: complex(0, -amp / 2), -f: complex(0, amp / 2)})

    # -- algebra --------------------------------------------------------------
    def _compat(self, other: "TrigPoly"):
        if other.base != self.base:
            raise BaseMismatchError(f"polynomials over {self.base!r} and {other.base!r}")
        if other.dims != self.dims:
            raise InputError("polynomials of different dimension")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other, self.base, self.dims)
        self._compat(other)
        out = dict(self.terms)
        for lam, a in other.terms.items():
            out[lam] = out.get(lam, 0) + a
        return TrigPoly(self.base, self.dims, out)._resym(self.real_valued and other.real_valued)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(self.base, self.dims, {k: -a for k, a in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            self._compat(other)
            out: dict[Frequency, complex] = {}
            for l1, a1 in self.terms.items():
                for l2, a2 in other.terms.items():
                    lam = l1 + l2
                    out[lam] = out.get(lam, 0) + a1 * a2
            return TrigPoly(self.base, self.dims, out)._resym(self.real_valued and other.real_valued)
        c = complex(other)
        p = TrigPoly(self.base, self.dims, {k: a * c for k, a in self.terms.items()})
        return p._resym(self.real_valued and c.imag == 0)

    __rmul__ = __mul__

    def conj(self) -> "TrigPoly":
        return TrigPoly(self.base, self.dims, {-k: a.conjugate() for k, a in self.terms.items()})

    def real_part(self) -> "TrigPoly":
        """``(p + conj p) / 2`` with the conjugate symmetry enforced bit-exactly."""
        out: dict[Frequency, complex] = {}
        for lam in set(self.terms) | {-k for k in self.terms}:
            if lam.is_positive() or lam.is_zero():
                a = (self.terms.get(lam, 0) + complex(self.terms.get(-lam, 0)).conjugate()) / 2
                if lam.is_zero():
                    a = complex(a.real, 0.0)
                out[lam] = a
                out[-lam] = complex(a).conjugate() if not lam.is_zero() else a
        return TrigPoly(self.base, self.dims, out)

    def _resym(self, want_real: bool) -> "TrigPoly":
        if want_real and not self.real_valued:
            return self.real_part()
        return self

    def shift_phases(self, fn: Callable[[Frequency], complex]) -> "TrigPoly":
        return TrigPoly(self.base, self.dims, {k: a * fn(k) for k, a in self.terms.items()})

    # -- evaluation -------------------------------------------------------------
    def frequencies_real(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.dims))
        return np.array([k.real for k in self.terms])

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        return (isinstance(other, TrigPoly) and self.base == other.base
                and self.dims == other.dims and self.terms == other.terms)

    def __repr__(self):
        body = " + ".join(f"({a:.6g})e[{k}]" for k, a in self.terms.items()) or "0"
        return f"TrigPoly({body})"

    def max_abs_coefficient_sum(self) -> float:
        return float(sum(abs(a) for a in self.terms.values()))


def evaluate(p: TrigPoly, x):
    """Evaluate ``p`` at one point or an array of points with trailing axis ``n``.

    For 1-d polynomials a scalar or 1-d array of abscissae is accepted.  A
    real-valued ``p`` returns real output, pairing +-lambda terms as
    ``2 Re(a e^{i phase})`` so no imaginary residue has to be discarded.
    """
    x = np.asarray(x, dtype=float)
    if p.dims == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != p.dims:
        raise InputError(f"points must have trailing dimension {p.dims}")
    if not np.all(np.isfinite(x)):
        raise InputError("evaluation points must be finite")
    shape = x.shape[:-1]
    if p.real_valued:
        out = np.zeros(shape)
        for lam, a in p.terms.items():
            if lam.is_zero():
                out += a.real
            elif lam.is_positive():
                ph = 2 * np.pi * (x @ lam.real)
                out += 2 * (a.real * np.cos(ph) - a.imag * np.sin(ph))
        return out
    out = np.zeros(shape, dtype=complex)
    for lam, a in p.terms.items():
        out += a * np.exp(2j * np.pi * (x @ lam.real))
    return out


def bohr_fourier(p: TrigPoly, lam) -> complex:
    """Exact coefficient ``a_lambda`` (zero when ``lambda`` is not in the spectrum)."""
    if isinstance(lam, Frequency):
        if lam.base != p.base:
            raise BaseMismatchError(f"frequency over {lam.base!r}, polynomial over {p.base!r}")
        if lam.n != p.dims:
            raise InputError("frequency dimension differs from polynomial dimension")
    else:
        lam = _as_freq(lam, p.base, p.dims)
    return complex(p.terms.get(lam, 0.0))


def mean_value(p: TrigPoly) -> complex:
    return bohr_fourier(p, Frequency.zero(p.base, p.dims))


# ---------------------------------------------------------------------------
# Cube averages


@dataclass(frozen=True)
class MeanEstimate:
    """Cube average at the largest radius of a schedule.

    ``residual`` is the spread of the averages over the tail of the schedule
    starting one entry before ``R``; ``history`` lists ``(R, value, residual)``
    for each schedule entry, with nonincreasing residuals.
    """

    value: complex
    R: float
    residual: float
    history: tuple = field(default=())


def _gauss_nodes(a: float, b: float, panels: int, order: int = GAUSS_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def cube_average(f: Callable, R: float, n: int = 1, panels_per_unit: float = 4.0,
                 order: int = GAUSS_ORDER) -> complex:
    """``R^-n * integral of f over [-R/2, R/2]^n`` by composite Gauss-Legendre."""
    panels = max(1, int(math.ceil(panels_per_unit * R)))
    nodes, weights = _gauss_nodes(-R / 2, R / 2, panels, order)
    total = 0.0
    if n == 1:
        vals = np.asarray(f(nodes[:, None]))
        if not np.all(np.isfinite(vals)):
            raise InputError("non-finite samples in mean computation")
        total = np.dot(weights, vals.reshape(-1))
    else:
        rest = np.stack(np.meshgrid(*([nodes] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
        wrest = np.prod(np.stack(np.meshgrid(*([weights] * (n - 1)), indexing="ij"), axis=-1)
                        .reshape(-1, n - 1), axis=1)
        for x0, w0 in zip(nodes, weights):
            pts = np.concatenate([np.full((rest.shape[0], 1), x0), rest], axis=1)
            vals = np.asarray(f(pts)).reshape(-1)
            if not np.all(np.isfinite(vals)):
                raise InputError("non-finite samples in mean computation")
            total = total + w0 * np.dot(wrest, vals)
    return complex(total) / R**n


def numeric_mean(f, schedule: Sequence[float], n: int | None = None, **quad) -> MeanEstimate:
    """Cube averages of ``f`` along an increasing schedule of radii.

    ``f`` is a :class:`TrigPoly` or a callable mapping an ``(M, n)`` array of
    points to ``M`` values.
    """
    if isinstance(f, TrigPoly):
        n = f.dims
        p = f
        f = lambda pts: evaluate(p, pts)  # noqa: E731
    n = n or 1
    radii = [float(R) for R in schedule]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise InputError("schedule must be a nonempty increasing list of positive radii")
    values = [cube_average(f, R, n, **quad) for R in radii]
    history = []
    for i, R in enumerate(radii):
        tail = values[max(i - 1, 0):]
        spread = max(abs(a - b) for a in tail for b in tail)
        history.append((R, values[i], float(spread)))
    R, v, res = history[-1]
    return MeanEstimate(value=v, R=R, residual=res, history=tuple(history))


def cube_mean_bound(p: TrigPoly, R: float) -> float:
    """Upper bound ``sum_{lambda != 0} |a| * 2 / (pi min_i |lambda_i| R)`` on the cube-average error.

    The minimum runs over the nonzero components of each frequency.
    """
    total = 0.0
    for lam, a in p.terms.items():
        if lam.is_zero():
            continue
        comps = np.abs(lam.real)
        comps = comps[comps > 0]
        total += abs(a) * 2.0 / (math.pi * comps.min() * R)
    return total


# ---------------------------------------------------------------------------
# Torus functionals (Haar-measure integrals over the lift torus)


def torus_grid(m: int, grid: int | None = None) -> int:
    """Grid points per torus dimension used by the quadrature functionals."""
    if grid is not None:
        return int(grid)
    if m <= 1:
        return DEFAULT_GRID_1D
    n = DEFAULT_GRID_1D
    while n**m > MAX_TORUS_POINTS:
        n //= 2
    return n


def torus_eval(K: np.ndarray, amps: np.ndarray, theta) -> np.ndarray:
    """``sum_t amps[t] exp(2 pi i K[t].theta)`` at torus points ``theta`` of shape (..., m)."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape[:-1], dtype=complex)
    for k, a in zip(K, amps):
        out += a * np.exp(2j * np.pi * (theta @ k))
    return out


def torus_samples(K: np.ndarray, amps: np.ndarray, N: int) -> np.ndarray:
    """Values on the grid ``theta = j/N`` (all axes) via one inverse FFT."""
    m = K.shape[1]
    if K.size and np.abs(K).max() >= N // 2:
        axes = [np.arange(N) / N] * m
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return torus_eval(K, amps, pts)
    coef = np.zeros((N,) * m, dtype=complex)
    for k, a in zip(K, amps):
        coef[tuple(int(c) % N for c in k)] += a
    return np.fft.ifftn(coef) * N**m


def _torus_modes(p: TrigPoly, lift):
    K, amps = lift.modes(p)
    return np.asarray(K, dtype=np.int64).reshape(-1, lift.m), np.asarray(amps, dtype=complex)


def _breakpoints_1d(g: Callable, nodes: np.ndarray, gvals: np.ndarray) -> list[float]:
    roots = []
    s = np.sign(gvals)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    for i in idx:
        a, b = nodes[i], nodes[i + 1]
        roots.append(optimize.brentq(g, a, b, xtol=1e-15, rtol=1e-15))
    return roots


def _integrate_1d(K, amps, real: bool, level: float, N: int) -> float:
    """Integral over [0,1) of ``(|P| - level)^+`` with kinks located exactly."""
    nodes = np.arange(N + 1) / N
    P = lambda th: torus_eval(K, amps, np.asarray(th, dtype=float).reshape(-1, 1))  # noqa: E731
    vals = P(nodes)
    if real:
        vals = vals.real
    pieces = [nodes]
    if real:
        for c in ((level, -level) if level > 0 else (0.0,)):
            g = lambda th, c=c: float(P(np.array([th]))[0].real) - c  # noqa: E731
            pieces.append(np.array(_breakpoints_1d(g, nodes, vals - c)))
    elif level > 0:
        g = lambda th: float(abs(P(np.array([th]))[0])) - level  # noqa: E731
        pieces.append(np.array(_breakpoints_1d(g, nodes, np.abs(vals) - level)))
    cuts = np.unique(np.concatenate(pieces))
    x, w = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    mid = 0.5 * (cuts[1:] + cuts[:-1])
    half = 0.5 * (cuts[1:] - cuts[:-1])
    qn = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    qw = (half[:, None] * w[None, :]).ravel()
    h = np.maximum(np.abs(P(qn)) - level, 0.0)
    return float(np.dot(qw, h))


def _torus_functional(p: TrigPoly, lift, level: float, grid: int | None) -> float:
    K, amps = _torus_modes(p, lift)
    if not len(amps):
        return max(0.0 - level, 0.0)
    N = torus_grid(lift.m, grid)
    if lift.m == 1:
        return _integrate_1d(K, amps, p.real_valued, level, N)
    vals = np.abs(torus_samples(K, amps, N))
    return float(np.maximum(vals - level, 0.0).mean())


def besicovitch_norm(p: TrigPoly, lift, grid: int | None = None) -> float:
    """Mean L1 norm ``N_1(p)`` as a Haar integral of ``|P|`` over the lift torus.

    One-dimensional lifts integrate between the located zeros of ``P`` with
    Gauss-Legendre panels on a ``grid``-cell partition; higher-dimensional
    lifts use the periodic trapezoid rule on ``torus_grid(m, grid)`` points
    per axis.
    """
    return _torus_functional(p, lift, 0.0, grid)


def excess_mean(p: TrigPoly, M: float, lift, grid: int | None = None) -> float:
    """Mean of ``(|p| - M)^+``; zero exactly when ``M`` bounds ``|p|``."""
    if M < 0:
        raise DomainError(f"level M must be nonnegative, got {M}")
    return _torus_functional(p, lift, float(M), grid)


def _polish_max(K, amps, starts, sign: float = 1.0, mode: str = "abs"):
    """Local ascent of ``|P|`` (or ``sign*Re P``) from the given torus points."""

    def obj(th):
        e = np.exp(2j * np.pi * (K @ th))
        P = np.dot(amps, e)
        dP = (amps * e) @ (2j * np.pi * K)
        if mode == "abs":
            val = (P * P.conjugate()).real
            grad = 2 * (P.conjugate() * dP).real
        else:
            val = sign * P.real
            grad = sign * dP.real
        return -val, -grad

    best = -np.inf
    for th0 in starts:
        res = optimize.minimize(obj, th0, jac=True, method="BFGS", options={"gtol": 1e-14})
        v = -res.fun
        best = max(best, math.sqrt(max(v, 0.0)) if mode == "abs" else v)
    return best


def ess_sup(p: TrigPoly, lift, grid: int | None = None, tol: float = ESS_SUP_TOL) -> float:
    """Essential supremum of ``|p|`` as the least level with zero excess mean.

    Bisection on the grid excess locates the grid maximum to ``tol``; a local
    ascent from the best grid points then recovers the off-grid maximum.
    """
    K, amps = _torus_modes(p, lift)
    if not len(amps):
        return 0.0
    N = torus_grid(lift.m, grid)
    vals = np.abs(torus_samples(K, amps, N)).ravel()
    lo, hi = 0.0, float(np.abs(amps).sum()) + tol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.maximum(vals - mid, 0.0).sum() > 0:
            lo = mid
        else:
            hi = mid
    if K.any():
        top = np.argsort(vals)[-4:]
        starts = [np.array(np.unravel_index(i, (N,) * lift.m), dtype=float) / N for i in top]
        hi = max(hi, _polish_max(K.astype(float), amps, starts))
    return hi


def trig_range(p: TrigPoly, lift, grid: int | None = None) -> tuple[float, float]:
    """(min, max) of a real-valued ``p`` over the lift torus (= its inf and sup on R^n)."""
    if not p.real_valued:
        raise InputError("range requires a real-valued polynomial")
    K, amps = _torus_modes(p, lift)
    if not len(amps):
        return 0.0, 0.0
    N = torus_grid(lift.m, grid)
    vals = torus_samples(K, amps, N).real.ravel()
    if not K.any():
        return float(vals.min()), float(vals.max())
    Kf = K.astype(float)
    out = []
    for sign, pick in ((-1.0, np.argsort(vals)[:4]), (1.0, np.argsort(vals)[-4:])):
        starts = [np.array(np.unravel_index(i, (N,) * lift.m), dtype=float) / N for i in pick]
        ext = sign * _polish_max(Kf, amps, starts, sign=sign, mode="re")
        grid_ext = vals[pick].min() if sign < 0 else vals[pick].max()
        out.append(min(ext, grid_ext) if sign < 0 else max(ext, grid_ext))
    return float(out[0]), float(out[1])


# ---------------------------------------------------------------------------
# Scaled averages against a compactly supported weight


def _poly_exp_integral(coefs: Sequence[float], a: float, b: float, omega: float) -> complex:
    """``integral_a^b (sum c_k y^k) exp(i omega y) dy`` in closed form."""
    deg = len(coefs) - 1
    if omega == 0.0:
        return complex(sum(c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(coefs)))
    if abs(omega) * max(abs(a), abs(b)) < 1.0:
        # power series of the exponential; converges fast when |omega y| < 1
        total = 0j
        term_scale = 1.0 + 0j
        for j in range(40):
            if j:
                term_scale *= 1j * omega / j
            s = sum(c * (b ** (k + j + 1) - a ** (k + j + 1)) / (k + j + 1) for k, c in enumerate(coefs))
            total += term_scale * s
        return total
    io = 1j * omega
    ea, eb = np.exp(io * a), np.exp(io * b)
    # I_k = [y^k e^{i w y}/(i w)]_a^b - k/(i w) I_{k-1}
    I = [(eb - ea) / io]
    for k in range(1, deg + 1):
        I.append((b**k * eb - a**k * ea) / io - k / io * I[-1])
    return complex(sum(c * Ik for c, Ik in zip(coefs, I)))


@dataclass(frozen=True)
class Bump:
    """Compactly supported piecewise polynomial weight on R (ascending coefficients).

    In ``n`` dimensions the weight is the tensor product ``prod_i b(y_i)``.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) - 1:
            raise InputError("a bump needs one polynomial per interval")

    @classmethod
    def triangle(cls) -> "Bump":
        """``1 - |y|`` on ``[-1, 1]`` (integral 1)."""
        return cls((Fraction(-1), Fraction(0), Fraction(1)),
                   ((Fraction(1), Fraction(1)), (Fraction(1), Fraction(-1))))

    @classmethod
    def box(cls) -> "Bump":
        return cls((Fraction(-1, 2), Fraction(1, 2)), ((Fraction(1),),))

    @property
    def integral(self) -> Fraction:
        total = Fraction(0)
        for (a, b), cs in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            total += sum(c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(cs))
        return total

    def fourier(self, s: float) -> complex:
        """``integral b(y) exp(2 pi i s y) dy``."""
        omega = 2 * math.pi * s
        return sum(_poly_exp_integral([float(c) for c in cs], float(a), float(b), omega)
                   for (a, b), cs in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for (a, b), cs in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            mask = (y >= float(a)) & (y < float(b))
            out = np.where(mask, np.polynomial.polynomial.polyval(y, [float(c) for c in cs]), out)
        return out


def scaled_average(p: TrigPoly, g: Bump, R: float) -> complex:
    """``R^-n * integral p(x) g(x/R) dx``, integrated exactly term by term.

    Tends to ``integral(g) * mean_value(p)`` as ``R`` grows.
    """
    total = 0j
    for lam, a in p.terms.items():
        term = a
        for comp in lam.real:
            term *= g.fourier(R * comp)
        total += term
    return complex(total)


def deviation_envelope(p: TrigPoly, g: Bump, R1: float, R2: float, samples: int = 257) -> float:
    """``max |scaled_average(p, g, R) - integral(g) * mean_value(p)|`` over ``R`` in ``[R1, R2]``.

    The deviation of a single mode oscillates with ``R``; comparing window
    maxima over ``[R, 2R]`` and ``[2R, 4R]`` exposes the algebraic decay rate.
    """
    target = float(g.integral) * mean_value(p)
    radii = np.linspace(R1, R2, samples)
    return float(max(abs(scaled_average(p, g, R) - target) for R in radii))


__all__ = [
    "RealBase", "Frequency", "TrigPoly", "MeanEstimate", "Bump",
    "evaluate", "bohr_fourier", "mean_value", "numeric_mean", "cube_average", "cube_mean_bound",
    "besicovitch_norm", "excess_mean", "ess_sup", "trig_range", "scaled_average", "deviation_envelope",
    "torus_grid", "torus_eval", "torus_samples", "rational_base",
]
