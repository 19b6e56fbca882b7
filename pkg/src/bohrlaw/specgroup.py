"""Spectra, the additive groups they generate, and rational bases.

Frequencies over a fixed real base are rational vectors (``n*d`` entries),
so a finitely generated frequency group is ``(1/D) L`` for an integer
lattice ``L``.  Lattices are kept in row Hermite normal form computed with
plain Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .apcore import Frequency, RealBase, TrigPoly
from .errors import BaseMismatchError, InputError, SpanError

# ---------------------------------------------------------------------------
# Integer lattice kernels


def hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form with zero rows dropped.

    Pivots are positive and strictly increase in column; entries above a
    pivot lie in ``[0, pivot)``.  The row span over Z is unchanged.
    """
    A = [list(map(int, r)) for r in rows]
    if not A:
        return []
    ncols = len(A[0])
    out: list[list[int]] = []
    r = 0
    for c in range(ncols):
        # gcd-combine every row at or below r into a single pivot row
        piv = None
        for i in range(r, len(A)):
            if A[i][c] == 0:
                continue
            if piv is None:
                piv = i
                continue
            a, b = A[piv][c], A[i][c]
            g, x, y = _xgcd(a, b)
            ua, ub = a // g, b // g
            new_piv = [x * p + y * q for p, q in zip(A[piv], A[i])]
            new_i = [-ub * p + ua * q for p, q in zip(A[piv], A[i])]
            A[piv], A[i] = new_piv, new_i
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        if A[r][c] < 0:
            A[r] = [-v for v in A[r]]
        p = A[r][c]
        for i in range(r):
            q = A[i][c] // p
            if q:
                A[i] = [u - q * v for u, v in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    out = [row for row in A[:r] if any(row)]
    return out


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``g, x, y`` with ``g = gcd(a, b) > 0`` and ``a x + b y = g``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    aa, bb = a, b
    while bb:
        q = aa // bb
        aa, bb = bb, aa - q * bb
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if aa < 0:
        aa, x0, y0 = -aa, -x0, -y0
    return aa, x0, y0


def is_hnf(rows: Sequence[Sequence[int]]) -> bool:
    last = -1
    for i, row in enumerate(rows):
        nz = [j for j, v in enumerate(row) if v]
        if not nz:
            return False
        c = nz[0]
        if c <= last or row[c] <= 0:
            return False
        for k in range(i):
            if not 0 <= rows[k][c] < row[c]:
                return False
        last = c
    return True


def solve_in_lattice(H: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer ``k`` with ``k @ H == v`` for HNF rows ``H``, or ``None``."""
    v = list(v)
    k = []
    for row in H:
        c = next(j for j, x in enumerate(row) if x)
        q, rem = divmod(v[c], row[c])
        if rem:
            return None
        k.append(q)
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return k if not any(v) else None


def integer_kernel(A: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Z-basis (as rows) of ``{m in Z^ncols : A m = 0}``.

    Reduces ``[A^T | I]`` to Hermite form; rows whose ``A^T`` part vanishes
    span the kernel because the transform is unimodular.
    """
    if not A:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    nr = len(A)
    aug = [[A[i][j] for i in range(nr)] + [int(j == t) for t in range(ncols)] for j in range(ncols)]
    H = hnf(aug)
    kern = [row[nr:] for row in H if not any(row[:nr])]
    return hnf(kern) if kern else []


# ---------------------------------------------------------------------------
# Frequency groups


def _flat_ints(freqs: Sequence[Frequency], D: int) -> list[list[int]]:
    rows = []
    for f in freqs:
        row = []
        for c in f.flat:
            v = c * D
            if v.denominator != 1:
                raise InputError("denominator does not clear")
            row.append(v.numerator)
        rows.append(row)
    return rows


def common_denominator(freqs: Iterable[Frequency]) -> int:
    D = 1
    for f in freqs:
        for c in f.flat:
            D = lcm(D, c.denominator)
    return D


@dataclass(frozen=True)
class FreqGroup:
    """``{ sum k_i gens[i] / D : k in Z^r }`` with ``gens`` in row HNF.

    ``D`` is minimal, so equal groups have identical ``(D, gens)``.
    """

    base: RealBase
    n: int
    D: int
    gens: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, base: RealBase, n: int, D: int, rows) -> "FreqGroup":
        H = hnf(rows)
        g = D
        for row in H:
            for v in row:
                g = gcd(g, v)
        if g > 1:
            H = [[v // g for v in row] for row in H]
            D //= g
        if not H:
            D = 1
        return cls(base, n, D, tuple(tuple(r) for r in H))

    @property
    def rank(self) -> int:
        return len(self.gens)

    def generators(self) -> list[Frequency]:
        return [Frequency.from_flat(self.base, self.n, [Fraction(v, self.D) for v in row]) for row in self.gens]

    def element(self, k: Sequence[int]) -> Frequency:
        flat = [Fraction(sum(ki * row[j] for ki, row in zip(k, self.gens)), self.D)
                for j in range(self.n * self.base.d)]
        return Frequency.from_flat(self.base, self.n, flat)

    def __repr__(self):
        return f"FreqGroup(D={self.D}, gens={[list(g) for g in self.gens]})"


def spectrum(p: TrigPoly) -> set[Frequency]:
    return set(p.terms)


def group_generated(freqs: Iterable[Frequency], base: RealBase | None = None, n: int | None = None) -> FreqGroup:
    """Smallest additive group containing ``freqs`` (the zero group if empty)."""
    freqs = list(freqs)
    if not freqs:
        if base is None or n is None:
            from .apcore import rational_base
            base, n = base or rational_base(), n or 1
        return FreqGroup(base, n, 1, ())
    base0, n0 = freqs[0].base, freqs[0].n
    for f in freqs:
        if f.base != base0:
            raise BaseMismatchError("frequencies over different bases")
        if f.n != n0:
            raise InputError("frequencies of different dimension")
    D = common_denominator(freqs)
    return FreqGroup.from_rows(base0, n0, D, _flat_ints(freqs, D))


def member(G: FreqGroup, lam: Frequency) -> tuple[bool, list[int] | None]:
    """``(True, k)`` with ``lam == sum k_i g_i`` if ``lam`` lies in ``G``, else ``(False, None)``."""
    if lam.base != G.base:
        raise BaseMismatchError(f"frequency over {lam.base!r}, group over {G.base!r}")
    if lam.n != G.n:
        raise InputError("frequency dimension differs from group dimension")
    scaled = [c * G.D for c in lam.flat]
    if any(v.denominator != 1 for v in scaled):
        return False, None
    k = solve_in_lattice(G.gens, [v.numerator for v in scaled])
    if k is None:
        return False, None
    return True, k


# ---------------------------------------------------------------------------
# Rational bases


class QBasis:
    """Q-linearly independent frequencies chosen greedily in input order."""

    def __init__(self, vectors: Sequence[Frequency], base: RealBase | None = None, n: int | None = None):
        self.vectors = list(vectors)
        self.base, self.n = base, n
        if self.vectors:
            self.base = self.vectors[0].base
            self.n = self.vectors[0].n
        self._rows: list[list[Fraction]] = []  # reduced echelon rows
        self._pivots: list[int] = []
        self._combo: list[list[Fraction]] = []  # row i = sum combo[i][j] vectors[j]
        for j, v in enumerate(self.vectors):
            row, combo = self._reduce(list(v.flat))
            if not any(row):
                raise InputError("basis vectors are not Q-linearly independent")
            combo = [-c for c in combo] + [Fraction(0)] * (len(self.vectors) - len(combo))
            combo[j] += 1
            self._insert(row, combo)

    def _reduce(self, vec: list[Fraction]):
        """Eliminate ``vec`` against the stored rows; returns the remainder and multipliers."""
        coeffs = [Fraction(0)] * len(self.vectors)
        for row, piv, combo in zip(self._rows, self._pivots, self._combo):
            c = vec[piv]
            if c:
                vec = [a - c * b for a, b in zip(vec, row)]
                coeffs = [a + c * b for a, b in zip(coeffs, combo)]
        return vec, coeffs

    def _insert(self, row, combo):
        piv = next(i for i, v in enumerate(row) if v)
        s = row[piv]
        row = [v / s for v in row]
        combo = [v / s for v in combo]
        for i, (r, p) in enumerate(zip(self._rows, self._pivots)):
            c = r[piv]
            if c:
                self._rows[i] = [a - c * b for a, b in zip(r, row)]
                self._combo[i] = [a - c * b for a, b in zip(self._combo[i], combo)]
        self._rows.append(row)
        self._pivots.append(piv)
        self._combo.append(combo)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def in_span(self, lam: Frequency) -> bool:
        return self.coords(lam, strict=False) is not None

    def coords(self, lam: Frequency, strict: bool = True) -> list[Fraction] | None:
        """Rational ``c`` with ``lam == sum c_j vectors[j]``.

        Raises :class:`SpanError` (or returns ``None`` when ``strict`` is
        false) for frequencies outside the span.
        """
        if self.vectors and lam.base != self.base:
            raise BaseMismatchError(f"frequency over {lam.base!r}, basis over {self.base!r}")
        rem, coeffs = self._reduce(list(lam.flat))
        if any(rem):
            if strict:
                raise SpanError(f"{lam!r} is outside the rational span of the basis", lam)
            return None
        return coeffs

    def reconstruct(self, c: Sequence[Fraction]) -> Frequency:
        if self.base is None:
            raise InputError("an empty basis without a declared base cannot build frequencies")
        out = Frequency.zero(self.base, self.n)
        for cj, v in zip(c, self.vectors):
            out = out + v.scale(cj)
        return out

    def __repr__(self):
        return f"QBasis({self.vectors})"


def qlinear_basis(freqs: Iterable[Frequency]) -> QBasis:
    """Greedy left-to-right basis of the Q-span of ``freqs``."""
    chosen: list[Frequency] = []
    probe = QBasis([])
    for f in freqs:
        if probe.base is None:
            probe = QBasis([], f.base, f.n)
        if probe.vectors and f.base != probe.base:
            raise BaseMismatchError("frequencies over different bases")
        if probe.vectors and probe.in_span(f):
            continue
        if f.is_zero():
            continue
        chosen.append(f)
        probe = QBasis(chosen)
    return probe


def sorted_spectrum(p: TrigPoly) -> list[Frequency]:
    """Spectrum in a deterministic order: zero, then +lambda before -lambda by size."""
    def key(f: Frequency):
        return (not f.is_zero(), max((abs(c) for c in f.flat), default=0), not f.is_positive(), f.flat)
    return sorted(p.terms, key=key)


__all__ = [
    "hnf", "is_hnf", "solve_in_lattice", "integer_kernel", "FreqGroup", "QBasis",
    "spectrum", "group_generated", "member", "qlinear_basis", "sorted_spectrum",
    "common_denominator",
]
