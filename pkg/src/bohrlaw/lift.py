"""Lifting quasi-periodic data on R^n to a periodic function on the m-torus.

With basis frequencies ``lambda_1..lambda_m`` and integer coordinates
``k(lambda)`` for every spectral line, a polynomial ``p`` becomes
``P(theta) = sum a_lambda exp(2 pi i k(lambda).theta)`` and
``p(x) = P(lambda_1.x, ..., lambda_m.x)``.  Haar integrals over the torus
realize mean values over R^n.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .apcore import Frequency, TrigPoly
from .errors import InputError, LatticeError
from .specgroup import FreqGroup, QBasis, group_generated, spectrum

MAX_TORUS_DIM = 3


class LiftSpec:
    """Torus lift defined by Q-independent basis frequencies."""

    def __init__(self, basis: Sequence[Frequency] | QBasis):
        qb = basis if isinstance(basis, QBasis) else QBasis(list(basis))
        if not len(qb):
            raise InputError("a lift needs at least one basis frequency")
        if len(qb) > MAX_TORUS_DIM:
            raise InputError(f"torus dimension {len(qb)} exceeds {MAX_TORUS_DIM}")
        self.basis = qb
        self.m = len(qb)
        self.base = qb.base
        self.n = qb.n
        self._cache: dict[Frequency, tuple[int, ...]] = {}

    @classmethod
    def from_group(cls, G: FreqGroup) -> "LiftSpec":
        if G.rank == 0:
            return cls([Frequency.from_flat(G.base, G.n, [1] + [0] * (G.n * G.base.d - 1))])
        return cls(G.generators())

    @classmethod
    def for_poly(cls, p: TrigPoly) -> "LiftSpec":
        """Lift whose basis is the HNF generating set of the group ``M(p)``."""
        return cls.from_group(group_generated(spectrum(p), p.base, p.dims))

    @property
    def vectors(self) -> list[Frequency]:
        return self.basis.vectors

    def real_matrix(self) -> np.ndarray:
        """``(m, n)`` array whose rows are the real basis vectors."""
        return np.array([v.real for v in self.vectors])

    def lattice_coords(self, lam: Frequency) -> tuple[int, ...]:
        if lam in self._cache:
            return self._cache[lam]
        c = self.basis.coords(lam, strict=False)
        if c is None or any(Fraction(v).denominator != 1 for v in c):
            raise LatticeError(f"{lam!r} has no integer coordinates over the lift basis")
        k = tuple(int(v) for v in c)
        self._cache[lam] = k
        return k

    def represents(self, p: TrigPoly) -> bool:
        try:
            self.modes(p)
        except LatticeError:
            return False
        return True

    def modes(self, p: TrigPoly) -> tuple[np.ndarray, np.ndarray]:
        """Integer mode matrix ``(T, m)`` and amplitudes ``(T,)`` of the lifted polynomial."""
        if p.terms and p.base != self.base:
            raise LatticeError("polynomial and lift use different real bases")
        K = np.array([self.lattice_coords(lam) for lam in p.terms], dtype=np.int64).reshape(-1, self.m)
        a = np.array(list(p.terms.values()), dtype=complex)
        return K, a

    def phases(self, x) -> np.ndarray:
        """Torus point ``(lambda_j . x mod 1)_j`` for points ``x`` (..., n)."""
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return np.mod(x @ self.real_matrix().T, 1.0)

    def __repr__(self):
        return f"LiftSpec({self.vectors})"
