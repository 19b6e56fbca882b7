"""Bochner-Fejér kernels over a finite rational basis.

For basis frequencies ``lambda_1..lambda_N`` and order ``r`` the kernel is

    Phi_r(x) = sum_{|k_j| < (r+1)!} prod_j (1 - |k_j|/(r+1)!) exp(2 pi i (sum_j k_j lambda_j).x / r!)

and the summation operator multiplies each Fourier line by the weight of
its multi-index.  The index set has ``(2 (r+1)! - 1)^N`` entries, so weights
are looked up per frequency by solving for ``k`` through rational
coordinates instead of enumerating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .apcore import Frequency, TrigPoly, torus_samples
from .errors import DomainError, InputError, SpanError
from .specgroup import QBasis

MAX_ORDER = 7
SING_EPS = 1e-9


@dataclass(frozen=True)
class FejerPlan:
    basis: QBasis
    r: int

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 1:
            raise DomainError(f"Fejér order must be a positive integer, got {self.r}")
        if self.r > MAX_ORDER:
            raise DomainError(f"Fejér order {self.r} exceeds the supported maximum {MAX_ORDER}")
        if not len(self.basis):
            raise InputError("Fejér plan needs a nonempty basis")

    @property
    def n_active(self) -> int:
        return len(self.basis)

    @property
    def fact(self) -> int:
        return math.factorial(self.r)

    @property
    def width(self) -> int:
        """``(r+1)!``: multi-indices satisfy ``|k_j| < width``."""
        return math.factorial(self.r + 1)


@dataclass(frozen=True)
class WeightLookup:
    """Weight of one frequency: its multi-index and exact weight (0 outside the index box)."""

    frequency: Frequency
    index: tuple[Fraction, ...]
    weight: Fraction
    in_range: bool


class FejerWeights:
    """Lazy view of the weight table ``k -> prod_j (1 - |k_j|/(r+1)!)``."""

    def __init__(self, plan: FejerPlan):
        self.plan = plan

    def at_index(self, k: Sequence[int]) -> Fraction:
        K = self.plan.width
        if len(k) != self.plan.n_active:
            raise InputError("multi-index length differs from basis size")
        if any(abs(kj) >= K for kj in k):
            return Fraction(0)
        w = Fraction(1)
        for kj in k:
            w *= 1 - Fraction(abs(kj), K)
        return w

    def frequency_of(self, k: Sequence[int]) -> Frequency:
        """``(1/r!) sum_j k_j lambda_j``."""
        return self.plan.basis.reconstruct([Fraction(kj, self.plan.fact) for kj in k])

    def lookup(self, lam: Frequency) -> WeightLookup:
        c = self.plan.basis.coords(lam, strict=False)
        if c is None:
            raise SpanError(f"{lam!r} lies outside the rational span of the Fejér basis", lam)
        k = tuple(cj * self.plan.fact for cj in c)
        if any(kj.denominator != 1 for kj in k):
            return WeightLookup(lam, k, Fraction(0), False)
        kk = [int(kj) for kj in k]
        w = self.at_index(kk)
        return WeightLookup(lam, k, w, w != 0)

    def at(self, lam: Frequency) -> Fraction:
        return self.lookup(lam).weight


def fejer_weights(plan: FejerPlan) -> FejerWeights:
    return FejerWeights(plan)


def _factor(t: np.ndarray, K: int) -> np.ndarray:
    """``sin^2(pi K t) / (K sin^2(pi t))`` with the removable singularity filled in."""
    s = np.sin(np.pi * t)
    out = np.empty_like(t)
    regular = np.abs(s) >= SING_EPS
    out[regular] = np.sin(np.pi * K * t[regular]) ** 2 / (K * s[regular] ** 2)
    if not regular.all():
        d = t[~regular] - np.round(t[~regular])
        # two-term Taylor ratio of sin^2(pi K d)/sin^2(pi d) about d = 0
        out[~regular] = K * (1.0 - (K * K - 1) * (np.pi * d) ** 2 / 3.0)
    return out


def kernel_eval(plan: FejerPlan, x) -> np.ndarray:
    """Closed-form product of squared-sine ratios; nonnegative everywhere."""
    x = np.asarray(x, dtype=float)
    n = plan.basis.n
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    K = plan.width
    out = np.ones(x.shape[:-1])
    for lam in plan.basis.vectors:
        t = (x @ lam.real) / plan.fact
        out = out * _factor(np.atleast_1d(t), K).reshape(out.shape)
    return np.maximum(out, 0.0)


def kernel_poly(plan: FejerPlan) -> TrigPoly:
    """The kernel as an explicit trigonometric polynomial (single basis vector, r <= 2)."""
    if plan.n_active != 1 or plan.r > 2:
        raise DomainError("kernel materialization is limited to one basis vector and r <= 2")
    W = FejerWeights(plan)
    lam = plan.basis.vectors[0]
    terms = {}
    for k in range(-plan.width + 1, plan.width):
        terms[lam.scale(Fraction(k, plan.fact))] = float(W.at_index([k]))
    return TrigPoly(lam.base, lam.n, terms)


def bochner_fejer(p: TrigPoly, plan: FejerPlan) -> TrigPoly:
    """Fejér mean ``sigma_r p``: every coefficient times its plan weight."""
    W = FejerWeights(plan)
    out = {}
    for lam, a in p.terms.items():
        c = plan.basis.coords(lam, strict=False)
        if c is None:
            raise SpanError(f"spectral line {lam!r} is outside the span of the Fejér basis", lam)
        w = W.at(lam)
        if w:
            out[lam] = a * float(w)
    q = TrigPoly(p.base, p.dims, out)
    return q._resym(p.real_valued)


def modulus_functional(p: TrigPoly, plan: FejerPlan, lift, omega: Callable | None = None,
                       grid: int = 256) -> float:
    """``mean_x mean_y omega(|p(x) - p(y)|) Phi_r(x - y)`` evaluated on the lift torus.

    With ``G(eta) = integral omega(|P(theta) - P(theta - eta)|) d theta`` the
    double mean equals ``sum_k w(k) G^(k)`` over lattice frequencies ``k``,
    the kernel being a positive multiplier on ``G``'s Fourier lines.  ``G`` is
    sampled on a ``grid^m`` torus grid; its FFT supplies ``G^(k)``.
    """
    omega = omega or (lambda s: np.minimum(s, 1.0))
    K, amps = lift.modes(p)
    m = lift.m
    vals = torus_samples(np.asarray(K).reshape(-1, m), amps, grid)
    if p.real_valued:
        vals = vals.real
    axes = tuple(range(m))
    G = np.empty(vals.shape)
    for idx in np.ndindex(*vals.shape):
        shifted = np.roll(vals, shift=idx, axis=axes)
        G[idx] = omega(np.abs(vals - shifted)).mean()
    Ghat = np.fft.fftn(G) / G.size
    W = FejerWeights(plan)
    total = 0.0
    for idx in np.ndindex(*Ghat.shape):
        k = [i if i < grid // 2 else i - grid for i in idx]
        lam = lift.vectors[0].scale(0)
        for kj, v in zip(k, lift.vectors):
            if kj:
                lam = lam + v.scale(kj)
        w = W.at(lam)
        if w:
            # Phi_r(eta) has coefficient w at -lambda too; mean(G Phi) = sum w(k) G^(-k)
            total += float(w) * Ghat[idx].real
    return float(total)


__all__ = [
    "FejerPlan", "FejerWeights", "WeightLookup", "fejer_weights", "kernel_eval",
    "kernel_poly", "bochner_fejer", "modulus_functional", "MAX_ORDER",
]
