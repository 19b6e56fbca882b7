"""Decay traces, contraction series and the decay experiment harness."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .apcore import Frequency, TrigPoly, besicovitch_norm, mean_value, rational_base, trig_range
from .errors import ConfigError
from .flux import NDReport, PiecewiseFlux, TravelingWave, make_counterexample, nd_check
from .lift import LiftSpec
from .solver import RunConfig, RunRecord, solve
from .specgroup import FreqGroup, member, spectrum

DECAY_TOL = 1e-12
EXACT_TOL = 1e-10
CSV_HEADER = ("t", "D", "mass", "entropy_residual_max")


@dataclass
class DecayTrace:
    """Per-step rows ``(t, D, mass, entropy_residual_max)`` with ``D = mean|v - C|``."""

    t: np.ndarray
    D: np.ndarray
    mass: np.ndarray
    entropy: np.ndarray
    C: float

    def __len__(self):
        return len(self.t)

    @property
    def ratio(self) -> float:
        """``D(T)/D(0)``; zero for constant data."""
        return 0.0 if self.D[0] == 0 else float(self.D[-1] / self.D[0])

    def at(self, t: float) -> float:
        """``D`` at the last row with time <= ``t``."""
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        return float(self.D[max(i, 0)])

    def max_increase(self) -> float:
        return float(np.diff(self.D).max()) if len(self.D) > 1 else 0.0

    def mass_drift(self) -> float:
        return float(np.abs(self.mass - self.mass[0]).max())

    def violations(self, tol: float = DECAY_TOL) -> list[str]:
        out = []
        if (self.D < 0).any():
            out.append("negative D")
        if self.max_increase() > tol:
            out.append(f"D increased by {self.max_increase():.3g}")
        if self.mass_drift() > tol * (1 + abs(self.mass[0])):
            out.append(f"mass drifted by {self.mass_drift():.3g}")
        return out

    def to_csv(self) -> str:
        """Comma-separated rows with a header; floats at round-trip precision."""
        buf = io.StringIO()
        buf.write(",".join(CSV_HEADER) + "\n")
        for row in zip(self.t, self.D, self.mass, self.entropy):
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("-inf" if v < 0 else "inf")
    return "%.17g" % v


def decay_trace(run: RunRecord) -> DecayTrace:
    """Trace of a completed run; ``C`` is the mean of the initial cells."""
    rows = run.steps
    return DecayTrace(
        np.array([r.t for r in rows]),
        np.array([r.D for r in rows]),
        np.array([r.mass for r in rows]),
        np.array([r.entropy_max for r in rows]),
        run.C,
    )


@dataclass
class ContractionSeries:
    distances: np.ndarray

    def max_increase(self) -> float:
        return float(np.diff(self.distances).max()) if len(self.distances) > 1 else 0.0

    def violations(self, tol: float = DECAY_TOL) -> int:
        return int((np.diff(self.distances) > tol).sum())


def contraction_check(runA: RunRecord, runB: RunRecord) -> ContractionSeries:
    """``mean|vA - vB|`` at every step of two lockstep runs."""
    if not runA.states or not runB.states:
        raise ConfigError("contraction check needs runs that kept their states (use solve_pair)")
    if len(runA.states) != len(runB.states):
        raise ConfigError("runs have different step counts")
    if runA.dts != runB.dts:
        raise ConfigError("runs do not share a time-step schedule")
    if runA.states[0].shape != runB.states[0].shape:
        raise ConfigError("runs use different grids")
    d = [float(np.abs(a.values - b.values).mean()) for a, b in zip(runA.states, runB.states)]
    return ContractionSeries(np.array(d))


# ---------------------------------------------------------------------------
# Decay experiment


@dataclass
class DecayVerdict:
    """Outcome of :func:`decay_experiment` (serializable with :meth:`to_dict`)."""

    verdict: str
    nd: NDReport
    ratios: list[tuple[float, float]] = field(default_factory=list)
    refinement: list[tuple[int, float]] = field(default_factory=list)
    exact: list[tuple[float, float]] = field(default_factory=list)
    D0: float = 0.0
    trace: DecayTrace | None = None
    counterexample: TrigPoly | None = None

    @property
    def passed(self) -> bool:
        return self.verdict in ("decay-confirmed", "no-decay-confirmed")

    def to_dict(self) -> dict:
        from .schema import nd_report_to_json, trigpoly_to_json
        out = {
            "verdict": self.verdict,
            "nd": nd_report_to_json(self.nd),
            "D0": self.D0,
            "ratios": [{"t": t, "ratio": r} for t, r in self.ratios],
            "refinement": [{"N": n, "D_T": d} for n, d in self.refinement],
        }
        if self.exact:
            out["exact"] = [{"t": t, "D": d} for t, d in self.exact]
        if self.counterexample is not None:
            out["counterexample"] = trigpoly_to_json(self.counterexample)
        return out


def _check_group(G: FreqGroup, p: TrigPoly):
    if p.terms and (G.base != p.base or G.n != p.dims):
        raise ConfigError("group and data live over different bases or dimensions")
    for lam in spectrum(p):
        if not member(G, lam)[0]:
            raise ConfigError(f"spectral line {lam!r} is not in the given group")


def _profile_along(p: TrigPoly, xi) -> TrigPoly | None:
    """``W`` with ``p(x) = W(xi.x)`` when every line of ``p`` is a rational multiple of ``xi``."""
    from .specgroup import QBasis
    qb = QBasis([xi])
    out = {}
    for lam, a in p.terms.items():
        c = qb.coords(lam, strict=False)
        if c is None:
            return None
        out[Frequency.scalar(c[0])] = a
    return TrigPoly(rational_base(), 1, out)._resym(p.real_valued)


def _default_profile(interval) -> TrigPoly:
    """``c + A sin(2 pi s)`` centred in the affine interval, half its half-width."""
    a, b = (Fraction(v) for v in interval)
    c = (a + b) / 2
    A = min(Fraction(1), (b - a) / 4)
    return TrigPoly.constant(c) + TrigPoly.sin(1, amp=A)


def exact_decay(wave: TravelingWave, times: Sequence[float]) -> list[tuple[float, float]]:
    """``N1(u(t) - C)`` of the exact traveling wave at the given times."""
    u0 = wave.initial()
    C = mean_value(u0).real
    out = []
    for t in times:
        ut = wave.at(t) - C
        out.append((float(t), besicovitch_norm(ut, LiftSpec.for_poly(ut)) if ut.terms else 0.0))
    return out


def refinement_sequence(p: TrigPoly, phi: PiecewiseFlux, cfg: RunConfig,
                        grids: Sequence[int]) -> list[tuple[int, float]]:
    lift = LiftSpec.for_poly(p)
    out = []
    for N in grids:
        run = solve(p, lift, phi, replace(cfg, grid=N, snapshots=(), entropy_k=0))
        out.append((int(N), run.steps[-1].D))
    return out


def decay_experiment(phi: PiecewiseFlux, G: FreqGroup, p: TrigPoly, cfg: RunConfig,
                     threshold: float = 0.1, refinement: Sequence[int] = (256, 512, 1024),
                     sample_times: Sequence[float] | None = None,
                     profile: TrigPoly | None = None) -> DecayVerdict:
    """Run the decay test that matches the non-degeneracy verdict.

    If ND holds the data is solved to ``cfg.T`` and ``D(T)/D(0)`` must fall
    below ``threshold``.  If ND fails, a traveling wave along the witness
    direction is built (from ``p`` itself when it already depends on
    ``xi.x`` only) and its exact ``D(t)`` is checked to stay at ``D(0)``; the
    scheme only supplies a refinement sequence ``D(T)`` for growing grids.
    """
    if phi.dims != G.n:
        raise ConfigError(f"flux has {phi.dims} components but the group lives in R^{G.n}")
    _check_group(G, p)
    report = nd_check(phi, G)
    if report.holds:
        lift = LiftSpec.for_poly(p)
        run = solve(p, lift, phi, cfg)
        tr = decay_trace(run)
        D0 = float(tr.D[0])
        snaps = sorted({float(s.t) for s in run.snapshots} - {0.0})
        ratios = [(t, 0.0 if D0 == 0 else tr.at(t) / D0) for t in snaps]
        ok = tr.ratio <= threshold and not tr.violations()
        return DecayVerdict("decay-confirmed" if ok else "decay-not-confirmed", report, ratios,
                            D0=D0, trace=tr)

    w = report.witness
    W = profile
    if W is None:
        W = _profile_along(p, w.xi) if p.terms else None
        if W is not None:
            lo, hi = trig_range(W, LiftSpec.for_poly(W)) if W.terms else (0.0, 0.0)
            if lo < float(w.interval[0]) or hi > float(w.interval[1]):
                W = None
        if W is None:
            W = _default_profile(w.interval)
    u0, wave = make_counterexample(phi, report, W)
    times = list(sample_times) if sample_times is not None else [1.0, 5.0, 10.0]
    exact = exact_decay(wave, [0.0] + times)
    D0 = exact[0][1]
    const = all(abs(d - D0) <= EXACT_TOL for _, d in exact)
    refine = refinement_sequence(u0, phi, cfg, refinement) if refinement and cfg.T > 0 else []
    trend = all(b[1] >= a[1] for a, b in zip(refine, refine[1:])) and all(d <= D0 + 1e-9 for _, d in refine)
    verdict = "no-decay-confirmed" if const and trend else "no-decay-not-confirmed"
    ratios = [(t, 1.0 if D0 == 0 else d / D0) for t, d in exact[1:]]
    return DecayVerdict(verdict, report, ratios, refine, exact, D0=D0, counterexample=u0)


__all__ = [
    "DecayTrace", "decay_trace", "ContractionSeries", "contraction_check", "DecayVerdict",
    "decay_experiment", "exact_decay", "refinement_sequence",
]
