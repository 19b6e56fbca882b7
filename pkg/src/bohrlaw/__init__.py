"""Almost periodic entropy solutions of scalar conservation laws.

Exact-frequency trigonometric polynomials, their spectral groups,
Bochner-Fejér summation, the non-degeneracy test for fluxes and a monotone
torus-lift solver with decay diagnostics.
"""

__version__ = "0.1.0"

from .apcore import (Bump, Frequency, MeanEstimate, RealBase, TrigPoly, besicovitch_norm,
                     bohr_fourier, cube_average, ess_sup, evaluate, excess_mean, mean_value,
                     numeric_mean, rational_base, scaled_average, trig_range)
from .diagnostics import DecayTrace, contraction_check, decay_experiment, decay_trace
from .errors import (BaseMismatchError, BohrLawError, CFLError, ConfigError, ContinuityError,
                     DomainError, InputError, LatticeError, SpanError)
from .fejer import FejerPlan, bochner_fejer, fejer_weights, kernel_eval, kernel_poly
from .flux import PiecewiseFlux, lipschitz_constant, make_counterexample, nd_check
from .lift import LiftSpec
from .solver import (CellField, LiftedFlux, RunConfig, entropy_residual, lift_initial,
                     restrict_to_line, solve, solve_pair, step)
from .specgroup import FreqGroup, QBasis, group_generated, hnf, member, qlinear_basis, spectrum

__all__ = [
    "Bump", "Frequency", "MeanEstimate", "RealBase", "TrigPoly", "besicovitch_norm", "bohr_fourier",
    "cube_average", "ess_sup", "evaluate", "excess_mean", "mean_value", "numeric_mean",
    "rational_base", "scaled_average", "trig_range", "DecayTrace", "contraction_check",
    "decay_experiment", "decay_trace", "BaseMismatchError", "BohrLawError", "CFLError",
    "ConfigError", "ContinuityError", "DomainError", "InputError", "LatticeError", "SpanError",
    "FejerPlan", "bochner_fejer", "fejer_weights", "kernel_eval", "kernel_poly", "PiecewiseFlux",
    "lipschitz_constant", "make_counterexample", "nd_check", "LiftSpec", "CellField", "LiftedFlux",
    "RunConfig", "entropy_residual", "lift_initial", "restrict_to_line", "solve", "solve_pair",
    "step", "FreqGroup", "QBasis", "group_generated", "hnf", "member", "qlinear_basis", "spectrum",
    "__version__",
]
