"""Numerical resummation of divergent power series.

Formal ODE solutions, optimal truncation, Borel-Laplace summation with Padé
continuation, Stokes directions and the unfolding ``(x^2 - eps) y' + y = g``.
"""

from .errors import *  # noqa: F401,F403
from .series_core import (
    BorelSeries,
    FormalSeries,
    borel_transform,
    cauchy_product,
    estimate_radius,
    euler_formal_coeffs,
    eval_partial_sum,
    formal_derivative,
    generalized_euler_coeffs,
    shift_offset,
)
from .exact_oracle import QuadratureResult, Ray, euler_exact, laplace_along_ray, ode_continue
from .truncation import (
    TruncationReport,
    optimal_k,
    remainder_bound,
    remainder_integral,
    stirling_approx,
    superasymptotic_estimate,
    truncation_sweep,
)
from .borel_engine import (
    PadeApproximant,
    StokesReport,
    SummationResult,
    borel_sum,
    detect_stokes,
    pade_fit,
    stokes_jump,
)
from .axioms import AxiomReport, NumericSeries, borel_sum_numeric, run_axiom_suite
from .unfolding import (
    ConnectionReport,
    LocalSolution,
    UnfoldingConfig,
    connection_coefficient,
    local_series_minus,
    local_series_plus,
    monodromy_defect,
    resonance_set,
    unfolding_sweep,
)

__version__ = "0.1.0"
