"""Numerics for Hilfer-Hadamard fractional Cauchy problems."""

__version__ = "0.1.0"

from .bounds import (
    GronwallInput,
    PerturbationSpec,
    epsilon_ml_bound,
    gronwall_series_bound,
    hadamard_dependence_envelope,
    hilfer_dependence_envelope,
)
from .config import ProblemSpec, parse_problem_spec, serialize_problem_spec
from .errors import (
    ConvergenceError,
    DomainError,
    EvaluationError,
    ExpressionSyntaxError,
    HadamardFDEError,
    PlanningError,
    ShapeError,
    SpecParseError,
    UnknownIdentifierError,
    ValidationError,
)
from .experiments import (
    ExperimentReport,
    epsilon_perturbation_experiment,
    grid_convergence_study,
    linear_closed_form,
    order_perturbation_experiment,
)
from .expression import RhsExpression, parse_rhs_expression
from .grid import FractionalOrder, LogGrid, WeightedSamples, weighted_norm
from .operators import (
    hadamard_derivative,
    hadamard_integral,
    hilfer_hadamard_derivative,
    power_log_integral_closed_form,
)
from .rhs import ConstantRhs, ExpressionRhs, LinearRhs, SaturatingRhs
from .solver import (
    CauchyProblem,
    SolverReport,
    SubdivisionPlan,
    apply_picard_operator,
    assemble_initial_term,
    plan_subdivision,
    solve_cauchy,
    vie_residual,
)
from .special import MLParams, log_gamma, mittag_leffler
