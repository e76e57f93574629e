"""Second-order cone approximations of the exponential cone for mixed-integer solving.

The exponential cone {(x1, x2, x3): x1 >= x2 exp(x3 / x2), x2 > 0} is replaced
either by a lifted block of Lorentz cones (log-form quadrature schemes or
exp-form squaring schemes) or by polyhedral gradient cuts, so that
mixed-integer exponential conic programs can be solved with SOC or LP machinery.
"""

from .errors import (ComputationError, DomainError, EmissionError, EvaluationError, ExpconeError,
                     IngestionError, ParameterError, PrecisionWarning, ProcedureError, SolverError,
                     UnsupportedError)
from .exp_schemes import (ExpSchemeSpec, SosDecomposition, exp_approx_value, levels_needed_exp,
                          sos_coefficients)
from .lift import (AccuracyReport, BestScaleResult, SchemeSpec, best_scale, certified_scheme,
                   lift, lifted_block, reformulate, verify_sandwich)
from .log_schemes import GenFnSpec, log_approx_value, log_error_bound, points_needed_log
from .model import (AffineExpr, ExpConeConstraint, Integrality, LinearRow, LorentzRow, ModelBuilder,
                    ModelIR, Sense, Variable, validate)
from .outer import OuterPolyhedron, gradient_cut, outer_polyhedron, separating_cut
from .quadrature import QuadratureRule, gauss_legendre
from .solve import MipResult, Status, branch_and_cut, cutting_plane, solve_miecp

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport", "AffineExpr", "BestScaleResult", "ComputationError", "DomainError",
    "EmissionError", "EvaluationError", "ExpConeConstraint", "ExpSchemeSpec", "ExpconeError",
    "GenFnSpec", "IngestionError", "Integrality", "LinearRow", "LorentzRow", "MipResult",
    "ModelBuilder", "ModelIR", "OuterPolyhedron", "ParameterError", "PrecisionWarning", "ProcedureError",
    "QuadratureRule", "SchemeSpec", "Sense", "SolverError", "SosDecomposition", "Status",
    "UnsupportedError", "Variable", "best_scale", "branch_and_cut", "certified_scheme",
    "cutting_plane", "exp_approx_value", "gauss_legendre", "gradient_cut", "levels_needed_exp",
    "lift", "lifted_block", "log_approx_value", "log_error_bound", "outer_polyhedron",
    "points_needed_log", "reformulate", "separating_cut", "solve_miecp", "sos_coefficients",
    "validate", "verify_sandwich",
]
