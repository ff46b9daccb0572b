"""Workbench for multi-setting Bell inequalities.

Exact local-hidden-variable bounds and root spectra, facet verification,
root-constrained synthesis, see-saw violation optimization, threshold
visibility, relabeling equivalence and relevance testing, plus a fixture
catalog and a command-line front end.
"""

from .scenario import (
    BellExpression,
    CorrelationExpression,
    DeterministicStrategy,
    EnumerationLimitError,
    ExpressionError,
    ProbabilityExpression,
    RootSpectrum,
    Scenario,
    canonical_key,
    canonicalize,
    correlation_from_matrix,
    correlation_to_probability,
    default_limit,
    enumerate_strategies,
    mod_form_to_joint,
)
from .io import ParseError, expression_to_document, parse_expression, serialize_expression
from .polytope import (
    FacetVerdict,
    check_tightness,
    classical_bounds,
    polytope_dimension,
    root_spectrum,
    saturating_vertices,
)
from .quantum import (
    DimensionError,
    Measurements,
    NoViolationError,
    QuantumState,
    ViolationResult,
    VisibilityResult,
    bell_operator,
    chsh_horodecki,
    fixed_state_max,
    haar_unitary,
    isotropic_mixture,
    joint_probability_table,
    max_entangled,
    max_violation,
    pure_state,
    quantum_value,
    schmidt_coefficients,
    schmidt_state,
    threshold_visibility,
)
from .relevance import (
    EquivalenceVerdict,
    OptimizationBudget,
    RelabelingMap,
    RelevanceWitness,
    apply_relabeling,
    equivalence_check,
    relabeling_group_size,
    relevance_search,
    sample_state,
    verify_witness,
)
from .synthesis import (
    Ansatz,
    SynthesisQuery,
    correlation_ansatz,
    enumerate_candidates,
    mod_ansatz,
    verify_root_membership,
)
from .family import FamilySpec, family_report, generate_even, reduce_odd
from . import fixtures

__version__ = "0.1.0"

__all__ = [
    "Ansatz",
    "BellExpression",
    "CorrelationExpression",
    "DeterministicStrategy",
    "DimensionError",
    "EnumerationLimitError",
    "EquivalenceVerdict",
    "ExpressionError",
    "FacetVerdict",
    "FamilySpec",
    "Measurements",
    "NoViolationError",
    "OptimizationBudget",
    "ParseError",
    "ProbabilityExpression",
    "QuantumState",
    "RelabelingMap",
    "RelevanceWitness",
    "RootSpectrum",
    "Scenario",
    "SynthesisQuery",
    "ViolationResult",
    "VisibilityResult",
    "apply_relabeling",
    "bell_operator",
    "canonical_key",
    "canonicalize",
    "check_tightness",
    "chsh_horodecki",
    "classical_bounds",
    "correlation_ansatz",
    "correlation_from_matrix",
    "correlation_to_probability",
    "default_limit",
    "enumerate_candidates",
    "enumerate_strategies",
    "equivalence_check",
    "expression_to_document",
    "family_report",
    "fixed_state_max",
    "fixtures",
    "generate_even",
    "haar_unitary",
    "isotropic_mixture",
    "joint_probability_table",
    "max_entangled",
    "max_violation",
    "mod_ansatz",
    "mod_form_to_joint",
    "parse_expression",
    "polytope_dimension",
    "pure_state",
    "quantum_value",
    "reduce_odd",
    "relabeling_group_size",
    "relevance_search",
    "root_spectrum",
    "sample_state",
    "saturating_vertices",
    "schmidt_coefficients",
    "schmidt_state",
    "serialize_expression",
    "threshold_visibility",
    "verify_root_membership",
    "verify_witness",
    "quantum_value",
]
