from transit_ages.core.errors import (
    ArgumentError,
    ConfigurationError,
    DegenerateMassError,
    DomainError,
    NoOutflowError,
    NonPositiveEquilibriumError,
    NumericalError,
    QuadratureError,
    SingularMatrixError,
    StepBudgetError,
    StiffnessError,
    TransitAgesError,
    ValidationFailure,
    ZeroMassError,
)
from transit_ages.core.forcing import ScalarForcing, register_builtin, registered_builtins
from transit_ages.core.system import CompartmentalSystem, TimeDomain, default_sample_times, evaluate
from transit_ages.core.validation import (
    BlockStructure,
    ComplianceReport,
    FailedCondition,
    StabilityCertificate,
    Violation,
    certify_stability,
    check_compartmental,
    check_mean_age_stability,
    detect_blocks,
)
