class TransitAgesError(Exception):
    """Base error; `detail` is the human-readable message, `exit_code` the CLI status."""

    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# ----------------------------
# Parse / configuration (exit 1)
# ----------------------------
class ConfigurationError(TransitAgesError):
    exit_code = 1


class ArgumentError(TransitAgesError):
    exit_code = 1


class DomainError(TransitAgesError):
    """Evaluation time outside the open interval (tau, inf)."""

    exit_code = 1


# ----------------------------
# Numerical failures (exit 2)
# ----------------------------
class NumericalError(TransitAgesError):
    exit_code = 2


class SingularMatrixError(NumericalError):
    pass


class StiffnessError(NumericalError):
    pass


class StepBudgetError(NumericalError):
    pass


class DegenerateMassError(NumericalError):
    pass


class NoOutflowError(NumericalError):
    pass


class ZeroMassError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class NonPositiveEquilibriumError(NumericalError):
    pass


# ----------------------------
# Validation failures (exit 3)
# ----------------------------
class ValidationFailure(TransitAgesError):
    exit_code = 3

    def __init__(self, detail: str, report=None):
        super().__init__(detail)
        self.report = report
