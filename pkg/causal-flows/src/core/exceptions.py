class BaseEngineException(Exception):
    exit_code: int = 1
    message: str = "An error occurred"
    detail: str = "An unexpected error occured."
    status: bool = False

    def __init__(self, message: str | None = None, detail: str | None = None):
        super().__init__(message or self.message)
        self.message = message or self.message
        self.detail = detail or self.detail

    @property
    def code(self) -> str:
        return type(self).__name__

    def as_record(self) -> dict[str, object]:
        return {
            "status": self.status,
            "error": self.code,
            "message": self.message,
            "detail": self.detail,
            "exit_code": self.exit_code,
        }


class InputError(BaseEngineException):
    exit_code = 2
    message = "Invalid input"
    detail = "Invalid input provided."


class NumericalError(BaseEngineException):
    exit_code = 1
    message = "Numerical failure"
    detail = "A numerical routine failed to produce a finite result."


# graph

class CycleDetected(InputError):
    message = "Cycle detected"
    detail = "The parent relation must be acyclic."


class UnknownVariable(InputError):
    message = "Unknown variable"


class DuplicateVariable(InputError):
    message = "Duplicate variable"


class MalformedLine(InputError):
    message = "Malformed line"


class RegimeReferenceError(InputError):
    message = "Invalid regime reference"
    detail = "FromRegime must point to an earlier regime label."


# nn / quadrature

class InvalidArchitecture(InputError):
    message = "Invalid architecture"
    detail = "Every layer size must be a positive integer."


class ShapeMismatch(InputError):
    message = "Shape mismatch"


class InvalidNodeCount(InputError):
    message = "Invalid quadrature node count"
    detail = "A Clenshaw-Curtis rule needs at least one node."


class NonFiniteEvaluation(NumericalError):
    message = "Non-finite evaluation"


# flow

class SigmaNotPositiveDefinite(NumericalError):
    message = "Sigma_Z is not positive definite"


class BracketNotFound(NumericalError):
    message = "Inversion bracket not found"
    detail = "The normalizer could not bracket the target after 200 doublings."


# train / data

class ParseError(InputError):
    message = "Parse error"


class MissingColumn(InputError):
    message = "Missing column"


class NonNumericCell(InputError):
    message = "Non-numeric cell"


class DegenerateColumn(InputError):
    message = "Degenerate column"
    detail = "A column with zero standard deviation cannot be standardized."


class NonFiniteLoss(NumericalError):
    message = "Training diverged"


# estimands / bench

class InvalidMediatorOrder(InputError):
    message = "Invalid mediator order"


class EmptyConditioningSet(NumericalError):
    message = "Empty conditioning set"
    detail = "No Monte Carlo sample satisfied the conditioning clause."


class UnsupportedEstimand(InputError):
    message = "Unsupported estimand"


# cli

class SchemaMismatch(InputError):
    message = "Schema mismatch"


class InputFileNotFound(InputError):
    message = "File not found"


class ConfigError(InputError):
    message = "Invalid configuration"


class InvalidInterventionValue(InputError):
    message = "Invalid intervention value"
