class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class InvalidYoungError(ValueError):
    """A family fails the Young-function requirements on the sampled grid."""


class AdmissibilityError(ValueError):
    """Growth indices do not satisfy the hypotheses of the operator estimates."""


class BracketError(RuntimeError):
    """A monotone root bracket could not be established."""


class NormInfiniteError(RuntimeError):
    """The modular never drops below one."""


class ConvergenceError(RuntimeError):
    """An iterative solver stalled or ran out of iterations."""


class ConfigError(ValueError):
    """Run configuration failed validation."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
