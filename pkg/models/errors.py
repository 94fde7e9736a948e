"""
Error Types for the Repeater Model
Every failure raised by the models carries a message and the offending values
"""


class RepeaterError(Exception):
    """Base class for all model errors"""
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self):
        if not self.details:
            return self.message
        extra = ', '.join(f'{key}={value!r}' for key, value in sorted(self.details.items()))
        return f'{self.message} ({extra})'

    def __repr__(self):
        return f'<{type(self).__name__} {self.message}>'


class ConfigError(RepeaterError):
    """Invalid configuration file, environment override or flag"""
    exit_code = 2


class DomainError(RepeaterError, ValueError):
    """Argument outside the physical or perturbative domain"""
    exit_code = 2


class InvalidInputError(RepeaterError, ValueError):
    """Structurally valid argument that violates a precondition"""
    exit_code = 2


class ContractError(RepeaterError):
    """Caller handed over data in the wrong state (e.g. unnormalized coefficients)"""
    exit_code = 2


class UnsupportedProfileError(RepeaterError):
    """Drive profile the operation has no kernel for"""
    exit_code = 2


class ZeroAmplitudeError(RepeaterError):
    """The drive produces no photon pairs"""
    exit_code = 2


class InfeasibleError(RepeaterError):
    """No parameter inside the search bracket reaches the target"""
    exit_code = 3


class NumericalError(RepeaterError):
    """Quadrature or discretisation failed its own accuracy check"""
    exit_code = 4


class UndefinedFidelityError(NumericalError):
    """Post-selection probability vanishes so the fidelity has no value"""
