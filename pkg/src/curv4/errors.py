"""Exception hierarchy.

Input problems (bad syntax, unknown names, malformed manifests) and numeric
failures (non-SPD metric, domain violations) are kept apart so the CLI can map
them to distinct exit codes.
"""


class Curv4Error(Exception):
    """Base class for every error raised by curv4."""


class InputError(Curv4Error, ValueError):
    """Malformed user input."""


class NumericError(Curv4Error, ArithmeticError):
    """A computation could not be carried out at the requested point."""


class ExprSyntaxError(InputError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(InputError):
    pass


class ArityError(InputError):
    pass


class MissingParameterError(InputError):
    pass


class UnknownTargetError(InputError):
    pass


class DomainViolation(NumericError):
    pass


class NonSPDMetricError(NumericError):
    pass


class BoundaryMarginError(NumericError):
    pass


class NotTraceFreeError(InputError):
    pass


class NonHarmonicWeylError(NumericError):
    pass


class NonCompactError(InputError):
    pass


class ZeroLocusError(NumericError):
    """Every sample point fell inside the zero-locus guard."""
