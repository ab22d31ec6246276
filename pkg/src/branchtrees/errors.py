"""Exception hierarchy.

Two broad groups: ``InputError`` covers anything a caller got wrong
(bad law files, violated preconditions, unusable parameters) and maps to
CLI exit code 2; ``VerificationError`` marks a numeric check that ran but
failed its tolerance and maps to exit code 1.
"""


class BranchTreesError(Exception):
    """Base class for all package errors."""


class InputError(BranchTreesError):
    """Caller-side problem: bad data, bad flag, violated precondition."""


class NonProbabilityError(InputError):
    """Masses do not form a probability distribution."""


class BadAgesError(InputError):
    """Bearing ages empty, non-positive, non-integer or decreasing."""


class LawParseError(InputError):
    """Law file could not be parsed; carries line/field location."""

    def __init__(self, message, *, line=None, field=None, source=None):
        self.line = line
        self.field = field
        self.source = source
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NoReproductionError(InputError):
    """Law has zero mean offspring; the growth-rate equation has no root."""


class NotDivisibleError(InputError):
    """Time rescaling asked for a divisor that does not divide every age."""


class NotSupercriticalError(InputError):
    """Operation requires mean offspring strictly above one."""


class NotMalthusianError(InputError):
    """Supplied alpha fails to normalize the tilted life law."""


class AlphaMissingError(InputError):
    """A growth rate is required but was not supplied or solvable."""


class PeriodicError(InputError):
    """Law has period > 1; the requested check needs period 1."""


class DivergesError(InputError):
    """Requested series diverges for the supplied parameters."""


class AllExtinctError(BranchTreesError):
    """Every replicate died out; no survivor statistics exist."""


class DepthBudgetError(BranchTreesError):
    """Tree growth exceeded the configured vertex budget."""


class AtlasTooLargeError(BranchTreesError):
    """Exact enumeration exceeded the configured entry cap."""


class ToleranceNotReachedError(BranchTreesError):
    """Iterative solver hit its iteration cap before the tolerance."""


class VerificationError(BranchTreesError):
    """A numeric verification ran and exceeded its tolerance."""
