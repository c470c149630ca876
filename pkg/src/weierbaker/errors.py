"""Exception taxonomy used across the package.

Every failure mode callers are expected to branch on gets its own class;
nothing in the numerical core fails silently.
"""


class DomainError(ValueError):
    """An argument lies outside the operation's mathematical domain."""


class PrecisionError(ArithmeticError):
    """The requested computation exceeds the available dyadic depth or
    the data cannot support the requested resolution."""


class DegenerateInputError(ValueError):
    """Inputs coincide where a difference (or a division by it) is required."""


class OutOfValidityError(ValueError):
    """The roughness parameter lies outside the range a statement is proved for."""


class IndeterminateSignError(ArithmeticError):
    """An enclosure straddles zero where a definite sign is required."""


class BracketError(ValueError):
    """Function values at the bracket endpoints do not enclose a sign change."""


class CaseConstraintError(ValueError):
    """A jump-time choice violates the constraints of the requested case row."""


class CertificateUnavailableError(RuntimeError):
    """A certified precondition (shape or sign certificate) is not available
    for the requested roughness, so the operation refuses to run."""
