"""Exception hierarchy shared by the solver modules."""


class RPHError(Exception):
    """Base class for all solver errors."""


class SystemParseError(RPHError):
    """The system text is malformed."""


class DimensionError(RPHError):
    """The system is not square."""


class DegenerateSystemError(RPHError):
    """A polynomial has fewer than two terms."""


class DegenerateLiftingError(RPHError):
    """A lifting induces a tie in a facet inequality (not generic)."""


class GenericityError(RPHError):
    """Random liftings kept failing to be generic."""


class LiftingOverflowError(RPHError, OverflowError):
    """Scaled lifting value is outside the exact-integer range of a double."""


class SingularExponentError(RPHError):
    """Binomial exponent matrix is singular."""


class SingularJacobianError(RPHError):
    """Jacobian is numerically singular."""


class ConventionViolationError(RPHError):
    """Homotopy exponents are negative: the cell does not match the lifting."""
