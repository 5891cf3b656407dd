"""Exception hierarchy."""


class SetLatError(Exception):
    """Base class for all package errors."""


class DimensionError(SetLatError, ValueError):
    pass


class ConeMembershipError(SetLatError, ValueError):
    """A vector that must lie in a (dual) cone does not."""


class IndeterminateError(SetLatError, ArithmeticError):
    """Raised for the undefined sum (+inf) + (-inf)."""


class VerificationError(SetLatError):
    """A mathematical identity that must hold was found violated.

    ``witness`` carries whatever data falsified the claim.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
