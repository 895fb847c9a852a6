"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (a ``ValueError``);
failures of an otherwise valid numerical computation derive from
:class:`NumericalError`.  The CLI maps the two families to distinct exit codes.
"""


class KDStabError(Exception):
    """Base class for all package errors."""


class ValidationError(KDStabError, ValueError):
    """Invalid parameters or configuration."""


class SingularInverseModeError(ValidationError):
    """A retained Fourier mode has |n + tau| below the inverse-derivative floor."""


class TruncationTooSmallError(ValidationError):
    """The Hill truncation cannot represent the products of the wave profile."""


class NumericalError(KDStabError, RuntimeError):
    """A numerical procedure failed on valid input."""


class NonConvergenceError(NumericalError):
    """Newton iteration hit its iteration cap."""


class SingularJacobianError(NumericalError):
    """The Newton Jacobian is singular to working precision."""


class EigensolverFailure(NumericalError):
    """The dense eigensolver did not return a full set of finite eigenvalues."""


class NoBracketError(NumericalError):
    """No numerically unstable point was found where a band edge was sought."""
