"""Error taxonomy shared by all modules, with stable CLI exit codes."""


class SolitonError(Exception):
    """Base class for all toolkit errors."""


class SingularMatrix(SolitonError):
    """2x2 matrix inverse requested for a numerically singular matrix."""


class PoleCollision(SolitonError):
    """Two poles coincide within the merge tolerance but are not identical."""


class OrderOverflow(SolitonError):
    """A pole order would exceed the truncation bound of the algebra."""


class NearPole(SolitonError):
    """Evaluation point too close to a pole of the rational function."""


class DomainError(SolitonError):
    """Input lies outside the domain an operation is defined on."""


class ZeroEigenvector(SolitonError):
    """Dressing eigenvector vanished; the transform is degenerate."""


class RealityViolation(SolitonError):
    """Reality condition violated beyond tolerance with parity enforced."""


class FitResidualTooLarge(SolitonError):
    """Rational fit residual exceeds tolerance; pole structure violated."""


class InvalidFunctional(SolitonError):
    """Functional identifier not valid for the given truncation."""


class OmegaZero(SolitonError):
    """Field evaluation at omega = 0 where the limit is not removable."""


class NonConvergent(SolitonError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class StepOverflow(SolitonError):
    """Flow integration produced nonfinite values."""


# One documented exit code per error class (see README).
EXIT_CODES = {
    "usage": 2,
    PoleCollision: 3,
    RealityViolation: 4,
    OrderOverflow: 5,
    NearPole: 6,
    SingularMatrix: 7,
    ZeroEigenvector: 8,
    FitResidualTooLarge: 9,
    DomainError: 10,
    InvalidFunctional: 11,
    OmegaZero: 12,
    NonConvergent: 13,
    StepOverflow: 14,
    "check_failed": 20,
}


def exit_code_for(exc):
    """Map an exception instance to its documented CLI exit code."""
    for cls, code in EXIT_CODES.items():
        if isinstance(cls, type) and isinstance(exc, cls):
            return code
    return 1
