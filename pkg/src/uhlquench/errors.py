"""Exception hierarchy shared by every module."""


class UhlquenchError(Exception):
    """Base class for all package errors."""


class NonHermitianError(UhlquenchError, ValueError):
    """Matrix expected to be Hermitian deviates beyond tolerance."""

    def __init__(self, asymmetry: float, tol: float):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(
            f"matrix is not Hermitian: relative asymmetry {asymmetry:.3e} > {tol:.1e}"
        )


class NonAntiHermitianError(UhlquenchError, ValueError):
    """Connection sample violates A + A^dagger = 0."""


class RankDeficientError(UhlquenchError, ValueError):
    """Density matrix has an eigenvalue below the full-rank floor."""


class PhaseUndefinedError(UhlquenchError, ArithmeticError):
    """Argument of a (near-)vanishing complex number was requested."""


class InconsistentHolonomyError(UhlquenchError, ValueError):
    """Holonomy does not belong to the scenario/time it was paired with."""


class UnsupportedProtocolError(UhlquenchError, ValueError):
    """Scenario lies outside the family the product-form protocol covers."""


class CyclicityError(UhlquenchError, ValueError):
    """No period with rho(tau) = rho(0) was found."""


class NumericalInvariantError(UhlquenchError, AssertionError):
    """An identity that must hold exactly was violated numerically."""


class ConfigError(UhlquenchError, ValueError):
    """Invalid run configuration."""
