"""Exception types shared across the package."""


class QglabError(Exception):
    """Base class for package-specific failures."""


class GraphConstructionError(QglabError):
    """Randomized graph construction exhausted its attempt budget."""


class ConvergenceError(QglabError):
    """An iterative solver did not converge within its budget.

    May carry a partial result in the ``partial`` attribute.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class IllConditionedResolvent(QglabError):
    """Spectral gap below the configured floor; the deflated solve is unsafe."""


class SpectralInconsistency(QglabError):
    """A matrix-side value disagrees with its eigenvalue-side cross-check."""


class AssemblyError(QglabError):
    """An assembled operator violates a structural invariant (e.g. bistochasticity)."""


class NotInvertible(QglabError):
    """Grassmann element or supermatrix has a singular numeric part."""


class RescaleRequired(QglabError):
    """Series evaluation would diverge; scale the inputs down first."""


class ActionUndefined(QglabError):
    """Moebius action denominator is singular at the given point."""
