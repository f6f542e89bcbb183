"""Exception hierarchy shared by every deepcore module."""


class DeepcoreError(Exception):
    """Base class for all library errors."""


class DimensionError(DeepcoreError, ValueError):
    """Shapes do not agree, or d >= n where the algorithm needs d < n."""


class DegeneracyDetected(DeepcoreError):
    """The data violate general position in a way the caller must resolve."""


class ZeroProjection(DegeneracyDetected):
    """A point projects to (numerically) zero on a direction."""

    def __init__(self, index, value=0.0):
        super().__init__(f"point {index} has zero projection ({value:.3g})")
        self.index = index
        self.value = value


class ExhaustedRetries(DegeneracyDetected):
    """No admissible random direction was found within the retry budget."""


class NumericallyAmbiguous(DegeneracyDetected):
    """The LP verdict could not be certified in floating point."""


class IterationLimit(DeepcoreError):
    """The simplex method hit its iteration cap."""


class Unrealizable(DeepcoreError):
    """A cone code has no interior direction."""


class AllZeroDepths(DeepcoreError, ValueError):
    """Every depth in a depth field is zero, so no weighted mean exists."""
