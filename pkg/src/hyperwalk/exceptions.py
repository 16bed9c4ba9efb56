"""Exception hierarchy shared by all hyperwalk modules."""


class HyperwalkError(Exception):
    """Base class for all errors raised by hyperwalk."""


class ParamDomain(HyperwalkError, ValueError):
    """Parameters outside the admissible domain (phi + gamma < 1, or not probabilities)."""


class ParamDegenerate(HyperwalkError, ValueError):
    """Parameters at a degenerate point where the model is undefined."""


class LengthMismatch(HyperwalkError, ValueError):
    """Two states (or a state and a model) have different lengths."""


DimensionMismatch = LengthMismatch


class AlphaDegenerate(HyperwalkError, ValueError):
    """Krawtchouk parameter at 0 or 1."""


class KappaOutOfRange(HyperwalkError, ValueError):
    """Single-coordinate eigenvalue outside the admissible interval."""


class NonStochastic(HyperwalkError, ValueError):
    """A kernel row has a materially negative entry."""


class NotRealizable(HyperwalkError, ValueError):
    """An eigenvalue family is not generated by any latent law."""


class InvalidCounts(HyperwalkError, ValueError):
    """Transition statistics are inconsistent with the dimension."""


class NotLumpable(HyperwalkError, ValueError):
    """The Hamming-weight partition does not give a Markov chain."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class Reducible(HyperwalkError, ValueError):
    """The kernel is reducible or periodic, so the stationary law is not unique."""


class TooLarge(HyperwalkError, ValueError):
    """Dimension exceeds the cap for dense or brute-force computation."""


class Boundary(HyperwalkError, ValueError):
    """Computation requires phi + gamma > 1 (or phi != gamma) strictly."""


class ThetaBoundary(HyperwalkError, ValueError):
    """Latent frequency at 0 or 1 where the formula is undefined."""


class DegenerateTransition(HyperwalkError, ValueError):
    """A transition has no coordinates in state 0 or no coordinates in state 1."""

    def __init__(self, message, transitions=()):
        super().__init__(message)
        self.transitions = list(transitions)


class NoVariation(HyperwalkError, ValueError):
    """The regressor d[t] is constant, so phi and gamma are not separately identified."""


class AllZeroCounts(HyperwalkError, ValueError):
    """No transitions available in a count table."""


class BoundaryEstimate(HyperwalkError, ValueError):
    """The likelihood is maximised on the boundary of (0, 1)."""


class TooFewEstimates(HyperwalkError, ValueError):
    """Not enough converged estimates for a distribution summary."""


class ConfigError(HyperwalkError, ValueError):
    """Malformed configuration."""


class TruncationWarning(UserWarning):
    """A truncated series produced a materially negative density value."""


class ProbabilityRange(HyperwalkError, ArithmeticError):
    """An iterated probability left [0, 1] by more than the clamping tolerance."""


class PathFormatError(HyperwalkError, ValueError):
    """A path file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
