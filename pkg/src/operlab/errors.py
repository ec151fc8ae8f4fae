"""Exception types shared across operlab modules."""


class OperlabError(Exception):
    """Base class for all operlab failures."""


class InvalidConfig(OperlabError, ValueError):
    pass


class PreconditionError(OperlabError, ValueError):
    pass


class PoleError(OperlabError, ZeroDivisionError):
    """Evaluation at a pole; ``location`` holds the offending argument."""

    def __init__(self, location, message=None):
        self.location = location
        super().__init__(message or f"pole at {location!r}")


class NonConvergence(OperlabError, ArithmeticError):
    def __init__(self, message, values=None):
        self.values = values
        super().__init__(message)


class NonDiagonalizable(OperlabError):
    def __init__(self, message, jordan_blocks=None):
        self.jordan_blocks = jordan_blocks or []
        super().__init__(message)


class Incomplete(OperlabError):
    """Fewer Bethe solutions found than expected."""

    def __init__(self, found, expected, solutions=None):
        self.found = found
        self.expected = expected
        self.solutions = solutions or []
        super().__init__(f"found {found} Bethe solutions, expected {expected}")


class ZeroVector(OperlabError):
    pass


class ConstraintViolation(OperlabError, ValueError):
    def __init__(self, residuals):
        self.residuals = residuals
        super().__init__(f"residue constraints violated: {residuals}")


class ResonanceError(OperlabError):
    pass


class InconsistentSystem(OperlabError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class StencilTooCoarse(OperlabError, ValueError):
    pass


class SingularityTooClose(OperlabError):
    pass


class StepFailure(OperlabError):
    pass


class SeriesDivergence(OperlabError):
    pass


class Ambiguous(OperlabError):
    def __init__(self, message, candidates):
        self.candidates = candidates
        super().__init__(message)


class PathThroughSingularity(OperlabError, ValueError):
    pass


class TruncationInsufficient(OperlabError):
    pass
