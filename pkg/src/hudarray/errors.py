"""Exception hierarchy shared by all hudarray modules."""


class HudArrayError(Exception):
    """Base class for every error raised by hudarray."""


class InvalidArgumentError(HudArrayError, ValueError):
    """An argument violates a documented precondition."""


class ConvergenceError(HudArrayError):
    """The stealthy optimizer did not reach its objective tolerance.

    ``best_objective`` holds the lowest objective seen and ``best_points``
    the corresponding coordinates (meters), so callers can inspect or
    reuse the partial result.
    """

    def __init__(self, message, best_objective, best_points=None):
        super().__init__(message)
        self.best_objective = best_objective
        self.best_points = best_points


class SeparationError(HudArrayError):
    """No candidate satisfied the minimum element separation.

    ``pair`` is the index pair of the closest two points in the best
    candidate and ``distance`` their periodic distance in meters.
    """

    def __init__(self, message, pair, distance):
        super().__init__(message)
        self.pair = pair
        self.distance = distance


class PatternParseError(HudArrayError, ValueError):
    """A pattern file could not be parsed; ``line`` is 1-based or None."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
