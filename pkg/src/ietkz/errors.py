"""Exception hierarchy shared by all subsystems."""

from __future__ import annotations


class IetkzError(Exception):
    """Base class for all library errors."""


class ZeroVector(IetkzError):
    pass


class NotBijection(IetkzError):
    pass


class Reducible(IetkzError):
    """Combinatorial data splits at prefix length ``k``."""

    def __init__(self, k: int):
        super().__init__(f"combinatorial data reducible at k={k}")
        self.k = k


class DiagramTooLarge(IetkzError):
    pass


class NonConsecutivePath(IetkzError):
    pass


class ConsistencyFailure(IetkzError):
    """Internal bug trap: two independent computations disagree."""


class InvalidLengths(IetkzError):
    pass


class NotSuspensionVector(IetkzError):
    """Suspension sign condition fails at prefix ``k`` on the given side."""

    def __init__(self, k: int, side: str):
        super().__init__(f"suspension condition violated at k={k}, side={side}")
        self.k = k
        self.side = side


class ConnectionHit(IetkzError):
    """Forward induction met two equal critical lengths (a vertical connection)."""

    def __init__(self, message: str = "connection hit", trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class HorizontalDegenerate(IetkzError):
    """Backward induction met a vanishing tau sum (a horizontal connection)."""

    def __init__(self, message: str = "horizontal degenerate", trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class PrecisionExhausted(IetkzError):
    """Ball arithmetic could not certify a branch even at the precision cap."""

    def __init__(self, message: str = "precision exhausted", trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class InsufficientTrajectory(IetkzError):
    pass


class WindowMissing(IetkzError):
    pass


class SubspaceMismatch(IetkzError):
    pass


class NoStandardVertex(IetkzError):
    """Bug trap: every irreducible Rauzy class contains a standard vertex."""


class NoReturn(IetkzError):
    """Orbit did not return within the iteration cap."""


class SingularOrbit(IetkzError):
    """Brute-force orbit hit a singularity exactly."""

    def __init__(self, k: int):
        super().__init__(f"orbit hits a singularity at step {k}")
        self.k = k


class SingularPoint(IetkzError):
    pass


class LevelMismatch(IetkzError):
    pass


class NotMeanZero(IetkzError):
    pass


class SplittingUntrusted(IetkzError):
    pass


class DegenerateGap(IetkzError):
    pass


class RequiresMultipleSingularities(IetkzError):
    pass


class ParseError(IetkzError):
    def __init__(self, reason: str, where: str = ""):
        super().__init__(f"{where}: {reason}" if where else reason)
        self.reason = reason
        self.where = where


class ValidationError(IetkzError):
    pass


class IoError(IetkzError):
    pass
