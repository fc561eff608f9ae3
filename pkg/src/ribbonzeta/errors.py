"""Exception hierarchy.

Every error raised by the library derives from :class:`RibbonZetaError`, and
its class name doubles as the machine-readable code printed by the CLI.
"""


class RibbonZetaError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# ribbon graphs
class NotInvolution(RibbonZetaError):
    pass


class FixedPointInTwin(RibbonZetaError):
    pass


class PermutationInvalid(RibbonZetaError):
    pass


class Disconnected(RibbonZetaError):
    pass


class InvalidEuler(RibbonZetaError):
    pass


class UnstableType(RibbonZetaError):
    """Genus zero with fewer than three faces."""


class NonPositiveLength(RibbonZetaError):
    pass


class InadmissibleType(RibbonZetaError):
    pass


class LoopContraction(RibbonZetaError):
    pass


class NonPositiveScale(RibbonZetaError):
    pass


class GraphFormatError(RibbonZetaError):
    pass


# geodesics
class BudgetExceeded(RibbonZetaError):
    pass


class NullHomotopic(RibbonZetaError):
    pass


class NotTrivalent(RibbonZetaError):
    pass


class NotClosed(RibbonZetaError):
    pass


class SameGeodesic(RibbonZetaError):
    pass


# zeta
class NotIrreducible(RibbonZetaError):
    pass


class NoConvergence(RibbonZetaError):
    pass


class DegreeOverflow(RibbonZetaError):
    pass


class NotRational(RibbonZetaError):
    pass


class InsufficientData(RibbonZetaError):
    pass


# kontsevich
class EmptyCell(RibbonZetaError):
    pass


class ZeroDimensional(RibbonZetaError):
    pass


class RankDeficient(RibbonZetaError):
    pass


class UnknownMode(RibbonZetaError):
    pass


# distributions
class Empty(RibbonZetaError):
    pass


class NonPositiveWeight(RibbonZetaError):
    pass


class LipschitzViolation(RibbonZetaError):
    pass


# cli
class VerificationFailed(RibbonZetaError):
    """Independent methods disagree beyond their tolerances."""


class InvalidArgument(RibbonZetaError):
    pass
