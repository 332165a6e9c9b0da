"""Exception hierarchy shared by every module of the package."""


class PolyaWebError(Exception):
    """Base class for all errors raised by polyaweb."""


class PolyaOriginUndefined(PolyaWebError, ValueError):
    """The Polya kernel k/(k+l) is 0/0 at the origin."""


class HorizonBeforeBirth(PolyaWebError, ValueError):
    """A walk was asked for a time earlier than the time it is born."""


class KernelDomainError(PolyaWebError, ValueError):
    """A custom kernel table does not cover the queried lattice point."""


class DegenerateDensity(PolyaWebError, ValueError):
    """A density was requested for a point-mass Beta law."""


class SupportError(PolyaWebError, ValueError):
    """Argument outside the support of a distribution."""


class TargetsNotIncreasing(PolyaWebError, ValueError):
    pass


class InfeasibleTarget(PolyaWebError, ValueError):
    pass


class DegenerateBetaPoint(PolyaWebError, ValueError):
    """An axis point (Beta with a zero parameter) entered a density query."""


class NotOrdered(PolyaWebError, ValueError):
    """Points or levels violate the required ordering pattern."""


class UnsupportedOrder(PolyaWebError, ValueError):
    """Quadrature was requested for more pairs than supported."""


class IndexOutOfRange(PolyaWebError, IndexError):
    pass


class AlphaOutOfRange(PolyaWebError, ValueError):
    pass


class WindowEmpty(PolyaWebError, ValueError):
    """A window of indices or times contains nothing."""


EmptyWindow = WindowEmpty


class TooLarge(PolyaWebError, ValueError):
    """Exhaustive enumeration requested beyond the feasible size."""


class OverlappingBoxes(PolyaWebError, ValueError):
    pass


class YuleLevelCapExceeded(PolyaWebError, RuntimeError):
    """A Yule walk grew past the configured maximal level."""


class ConfigError(PolyaWebError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""
