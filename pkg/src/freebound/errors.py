"""Exception types shared across the package."""


class FreeboundError(Exception):
    """Base class for all package-specific errors."""


class NonpositiveRadius(FreeboundError):
    """A radial or support function dips to zero or below on the check grid."""


class NotConvex(FreeboundError):
    """A support function violates (h + h'') >= 0 beyond tolerance."""


class InfeasibleSet(FreeboundError):
    """The admissible set is empty or feasibility restoration failed."""


class OrderingViolated(FreeboundError):
    """The radial ordering sigma <= r_in <= r_out <= gamma fails on the grid."""


class GapTooSmall(FreeboundError):
    """The two boundaries come closer than the configured minimum gap."""


class SingularSystem(FreeboundError):
    """The boundary-integral system is numerically rank deficient."""


class DimensionMismatch(FreeboundError):
    """Coefficient vector length does not match the expected truncation order."""


class DegenerateAnnulus(FreeboundError):
    """Requested radii do not describe a proper annulus (r_gamma <= r_sigma)."""


class ResampleLimitExceeded(FreeboundError):
    """Random boundary sampling failed the containment bounds too many times."""
