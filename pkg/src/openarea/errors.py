"""Exception types shared across the package."""


class OpenAreaError(Exception):
    """Base class for all openarea errors."""


class ParseError(OpenAreaError):
    """Input document is malformed (bad JSON/CSV, missing members)."""


class ValidationError(OpenAreaError):
    """Input parsed but violates a scene or data invariant."""


class SelfIntersectingRing(ValidationError):
    """Polygon ring crosses or touches itself."""


class HoleOutsideOuter(ValidationError):
    """Hole not strictly inside the outer ring, or touching it."""


class OverlappingRings(ValidationError):
    """Two hole/obstacle rings overlap or touch."""


class RoutingError(OpenAreaError):
    """Base class for routing failures."""


class TerminalOutsideArea(RoutingError):
    """Requested origin/destination outside the chosen area polygon."""


class TerminalInsideObstacle(RoutingError):
    """Requested origin/destination inside an obstacle."""


class TerminalUnreachable(RoutingError):
    """Terminal lies in no area and no gate/network can resolve it."""


class NoPathExists(RoutingError):
    """The graph has no connection between origin and destination."""


class EndpointsNotShared(OpenAreaError):
    """Trajectories being compared do not share start/end points."""


class SingularDesign(OpenAreaError):
    """Design matrix is rank deficient; the normal equations have no unique solution."""


class AllZeroCoefficients(OpenAreaError):
    """Every fitted coefficient is zero; importances are undefined."""
