"""Exception types shared across the package."""


class GraphError(ValueError):
    """Base class for invalid graph data."""


class BadLabel(GraphError):
    """A vertex label in an edge or loop is outside 1..vi+vf."""


class ValencyTooLow(GraphError):
    """Some vertex has valency < 3 (interval vertices count their two line arcs)."""


class DisconnectedGraph(GraphError):
    """Graph plus special line is not connected."""


class LoopAtFreeVertex(GraphError):
    """Small loops may only sit at interval vertices."""


class ParseError(GraphError):
    """Malformed graph text; carries the byte offset of the failure."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class IllegalContraction(ValueError):
    """Contraction target is not a legal edge/arc for this graph."""


class MixedGrading(ValueError):
    """GraphVector terms do not share a single (ord, deg)."""


class NoCohomology(ValueError):
    """Requested a representative of a zero cohomology group."""


class DimensionMismatch(ValueError):
    """Cycle dimension does not balance the form degree of the cochain."""


class CoincidentPoints(ValueError):
    """Gauss map evaluated at equal points."""


class NonUnitVector(ValueError):
    """Expected a unit vector."""


class NonPerpendicular(ValueError):
    """Resolution direction is not perpendicular to the strand tangents."""


class OnDiagonal(ValueError):
    """Covering-check target lies on the diagonal of (S^{n-1})^2."""


class OutsideA(ValueError):
    """Covering-check target has x_n y_n <= 0."""


class OverlappingBalls(ValueError):
    """Little balls in an operad input have overlapping interiors."""
