class DomainError(ValueError):
    """An angle or parameter lies outside the range where a formula is valid."""


class ConstraintError(ValueError):
    """A boundary parameter violates its sign constraint."""


class DegenerateSegmentError(ValueError):
    """A path segment has zero length where a moving segment is required."""


class CollisionError(ArithmeticError):
    """A pair distance vanishes along a path segment.

    ``pair`` names the colliding relative vector (``"12"``, ``"13"``, ``"14"``
    or ``"23"``) and ``segment`` the zero-based segment index, when known.
    """

    def __init__(self, message, pair=None, segment=None):
        super().__init__(message)
        self.pair = pair
        self.segment = segment
