"""Exception types shared across the package."""


class DegeneratePlaneError(ValueError):
    """The two vectors do not span a 2-plane (Gram determinant below tolerance)."""


class TangentSpanError(ValueError):
    """An algebra element has a component outside the tangent complement."""


class NotPositivelyCurvedError(ValueError):
    """A Berger parameter outside 0 < t < 4/3 was passed where positivity is required."""


class OptimizationError(RuntimeError):
    """Every restart of a local search failed to converge."""
