"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for geometric evaluation failures."""


class SingularChartError(GeometryError):
    """A point lies on (or too close to) the excluded set of a chart."""


class UnsupportedOrderError(GeometryError):
    """A jet order beyond what the engine or a derived field can supply."""


class ImmersionError(GeometryError):
    """Degenerate induced metric: the map fails the immersion condition."""


class InvalidGridError(ValueError):
    """Empty or under-resolved evaluation grid."""


class DescriptorError(ValueError):
    """Malformed surface descriptor string."""
