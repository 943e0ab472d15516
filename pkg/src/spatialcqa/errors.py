"""Exception hierarchy shared across the package."""


class SpatialCQAError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGeometryError(SpatialCQAError, ValueError):
    """Input geometry is not an admissible polygonal region."""


class EmptyGeometryError(SpatialCQAError, ValueError):
    """Operation requires non-empty regions."""


class UnsupportedPredicateError(SpatialCQAError, ValueError):
    """Predicate name unknown or not allowed in this context."""


class OracleResolutionError(SpatialCQAError, ValueError):
    """Rasterization grid too coarse for the input features."""


class SchemaError(SpatialCQAError, ValueError):
    """Schema malformed or instance data does not match it."""


class KeyViolationError(SchemaError):
    """Two rows of one relation share a key but differ elsewhere."""


class CorrelationError(SpatialCQAError, ValueError):
    """Correlation is not a thematic-preserving bijection."""


class ConstraintError(SpatialCQAError, ValueError):
    """Constraint malformed or incompatible with the schema."""


class QueryError(SpatialCQAError, ValueError):
    """Query malformed or incompatible with the schema."""


class RepairInvariantError(SpatialCQAError, RuntimeError):
    """A repair step violated a search invariant (area decrease, consistency)."""


class SearchLimitExceeded(SpatialCQAError, RuntimeError):
    """Repair search hit its node or depth limit before finishing.

    Carries partial progress so callers can report how far the search got.
    """

    def __init__(self, message: str, *, nodes: int = 0, depth: int = 0,
                 leaves: int = 0):
        super().__init__(message)
        self.nodes = nodes
        self.depth = depth
        self.leaves = leaves
