"""
Exception hierarchy shared by all sub-packages.

Every error is also a ``ValueError`` so callers that only know about bad
arguments still catch it.
"""


class BMSTError(ValueError):
    pass


class InvalidInstanceError(BMSTError):
    pass


class DimensionMismatchError(BMSTError):
    pass


class EmptyPointSetError(BMSTError):
    pass


class ResourceLimitError(BMSTError):
    pass


class DisconnectedGraphError(BMSTError):

    def __init__(self, u, v):
        super().__init__(f'[DisconnectedGraphError]: vertices {u} and {v} are not connected by finite-weight edges')
        self.u = u
        self.v = v


class NoValidPartitionError(BMSTError):
    pass


class TreeMismatchError(BMSTError):
    pass


class PreconditionError(BMSTError):
    pass


class UnsupportedRegimeError(BMSTError):
    pass


class UnsupportedDimensionError(BMSTError):
    pass


class InvalidPlanError(BMSTError):
    pass
