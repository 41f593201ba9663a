"""Exception hierarchy shared by every knapmix module."""


class KnapmixError(Exception):
    """Base class for all knapmix errors."""


class InstanceError(KnapmixError, ValueError):
    """Malformed instance, vector or argument."""


class CapacityError(KnapmixError):
    """An exhaustive operation was asked to run above its configured cap."""

    def __init__(self, what, size, cap):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(
            f"{what} of size {size} exceeds the cap of {cap}; "
            f"shrink the instance or raise the cap"
        )


class InvariantError(KnapmixError, AssertionError):
    """An internal invariant failed. This signals a bug, not bad input."""


class SamplerFailure(KnapmixError):
    """The sampler produced a degenerate ratio estimate."""
