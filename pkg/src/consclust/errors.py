"""Exception and warning types raised by consclust."""


class ConsensusError(Exception):
    """Base class for solver-level failures (CLI exit code 4)."""


class InvalidPartition(ConsensusError, ValueError):
    pass


class ZeroWeight(ConsensusError):
    """A point is missing from every basic partition, so its degree is zero."""


class AllMissingPoint(ZeroWeight):
    pass


class DisconnectedDegree(ZeroWeight):
    pass


class DenseCapExceeded(ConsensusError):
    pass


class KTooLarge(ConsensusError, ValueError):
    pass


class DegenerateCluster(ConsensusError):
    pass


class SingularSystem(ConsensusError):
    pass


class ShapeMismatch(ConsensusError, ValueError):
    pass


class NoOverlap(ConsensusError, ValueError):
    pass


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 3)."""


class EmptyClusterResolved(UserWarning):
    """An empty cluster was re-seeded; reported, not fatal."""
