"""Exception types shared across the package."""


class MdlsegError(Exception):
    """Base class for all package errors."""


class SelfLoopError(MdlsegError):
    """An edge connects a node to itself."""

    def __init__(self, label):
        self.label = label
        super().__init__(f"self-loop on node {label!r}")


class EmptySequenceError(MdlsegError):
    """A graph sequence needs at least one snapshot."""


class OutOfBoundsError(MdlsegError):
    """A segment view falls outside the sequence's time range."""


class UnassignedNodeError(MdlsegError):
    """A node that must be scored has no community assignment."""

    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node!r} has no community assignment")


class DomainError(MdlsegError):
    """A probability or parameter lies outside its valid range."""


class InvalidSegmentationError(MdlsegError):
    """Change points are unsorted, duplicated, or out of range."""


class DegenerateSnapshotError(MdlsegError):
    """A snapshot with zero edges makes the screening distance undefined."""


class UnknownSettingError(MdlsegError):
    """Requested builtin scenario id does not exist."""


class EmptyDomainError(MdlsegError):
    """Two partitions share no nodes, so agreement is undefined."""


class SegmentMismatchError(MdlsegError):
    """Estimated and true change points differ where equality is required."""


class DataFormatError(MdlsegError):
    """An input file does not follow the documented format."""


class InternalInvariantError(MdlsegError):
    """A self-check failed; indicates a bug, not a user error."""
