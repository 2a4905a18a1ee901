"""Exception hierarchy shared by every module."""


class DGMError(Exception):
    """Base class for all errors raised by dgm."""


class GraphError(DGMError):
    pass


class InvalidNodeId(GraphError, ValueError):
    pass


class KindConflict(GraphError):
    pass


class UnknownNode(GraphError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class EndpointKindMismatch(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class GraphFinalized(GraphError):
    pass


class SnapshotError(GraphError):
    pass


class FormatError(DGMError):
    pass


class UnknownSeed(UnknownNode):
    pass


class EmptyGraph(DGMError, ValueError):
    pass


class NotConverged(DGMError):
    pass


class ModeMismatch(DGMError, ValueError):
    pass


class GraphTooSmall(DGMError, ValueError):
    pass


class TooFewSamples(DGMError, ValueError):
    pass


class DegenerateSample(DGMError, ValueError):
    pass


class InvalidParameter(DGMError, ValueError):
    pass


class EmptyHistogram(DGMError, ValueError):
    pass


class InvalidFraction(InvalidParameter):
    pass


class InvalidSpec(InvalidParameter):
    pass
