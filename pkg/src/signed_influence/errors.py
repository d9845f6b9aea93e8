"""Exception types raised across the library."""


class SignedInfluenceError(Exception):
    """Base class for all library errors."""


class NetworkValidationError(SignedInfluenceError):
    """Invalid network description (bad ids, self-loops, ...)."""


class SelfLoopError(NetworkValidationError):
    def __init__(self, node):
        super().__init__(f"self-loop on node {node} is not allowed")
        self.node = node


class DuplicateEdgeError(NetworkValidationError):
    def __init__(self, src, dst):
        super().__init__(f"duplicate edge ({src}, {dst})")
        self.src = src
        self.dst = dst


class ZeroWeightError(NetworkValidationError):
    def __init__(self, src, dst):
        super().__init__(f"edge ({src}, {dst}) has zero or non-finite weight")
        self.src = src
        self.dst = dst


class BadIdError(NetworkValidationError):
    def __init__(self, node):
        super().__init__(f"node id {node} out of range")
        self.node = node


class NotWeaklyConnectedError(SignedInfluenceError):
    """The underlying undirected graph is disconnected."""


class NotStronglyConnectedError(SignedInfluenceError):
    """A node set expected to induce a strongly connected subgraph does not."""


class ParamConstraintViolatedError(SignedInfluenceError):
    """Agent parameters violate the model constraints."""

    def __init__(self, node, message):
        super().__init__(f"agent {node}: {message}")
        self.node = node


class StubbornSinkRejectedError(SignedInfluenceError):
    """Operation requires a sink without stubborn members."""


class DegenerateEigenspaceError(SignedInfluenceError):
    """The unit eigenvalue of a sink block is not simple (misclassification)."""


class SingularSystemError(SignedInfluenceError):
    """A linear system that should be regular turned out singular."""


class MissingSpectrumError(SignedInfluenceError):
    def __init__(self, sink):
        super().__init__(f"no spectrum supplied for sink {sink}")
        self.sink = sink


class NotANodeError(SignedInfluenceError):
    def __init__(self, node):
        super().__init__(f"{node} is not a non-source node of the graph")
        self.node = node


class ComplexityCapExceededError(SignedInfluenceError):
    """Path/loop enumeration exceeded the configured cap."""

    def __init__(self, limit):
        super().__init__(f"enumeration cap of {limit} exceeded")
        self.limit = limit


class NoSuchEdgeError(SignedInfluenceError):
    def __init__(self, src, dst):
        super().__init__(f"edge ({src}, {dst}) does not exist")
        self.src = src
        self.dst = dst


class ZeroDeltaError(SignedInfluenceError):
    """Perturbation size must be nonzero."""


class SpecFileError(SignedInfluenceError):
    """A network spec file failed validation."""
