"""Exception hierarchy shared by all engines."""


class SubspaceSimError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SubspaceSimError, ValueError):
    """Operands act on different numbers of qubits or have mismatched shapes."""


class ArgumentError(SubspaceSimError, ValueError):
    """An argument is outside the documented domain."""


class ResourceError(SubspaceSimError, RuntimeError):
    """A configured size cap (qubits, dimension, terms) would be exceeded.

    ``partial`` carries whatever partial size information was available when
    the cap was hit (e.g. the DLA dimension reached so far).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConsistencyError(SubspaceSimError, ValueError):
    """A numerical precondition (closure, antisymmetry, span membership) failed."""


class InadmissibleError(SubspaceSimError, ValueError):
    """The circuit, gate or observable is outside the engine's admissible class."""

    def __init__(self, message, gate_index=None):
        super().__init__(message)
        self.gate_index = gate_index


class UnsupportedGateError(InadmissibleError):
    """The requested operation is undefined for this gate kind."""


class UnanswerableWordError(SubspaceSimError, ValueError):
    """An expectation source cannot answer some Pauli words."""

    def __init__(self, message, words=()):
        super().__init__(message)
        self.words = list(words)
