"""Exception types raised by :mod:`homcone`."""


class ConeError(Exception):
    """Base class for domain errors."""


class StructureError(ConeError):
    """Malformed block structure (dimension mismatch, rank deficiency)."""


class NotInZ(ConeError):
    """Matrix does not lie in the ambient space Z_V."""


class NotInCone(ConeError):
    """Point is outside the open cone P_V."""


class NotPositiveDefinite(NotInCone):
    """Cholesky factorization failed."""


class NotInDualCone(ConeError):
    """Point is outside the open dual cone Q_V."""


class InvalidShape(ConeError):
    """Shape parameter is outside the admissible range."""


class PermutationNotFound(ConeError):
    """No permutation satisfies the diagonal condition of the dual realization."""


class NotHomogeneous(ConeError):
    """Graph does not define a homogeneous cone.

    Attributes
    ----------
    kind : str
        ``"chordless-cycle"`` or ``"induced-A4"``.
    witness : tuple
        Vertex labels of the offending subgraph, in cycle/path order.
    """

    def __init__(self, kind, witness):
        self.kind = kind
        self.witness = tuple(witness)
        super().__init__(f"graph is not homogeneous: {kind} {list(self.witness)}")
