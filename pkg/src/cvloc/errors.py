"""Exception hierarchy shared by all modules."""


class CVLocError(Exception):
    """Base class for every error raised by cvloc."""


class DimensionError(CVLocError, ValueError):
    """Matrix has the wrong size (not square, odd dimension, wrong mode count)."""


class ShapeError(CVLocError, ValueError):
    """Matrix has the right size but the wrong structure (asymmetric, non-Hermitian)."""


class UnphysicalStateError(CVLocError, ValueError):
    """Covariance matrix violates the uncertainty relation.

    ``witness`` is the smallest symplectic eigenvalue found (vacuum = 1).
    """

    def __init__(self, message, witness=float("nan")):
        super().__init__(message)
        self.witness = witness


class NumericError(CVLocError, ArithmeticError):
    """A numerical procedure broke down (singular block, bad eigenvalue pairing)."""


class TruncationError(CVLocError, ValueError):
    """Fock-space truncation discards more probability than allowed."""


class UnsupportedShapeError(CVLocError, ValueError):
    """Input state has a structure no solver in the package handles."""


class CMParseError(CVLocError, ValueError):
    """Covariance-matrix file could not be parsed.

    ``line`` and ``column`` are 1-based positions of the offending token.
    """

    def __init__(self, message, line=0, column=0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
