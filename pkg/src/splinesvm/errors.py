"""Exception hierarchy shared by every module of the package."""


class SplineSvmError(Exception):
    """Base class for all errors raised by splinesvm."""


class InvalidParameter(SplineSvmError, ValueError):
    pass


class UnsupportedOperator(InvalidParameter):
    """Differential-operator order with no closed-form kernel."""


class DimensionError(SplineSvmError, ValueError):
    pass


class DomainError(SplineSvmError, ValueError):
    """Evaluation point outside [0, 1]."""


class AmbiguousAtKnot(SplineSvmError, ValueError):
    """First-order derivative requested exactly at a knot, where it jumps."""


class GridNestingError(SplineSvmError, ValueError):
    pass


class GridMismatch(SplineSvmError, ValueError):
    pass


class IllConditionedGram(SplineSvmError):
    """Cholesky factorization of the Gram matrix hit a non-positive pivot.

    Attributes
    ----------
    pivot_index : int
        Zero-based index of the first pivot at or below tolerance.
    pivot : float
        The offending pivot value (``nan`` when LAPACK aborted before computing it).
    suggested_jitter : float or None
        Smallest power of ten (up to 1e-2) whose diagonal shift makes the
        factorization succeed, or ``None`` if none does.
    """

    def __init__(self, pivot_index, pivot, suggested_jitter):
        self.pivot_index = pivot_index
        self.pivot = pivot
        self.suggested_jitter = suggested_jitter
        hint = (
            f"; try jitter={suggested_jitter:g}"
            if suggested_jitter is not None
            else "; no jitter up to 1e-2 helps"
        )
        super().__init__(
            f"Gram matrix is numerically singular at pivot {pivot_index} "
            f"(value {pivot:.3g}){hint}"
        )


class DegenerateLabels(SplineSvmError, ValueError):
    """Training labels contain a single class."""


class InvalidKernelMatrix(SplineSvmError, ValueError):
    pass


class ConvergenceFailure(SplineSvmError):
    """SMO ran out of iterations before meeting the KKT tolerance."""

    def __init__(self, worst_violation, iterations):
        self.worst_violation = worst_violation
        self.iterations = iterations
        super().__init__(
            f"SMO did not converge after {iterations} pair updates "
            f"(worst KKT violation {worst_violation:.3g})"
        )


class ConfigError(InvalidParameter):
    """Invalid configuration or data file, anchored to a source line when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")
