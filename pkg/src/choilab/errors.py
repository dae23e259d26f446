"""Exception hierarchy shared by every module."""


class ChoiLabError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(ChoiLabError, ValueError):
    pass


class NotHermitian(ChoiLabError, ValueError):
    pass


class NotProjection(ChoiLabError, ValueError):
    pass


class NonLinearInput(ChoiLabError, ValueError):
    pass


class NegativeLambda(ChoiLabError, ValueError):
    pass


class BadK(ChoiLabError, ValueError):
    pass


class NotNormalized(ChoiLabError, ValueError):
    pass


class UnsupportedCone(ChoiLabError, ValueError):
    pass


class ConeContainsCP(ChoiLabError, ValueError):
    """The requested cone contains CP, so the entangled-subspace construction degenerates."""


class Degenerate(ChoiLabError, ValueError):
    """mu is within the degeneracy tolerance of 1: the projection is not entangled for the cone."""


class DimensionOverflow(ChoiLabError, ValueError):
    pass


class NumericalFailure(ChoiLabError, ArithmeticError):
    """An eigensolver/SVD failed, or an internal consistency check did not hold."""
