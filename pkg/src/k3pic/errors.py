class K3PicError(Exception):
    """Base class for all package errors."""


class InvalidWeights(K3PicError, ValueError):
    pass


class DegeneratePolytope(K3PicError):
    pass


class NoUniqueInteriorPoint(K3PicError):
    pass


class NonGorensteinEdge(K3PicError):
    pass


class RankMismatch(K3PicError):
    def __init__(self, formula, matrix_rank, context=""):
        self.formula = formula
        self.matrix_rank = matrix_rank
        super().__init__(
            f"rank formula gives {formula} but matrix rank is {matrix_rank}"
            + (f" ({context})" if context else ""))


class ParseError(K3PicError, ValueError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(K3PicError, ValueError):
    pass


class NonIntegerDiscriminant(K3PicError, ValueError):
    pass


class DegenerateLattice(K3PicError, ValueError):
    pass


class InvalidFormParams(K3PicError, ValueError):
    pass


class CapExceeded(K3PicError):
    pass


class NotIsotropic(K3PicError, ValueError):
    pass


class NonIntegralGlue(K3PicError):
    pass


class BudgetExhausted(K3PicError):
    pass


class NoFibreFound(K3PicError):
    pass


class InfiniteMW(K3PicError):
    pass


class HasSection(K3PicError):
    pass


class Overfull(K3PicError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"Shioda-Tate leaves rk(MW) = {value} < 0")


class FixtureError(K3PicError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)
