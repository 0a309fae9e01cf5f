"""Exception hierarchy shared by every module of the package."""


class DenomRedError(Exception):
    """Base class for all errors raised by this package."""


# graph errors


class TadpoleEdge(DenomRedError):
    def __init__(self, vertex):
        super().__init__(f"edge ({vertex}, {vertex}) is a tadpole")
        self.vertex = vertex


class EmptyGraph(DenomRedError):
    pass


class InactiveEdge(DenomRedError):
    def __init__(self, edge_id):
        super().__init__(f"edge {edge_id} is not an active edge")
        self.edge_id = edge_id


class Disconnected(DenomRedError):
    pass


class UnknownName(DenomRedError):
    pass


class NotThreeValent(DenomRedError):
    pass


class BadKey(DenomRedError):
    pass


# polynomial errors


class DegreeTooHigh(DenomRedError):
    def __init__(self, var, degree, limit=2):
        super().__init__(f"degree {degree} in a{var} exceeds {limit}")
        self.var = var
        self.degree = degree


class NotPolynomialAfterClearing(DenomRedError):
    pass


class PrimeRequired(DenomRedError):
    pass


class NotDivisible(DenomRedError):
    pass


class ParseError(DenomRedError):
    pass


# reduction errors


class OddHalving(DenomRedError):
    """Middle coefficient of a square denominator has an odd coefficient."""


class BudgetExhausted(DenomRedError):
    def __init__(self, best, visited):
        super().__init__(f"search budget exhausted after {visited} states; best so far: {best}")
        self.best = best
        self.visited = visited


class PreconditionViolated(DenomRedError):
    pass


# counting errors


class BudgetExceeded(DenomRedError):
    pass


class NonHomogeneous(DenomRedError):
    pass


class DegreeTooLarge(DenomRedError):
    pass


class CalibrationMissing(DenomRedError):
    pass


class InsufficientPrimes(DenomRedError):
    pass


class NoConsistentFit(DenomRedError):
    pass
