"""Exception hierarchy shared by all modules."""


class SuperregError(Exception):
    pass


class BudgetExceeded(SuperregError):
    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class ParamsInvalid(SuperregError, ValueError):
    pass


# finite_field
class NotPrime(SuperregError, ValueError):
    pass


class NotMonic(SuperregError, ValueError):
    pass


class Reducible(SuperregError, ValueError):
    def __init__(self, message, witness_degree):
        super().__init__(message)
        self.witness_degree = witness_degree


class NotPrimitive(SuperregError, ValueError):
    def __init__(self, message, prime_factor):
        super().__init__(message)
        self.prime_factor = prime_factor


class MixedFields(SuperregError, TypeError):
    pass


class DivisionByZero(SuperregError, ZeroDivisionError):
    pass


# linalg
class NotSquare(SuperregError, ValueError):
    pass


class ShapeMismatch(SuperregError, ValueError):
    pass


class IndexOutOfRange(SuperregError, IndexError):
    pass


class Inconsistent(SuperregError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OrderTooLarge(SuperregError, ValueError):
    pass


# superregular / convcode
class PatternMismatch(SuperregError, ValueError):
    pass


class NotFound(SuperregError):
    pass


class SingularA0(SuperregError, ValueError):
    pass


class InternalConsistencyError(SuperregError, AssertionError):
    """A computed result contradicts a proven property (e.g. column distance prefix)."""
