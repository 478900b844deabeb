# SPDX-License-Identifier: MIT
"""Exceptions raised by the qthermo library.

Every exception derives from :class:`QthermoError` and from the closest
builtin, so callers can catch either.
"""


class QthermoError(Exception):
    """Base class for all qthermo errors"""


class DimensionMismatch(QthermoError, ValueError):
    """Operator or state dimensions do not agree"""

    def __init__(self, what, expected, got):
        self.what = what
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected dimension {expected}, got {got}")


class InvalidState(QthermoError, ValueError):
    """A density operator, propagator or basis broke its invariants"""


class NonPositiveTemperature(QthermoError, ValueError):
    """A temperature that must be positive is not"""

    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"{name} must be positive, got {value}")


class HermiticityError(QthermoError, ArithmeticError):
    """An observable of Hermitian operators came out with an imaginary part"""


class PositivityBreach(QthermoError, ArithmeticError):
    """The integrated state developed a negative eigenvalue beyond tolerance"""

    def __init__(self, time, step, eigenvalue):
        self.time = time
        self.step = step
        self.eigenvalue = eigenvalue
        super().__init__(
            f"negative eigenvalue {eigenvalue:.3e} at t={time:.6g} (step {step})"
        )


class NonFiniteState(QthermoError, ArithmeticError):
    """The integrated state contains NaN or infinite entries"""

    def __init__(self, time, step):
        self.time = time
        self.step = step
        super().__init__(f"non-finite state at t={time:.6g} (step {step})")


class InfeasibleConstraints(QthermoError, ValueError):
    """A constrained propagator has no exact solution"""

    def __init__(self, rank, constraints, residual):
        self.rank = rank
        self.constraints = constraints
        self.residual = residual
        super().__init__(
            f"constraints are infeasible: rank {rank} of {constraints}, "
            f"residual {residual:.3e}"
        )


class ContactTemperatureError(QthermoError, ArithmeticError):
    """The contact temperature can not be extracted"""


class ConfigError(QthermoError, ValueError):
    """A scenario file failed validation"""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
