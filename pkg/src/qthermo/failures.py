# SPDX-License-Identifier: MIT

from qthermo.common import print_color


class InvariantFailure:
    """Base class for all invariant failures of a run"""

    def __init__(self):
        self.explanation = ""
        self.description = ""
        self.time = None

    def get_failure(self):
        """Prints the failure message"""
        if self.description:
            print_color(self.description, "🚦")
        if self.explanation:
            print(self.explanation)

    def get_description(self) -> str:
        """Returns the description of the failure"""
        return self.description

    def as_dict(self) -> dict:
        return {
            "type": type(self).__name__,
            "description": self.description,
            "explanation": self.explanation,
            "time": self.time,
        }

    def __str__(self) -> str:
        return self.explanation


class InequalityViolated(InvariantFailure):
    """A thermodynamic inequality went negative"""

    def __init__(self, name, time, margin, count):
        super().__init__()
        self.time = time
        self.description = f"Inequality {name} violated"
        self.explanation = (
            f"The inequality {name} was negative at {count} sample(s), first at "
            f"t={time:g}, worst value {margin:.3e}. The heat flows realized by "
            "the propagator do not agree with the prescribed temperatures."
        )


class BalanceResidual(InvariantFailure):
    """A balance equation does not close"""

    def __init__(self, name, time, residual, tol):
        super().__init__()
        self.time = time
        self.description = f"Balance {name} does not close"
        self.explanation = (
            f"The {name} residual reached {residual:.3e} at t={time:g}, above "
            f"the tolerance {tol:.1e}. "
        )
        if name == "first_law":
            self.explanation += (
                "The energy rates of the parts do not add up to the external "
                "power and heat; check Tr(ℋ ro_iso) and the internal power."
            )


class SecondLawViolated(InvariantFailure):
    """An entropy production was negative"""

    def __init__(self, name, time, value):
        super().__init__()
        self.time = time
        self.description = f"Negative entropy production ({name})"
        self.explanation = (
            f"{name} dropped to {value:.3e} at t={time:g}. The propagator is not "
            "guaranteed to produce entropy for every choice of temperatures and "
            "constitutive laws; this is reported, not enforced."
        )


class PositivityProjected(InvariantFailure):
    """The state needed positivity projections"""

    def __init__(self, count, worst):
        super().__init__()
        self.description = "Density operator projected back to positivity"
        self.explanation = (
            f"{count} step(s) produced eigenvalues in [-1e-8, 0), the most "
            f"negative was {worst:.3e}. A smaller time step usually avoids this."
        )


class NotInEquilibrium(InvariantFailure):
    """Stationary final state that is not an equilibrium"""

    def __init__(self, failed):
        super().__init__()
        self.description = "Stationary state is not an equilibrium"
        self.explanation = (
            "The final state satisfies the necessary equilibrium conditions but "
            f"fails {', '.join(failed)}."
        )


class NegativeContactTemperature(InvariantFailure):
    """A contact temperature recovered from ro_ex was negative"""

    def __init__(self, name, time, inverse, count):
        super().__init__()
        self.time = time
        self.description = f"Negative contact temperature ({name})"
        self.explanation = (
            f"The reciprocal contact temperature {name} was negative at {count} "
            f"sample(s), first at t={time:g}, worst value {inverse:.3e}. The state "
            "is not compatible with the exchange propagator at any positive "
            "temperature; the prescribed temperature was used instead."
        )
