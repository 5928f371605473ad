"""Exception hierarchy for spinrelax."""


class SpinRelaxError(Exception):
    """Base class for every error raised by the library."""


class NotM3RError(SpinRelaxError):
    def __init__(self, defect: float):
        super().__init__(f"matrix not in M_{{3,R}} (membership defect {defect:.3e})")
        self.defect = defect


class HypothesisNotMetError(SpinRelaxError):
    def __init__(self):
        super().__init__("Prop 2 hypothesis not met")


class NonFiniteInputError(SpinRelaxError):
    pass


class NotAnEigenvalueError(SpinRelaxError):
    def __init__(self, value: float, residual: float):
        super().__init__(f"{value!r} is not an eigenvalue (residual {residual:.3e})")
        self.value = value
        self.residual = residual


class DegenerateBranchPointError(SpinRelaxError):
    def __init__(self, value: float):
        super().__init__(f"degenerate branch point at lambda={value:.12g}")
        self.value = value


class InvariantBreachError(SpinRelaxError):
    """|r| left the Bloch ball; the step size is too large."""

    def __init__(self, step: int, norm: float):
        super().__init__(f"positivity lost at step {step} (|r| = {norm:.12g}); reduce dt")
        self.step = step
        self.norm = norm


class RangeError(SpinRelaxError):
    pass
