class PlanningError(Exception):
    """Base class for all recoverable planning failures."""


class Infeasible(PlanningError):
    pass


class MaxIterations(PlanningError):
    pass


class Timeout(PlanningError):
    def __init__(self, budget: float, message: str | None = None):
        self.budget = budget
        super().__init__(message or f"solver exceeded its {budget:.3f} s budget without an incumbent")


class BigMTooSmall(PlanningError):
    pass


class DegenerateFit(PlanningError):
    pass


class NoReachableSurface(Infeasible):
    def __init__(self, phase: int, foot: int):
        self.phase = phase
        self.foot = foot
        super().__init__(f"no candidate surface for phase {phase}, foot {foot}")


class OutOfDomain(ValueError):
    pass


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    pass
