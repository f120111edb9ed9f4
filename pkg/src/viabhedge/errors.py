"""Exception hierarchy shared by all modules."""


class ViabHedgeError(Exception):
    """Base class for every error raised by the package."""


class SchemaError(ViabHedgeError):
    """Input document is missing a field or has a field of the wrong type."""


class InvariantError(ViabHedgeError):
    """A structural invariant of a model object is violated."""

    def __init__(self, rule, node=None, detail=""):
        self.rule = rule
        self.node = node
        msg = rule if node is None else f"{rule} (node {node!r})"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class InvalidStoppingTime(InvariantError):
    pass


class DimensionError(ViabHedgeError):
    pass


class ParamError(ViabHedgeError):
    pass


class CapExceeded(ViabHedgeError):
    def __init__(self, count_lower_bound, cap):
        self.count_lower_bound = count_lower_bound
        self.cap = cap
        super().__init__(f"{count_lower_bound} stopping times exceed cap {cap}")


class NumericalBreakdown(ViabHedgeError):
    """Float backend lost accuracy; retry in exact mode."""


class MismatchError(ViabHedgeError):
    def __init__(self, violations):
        self.violations = list(violations)
        names = ", ".join(sorted({v[0] for v in self.violations}))
        super().__init__(f"certificate check failed at: {names}")


class UnsupportedCone(ViabHedgeError):
    pass


class InfeasibleHedge(ViabHedgeError):
    pass


class BudgetExhausted(ViabHedgeError):
    def __init__(self, best):
        self.best = best
        super().__init__("search budget exhausted before reaching the target gap")
