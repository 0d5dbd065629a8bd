"""Exception types shared across the package."""


class BranchwalkError(Exception):
    """Base class for all library errors."""


class InvalidPoint(BranchwalkError):
    """A point is outside the system's domain."""


class WordTooShort(BranchwalkError):
    """A symbolic word has fewer symbols than the operation consumes."""


class BudgetExceeded(BranchwalkError):
    """A preimage tree grew past the configured node budget."""

    def __init__(self, budget: int, needed: int):
        self.budget = budget
        self.needed = needed
        super().__init__(
            f"preimage tree needs at least {needed} nodes, budget is {budget}"
        )


class QmfViolation(BranchwalkError):
    """The branch-averaged weight is not identically one.

    Raised when the strongly-invariant density mode is requested but
    (1/c(x)) * sum of V over the preimages of x deviates from 1 at a
    sampled point.
    """

    def __init__(self, witness, deviation: float):
        self.witness = witness
        self.deviation = deviation
        super().__init__(
            f"branch average of weight deviates from 1 by {deviation:.3e} "
            f"at x={witness!r}"
        )


class EigenvalueNotOne(BranchwalkError):
    """The weighted symbol matrix has Perron eigenvalue != 1.

    Carries the offending eigenvalue and a rescaling hint: dividing the
    weight by the eigenvalue produces an admissible weight.
    """

    def __init__(self, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"Perron eigenvalue is {eigenvalue!r}, not 1; "
            f"rescale the weight by 1/{eigenvalue!r} (set rescale=True)"
        )


class EigenvalueMismatch(BranchwalkError):
    """No Markov fixed-point measure exists for the given weight.

    The Perron eigenvalue of the weighted symbol matrix must agree with the
    Perron eigenvalue of the bare transition matrix for cylinder masses to be
    consistent across depths.
    """


class NotPositive(BranchwalkError):
    """A Perron vector or eigenvalue failed strict positivity."""


class NoConvergence(BranchwalkError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last residual {residual:.3e})"
        )


class DepthMismatch(BranchwalkError):
    """A cylinder table is too shallow for the requested integrand depth."""


class NumericOverflow(BranchwalkError):
    """A weight product left the representable range."""


class NormalizationDefect(BranchwalkError):
    """Branch transition masses at a point do not sum to one."""

    def __init__(self, point, total):
        self.point = point
        self.total = total
        super().__init__(
            f"branch masses at {point!r} sum to {total!r}, not 1"
        )


class EmptyPath(BranchwalkError):
    """shift_drop was applied to a path with no past coordinates."""


class GridIncompatible(BranchwalkError):
    """The grid resolution is not divisible by the map degree."""


class NotNonnegative(BranchwalkError):
    """A weight took a negative value at a sampled point."""

    def __init__(self, witness, value):
        self.witness = witness
        self.value = value
        super().__init__(f"weight is {value!r} < 0 at x={witness!r}")


class ConfigError(BranchwalkError):
    """A scenario file is malformed; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
