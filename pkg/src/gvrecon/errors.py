"""Exception types shared by every stage of the reconstruction toolkit.

Each concrete error carries a stable ``category`` string and an
``exit_code`` used by the command line front end.
"""


class ReconstructionError(Exception):
    """Base class for all toolkit errors."""

    category = "error"
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class InvalidArgumentError(ReconstructionError, ValueError):
    category = "invalid-argument"
    exit_code = 10


class ParseError(ReconstructionError, ValueError):
    category = "parse"
    exit_code = 11


class RangeError(ReconstructionError, ValueError):
    category = "range"
    exit_code = 12


class DisconnectedDomainError(ReconstructionError, ValueError):
    category = "disconnected-domain"
    exit_code = 13


class FeasibilityError(ReconstructionError):
    """Samples admit no gradually varied extension on the chosen chain."""

    category = "gvf-infeasible"
    exit_code = 20

    def __init__(self, message, pair, **details):
        super().__init__(message, pair=pair, **details)
        self.pair = pair


class UnsupportedOrderError(ReconstructionError, ValueError):
    category = "unsupported-order"
    exit_code = 21


class DegenerateGeometryError(ReconstructionError):
    category = "degenerate-geometry"
    exit_code = 30


class VerticalTangentError(ReconstructionError):
    category = "vertical-tangent"
    exit_code = 31


class SingularGradientError(ReconstructionError):
    category = "singular-gradient"
    exit_code = 32


class InsufficientNeighborsError(ReconstructionError):
    category = "insufficient-neighbors"
    exit_code = 33


class IllConditionedPatchError(ReconstructionError):
    category = "ill-conditioned-patch"
    exit_code = 34


class OutOfDomainError(ReconstructionError):
    category = "out-of-domain"
    exit_code = 35


class InfeasibleBudgetError(ReconstructionError):
    """An order's samples need a larger Lipschitz constant than budgeted."""

    category = "infeasible-budget"
    exit_code = 40

    def __init__(self, message, pair, required, budget, order=None, component=None):
        super().__init__(message, pair=pair, required=required, budget=budget,
                         order=order, component=component)
        self.pair = pair
        self.required = required
        self.budget = budget
        self.order = order
        self.component = component


ALL_ERRORS = (
    ReconstructionError,
    InvalidArgumentError,
    ParseError,
    RangeError,
    DisconnectedDomainError,
    FeasibilityError,
    UnsupportedOrderError,
    DegenerateGeometryError,
    VerticalTangentError,
    SingularGradientError,
    InsufficientNeighborsError,
    IllConditionedPatchError,
    OutOfDomainError,
    InfeasibleBudgetError,
)


def exit_code_table():
    """Return ``{category: exit_code}`` for every error type."""
    return {err.category: err.exit_code for err in ALL_ERRORS}
