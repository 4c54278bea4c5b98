"""Exception hierarchy shared by all seqknap modules."""


class SeqKnapError(Exception):
    """Base class for every domain error raised by the package."""


class InstanceError(SeqKnapError):
    pass


class EmptyInstance(InstanceError):
    pass


class NonDivisibleSizes(InstanceError):
    pass


class MissingUnitSize(InstanceError):
    pass


class NonPositiveField(InstanceError):
    pass


class InfeasibleKeep(SeqKnapError):
    """A requested item multiset exceeds the bounds or cannot be packed."""


class InfeasibleY(SeqKnapError):
    """An aggregated assignment violates the occupancy constraints."""


class DivisibilityViolation(SeqKnapError):
    pass


class BudgetExceeded(SeqKnapError):
    """An exhaustive search hit its configured limit."""


class SearchSpaceTooLarge(BudgetExceeded):
    pass


class BranchBudgetExceeded(BudgetExceeded):
    pass


class SelectionBudgetExceeded(BudgetExceeded):
    pass


class SubsetBudgetExceeded(BudgetExceeded):
    pass
