"""The search objective: utility/disclosure tradeoff with a penalty that
makes the cardinality lower bound self-enforcing, plus the budgeted
feasibility check.

    value = utility + lam * (tau - disclosure) - unassigned_count

Subtracting the number of unassigned entries guarantees (for lam in
[0, 1]) that assigning an orphan entry always beats leaving it, which is
what lets the heuristics run unconstrained on the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disclosure import aggregate_disclosure, disclosure_vector
from .instance import Assignment, Instance
from .utility import total_utility


@dataclass(frozen=True)
class ObjectiveValue:
    utility: float
    disclosure: float
    unassigned_count: int
    value: float

    @staticmethod
    def compose(utility: float, disclosure: float, unassigned: int, lam: float, tau: float):
        return ObjectiveValue(
            utility=utility,
            disclosure=disclosure,
            unassigned_count=unassigned,
            value=utility + lam * (tau - disclosure) - unassigned,
        )


def tradeoff_objective(instance: Instance, assignment: Assignment) -> ObjectiveValue:
    """Recompute the penalized tradeoff from scratch. The assignment may
    violate the lower cardinality bound mid-search; the upper bound is the
    caller's responsibility."""
    u = total_utility(instance, assignment)
    f = aggregate_disclosure(
        disclosure_vector(instance, assignment), instance.model.aggregation
    )
    c = int(np.count_nonzero(assignment.per_entry_count == 0))
    return ObjectiveValue.compose(u, f, c, instance.lam, instance.tau)


def discbudget_feasible(
    instance: Instance, assignment: Assignment, tau: float | None = None
) -> bool:
    """True iff the assignment is cardinality-feasible and its overall
    disclosure is strictly below the budget."""
    if tau is None:
        tau = instance.tau
    if not assignment.is_cardinality_feasible(instance.t):
        return False
    f = aggregate_disclosure(
        disclosure_vector(instance, assignment), instance.model.aggregation
    )
    return f < tau
