"""Exact level-by-level solver and the OPT / ordered solution predicates.

The solver walks the size classes from the smallest up.  At level h it
fills the size-d_h slots of every knapsack with the most valuable
(possibly grouped) items of size d_h, then glues the leftovers into
groups of size d_{h+1} and moves on.  Grouped items placed in a part are
expanded back into their member items, so the result is an ordinary
item-level assignment.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .assignment import AssignmentX
from .errors import BudgetExceeded, InfeasibleKeep, SearchSpaceTooLarge
from .instance import Instance, capacity_partition

DEFAULT_CHECK_BUDGET = 10**6


@dataclass(frozen=True)
class GroupedItem:
    assigned_size: int
    value: Fraction
    members: tuple[tuple[int, int], ...]  # (item position, copies)
    origin: tuple[int, ...]  # sorted original indices, with repetition

    @classmethod
    def single(cls, instance: Instance, j: int) -> "GroupedItem":
        it = instance.items[j]
        return cls(it.size, it.value, ((j, 1),), (it.index,))

    def true_size(self, instance: Instance) -> int:
        return sum(instance.items[j].size * c for j, c in self.members)


def _sort_key(g: GroupedItem):
    return (-g.value, g.origin)


def group_items(pool: Sequence[GroupedItem], target: int) -> list[GroupedItem]:
    """Glue value-sorted runs of target/d items of size d into size-target items."""
    if not pool:
        return []
    size = pool[0].assigned_size
    if any(g.assigned_size != size for g in pool) or target % size:
        raise ValueError("pool items must share one size dividing the target")
    run = target // size
    ordered = sorted(pool, key=_sort_key)
    groups = []
    for start in range(0, len(ordered), run):
        chunk = ordered[start:start + run]
        members: dict[int, int] = defaultdict(int)
        for g in chunk:
            for j, c in g.members:
                members[j] += c
        groups.append(GroupedItem(
            target,
            sum((g.value for g in chunk), Fraction(0)),
            tuple(sorted(members.items())),
            tuple(sorted(itertools.chain.from_iterable(g.origin for g in chunk))),
        ))
    return groups


def _solve(instance: Instance, bounds: Sequence[int], skip_negative: bool) -> AssignmentX:
    d = instance.sizes
    r = capacity_partition(instance).r
    x: dict[tuple[int, int, int], int] = defaultdict(int)
    carry: list[GroupedItem] = []
    for h, size in enumerate(d):
        pool = list(carry)
        for j, it in enumerate(instance.items):
            if it.size == size and not (skip_negative and it.value < 0):
                pool.extend(GroupedItem.single(instance, j) for _ in range(bounds[j]))
        pool.sort(key=_sort_key)
        slots = [r[i][h] // size for i in range(instance.m)]
        take = min(len(pool), sum(slots))
        chosen = iter(pool[:take])
        for i, free in enumerate(slots):
            for g in itertools.islice(chosen, free):
                for j, c in g.members:
                    x[(i, j, h)] += c
        if h + 1 < len(d):
            carry = group_items(pool[take:], d[h + 1])
    return AssignmentX(x)


def aopt_solve(instance: Instance) -> AssignmentX:
    """Optimal assignment with the OPT property.

    Items with negative value are never worth packing and are left out.
    """
    return _solve(instance, [it.bound for it in instance.items], skip_negative=True)


def aopt_solve_on_set(instance: Instance, keep: Mapping[int, int]) -> AssignmentX:
    """Rearrange exactly the item multiset `keep` (position -> copies)."""
    bounds = [0] * instance.n
    for j, c in keep.items():
        if not 0 <= j < instance.n:
            raise InfeasibleKeep(f"unknown item position {j}")
        if c < 0 or c > instance.items[j].bound:
            raise InfeasibleKeep(f"item {j}: {c} copies outside 0..{instance.items[j].bound}")
        bounds[j] = c
    x = _solve(instance, bounds, skip_negative=False)
    if list(x.totals(instance.n)) != bounds:
        raise InfeasibleKeep("the requested items do not fit into the knapsacks")
    return x


# OPT property -----------------------------------------------------------------

def is_opt_solution(x: AssignmentX, instance: Instance, budget: int = DEFAULT_CHECK_BUDGET) -> bool:
    """Every prefix value is maximal among solutions packing the same items."""
    from .oracle import enumerate_feasible_x

    target = x.prefix_values(instance)
    totals = x.totals(instance.n)
    try:
        for other in enumerate_feasible_x(instance, budget, totals=totals):
            if any(a > b for a, b in zip(other.prefix_values(instance), target)):
                return False
    except BudgetExceeded as exc:
        raise SearchSpaceTooLarge(str(exc)) from exc
    return True


# Ordered property ---------------------------------------------------------------

@dataclass(frozen=True)
class OrderViolation:
    knapsack: int
    part: int
    bundle: tuple[tuple[int, int], ...]  # (item position, copies) removed from the part
    partner: int  # item position of the replacing item
    partner_at: tuple[int, int] | None  # (knapsack, part) holding the partner, or None if unassigned


def find_order_violation(
    x: AssignmentX,
    instance: Instance,
    budget: int = DEFAULT_CHECK_BUDGET,
    max_bundle: int | None = None,
) -> OrderViolation | None:
    """Search for a bundle that an equal-size, equal-value item could replace."""
    partners: dict[tuple[int, Fraction], list[int]] = defaultdict(list)
    for j, it in enumerate(instance.items):
        partners[(it.size, it.value)].append(j)
    totals = x.totals(instance.n)
    where: dict[int, list[tuple[int, int]]] = defaultdict(list)
    contents: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for (i, j, h), c in x:
        where[j].append((h, i))
        contents[(i, h)].append((j, c))

    states = 0
    for (i, h), content in sorted(contents.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        limit = instance.sizes[h]
        for counts in itertools.product(*(range(c + 1) for _, c in content)):
            states += 1
            if states > budget:
                raise SearchSpaceTooLarge(f"more than {budget} bundles to inspect")
            k = sum(counts)
            if k < 2 or (max_bundle is not None and k > max_bundle):
                continue
            size = sum(instance.items[j].size * n for (j, _), n in zip(content, counts))
            if size > limit:
                continue
            value = sum((instance.items[j].value * n for (j, _), n in zip(content, counts)), Fraction(0))
            for p in partners.get((size, value), ()):
                bundle = tuple((j, n) for (j, _), n in zip(content, counts) if n)
                higher = sorted(loc for loc in where[p] if loc[0] > h)
                if higher:
                    hp, ip = higher[0]
                    return OrderViolation(i, h, bundle, p, (ip, hp))
                if totals[p] < instance.items[p].bound:
                    return OrderViolation(i, h, bundle, p, None)
    return None


def is_ordered_solution(
    x: AssignmentX,
    instance: Instance,
    budget: int = DEFAULT_CHECK_BUDGET,
    max_bundle: int | None = None,
) -> bool:
    return find_order_violation(x, instance, budget, max_bundle) is None


def make_ordered(x: AssignmentX, instance: Instance, budget: int = DEFAULT_CHECK_BUDGET) -> AssignmentX:
    """Apply swap/replace steps until no bundle can be traded for a single item.

    Each step keeps every prefix value and prefix size unchanged.  A partner
    sitting in a higher part is swapped with the bundle; an unassigned
    partner simply replaces it.
    """
    while (v := find_order_violation(x, instance, budget)) is not None:
        counts = x.as_dict()
        for j, n in v.bundle:
            counts[(v.knapsack, j, v.part)] -= n
        counts[(v.knapsack, v.partner, v.part)] = counts.get((v.knapsack, v.partner, v.part), 0) + 1
        if v.partner_at is not None:
            ip, hp = v.partner_at
            counts[(ip, v.partner, hp)] -= 1
            for j, n in v.bundle:
                counts[(ip, j, hp)] = counts.get((ip, j, hp), 0) + n
        x = AssignmentX(counts)
    return x
