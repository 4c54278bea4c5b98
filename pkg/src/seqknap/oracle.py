"""Exhaustive ground truth for small instances.

Both models are enumerated by the same depth-first counter: every variable
draws on one capacity slot (a knapsack part, or a block-model part) and on
one supply group (an item bound, or a block's chunk budget).  The
OPT/ordered filters and the optimum extraction are layered on top.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .aopt import find_order_violation
from .assignment import AssignmentX, AssignmentY
from .blocks import MspInstance, to_msp
from .errors import BudgetExceeded
from .instance import Instance, capacity_partition
from .optima import RestrictedProblem

DEFAULT_POINT_BUDGET = 10**6


@dataclass(frozen=True)
class EnumerationBudget:
    max_points: int = DEFAULT_POINT_BUDGET
    max_depth: int | None = None

    def __post_init__(self):
        if self.max_points < 1 or (self.max_depth is not None and self.max_depth < 1):
            raise ValueError("budget caps must be positive")


def _as_budget(budget) -> EnumerationBudget:
    if isinstance(budget, EnumerationBudget):
        return budget
    return EnumerationBudget(DEFAULT_POINT_BUDGET if budget is None else budget)


@dataclass(frozen=True)
class _Var:
    key: tuple[int, int, int]
    slot: int
    group: int
    unit: int  # slot capacity consumed per chunk
    num: int  # chunks(v) = ceil(num * v / den)
    den: int


def _count_vectors(
    variables: Sequence[_Var],
    slot_caps: Sequence[int],
    group_caps: Sequence[int],
    budget: EnumerationBudget,
    exact: bool = False,
) -> Iterator[tuple[int, ...]]:
    """Yield every count vector respecting the slot and group capacities.

    With `exact`, every group must be used up completely (unit chunks only).
    """
    k = len(variables)
    if budget.max_depth is not None and k > budget.max_depth:
        raise BudgetExceeded(f"{k} variables exceed the depth cap {budget.max_depth}")
    cap = list(slot_caps)
    left = list(group_caps)
    last = [False] * k
    for p in range(k - 1, -1, -1):
        if variables[p].group not in {v.group for v in variables[p + 1:]}:
            last[p] = True
    choice = [0] * k
    used = [0] * k  # chunks consumed by choice[p]
    top = [0] * k
    points = 0
    p = 0
    while True:
        advance = False
        if p == k:
            points += 1
            if points > budget.max_points:
                raise BudgetExceeded(f"more than {budget.max_points} feasible points")
            yield tuple(choice)
            p -= 1
        else:
            v = variables[p]
            most_chunks = min(cap[v.slot] // v.unit, left[v.group])
            hi = most_chunks * v.den // v.num
            if exact and last[p]:
                need = left[v.group]
                if need > hi:
                    p -= 1
                else:
                    choice[p] = top[p] = need
                    used[p] = need
                    cap[v.slot] -= need * v.unit
                    left[v.group] = 0
                    advance = True
            else:
                choice[p], used[p], top[p] = 0, 0, hi
                advance = True
        if advance:
            p += 1
            continue
        while p >= 0:
            v = variables[p]
            if choice[p] < top[p]:
                choice[p] += 1
                new = -(-v.num * choice[p] // v.den)
                cap[v.slot] -= (new - used[p]) * v.unit
                left[v.group] -= new - used[p]
                used[p] = new
                p += 1
                break
            cap[v.slot] += used[p] * v.unit
            left[v.group] += used[p]
            choice[p] = used[p] = 0
            p -= 1
        else:
            return


# Scoring in batches ------------------------------------------------------------

_BATCH = 20000


def _scale(values: Iterable[Fraction]) -> int:
    scale = 1
    for v in values:
        scale = math.lcm(scale, Fraction(v).denominator)
    return scale


@dataclass
class _Space:
    """Linear read-outs of a count vector: value, per-part values, signature."""

    keys: list[tuple[int, int, int]]
    weights: np.ndarray  # scaled integer value per variable
    part_of: np.ndarray  # part index per variable
    group_of: np.ndarray  # signature column per variable
    n_parts: int
    n_groups: int
    scale: int

    def __post_init__(self):
        k = len(self.keys)
        big = int(np.abs(self.weights).max(initial=0)) * max(k, 1) * 1024
        self.dtype = np.int64 if big < 2**62 else object
        self.weights = self.weights.astype(self.dtype)
        self.by_part = np.zeros((k, self.n_parts), dtype=self.dtype)
        self.by_group = np.zeros((k, self.n_groups), dtype=np.int64)
        for p in range(k):
            self.by_part[p, self.part_of[p]] = self.weights[p]
            self.by_group[p, self.group_of[p]] = 1

    def batches(self, vectors: Iterable[tuple[int, ...]]) -> Iterator[np.ndarray]:
        buf = []
        for vec in vectors:
            buf.append(vec)
            if len(buf) == _BATCH:
                yield np.array(buf, dtype=self.dtype)
                buf = []
        if buf:
            yield np.array(buf, dtype=self.dtype)

    def build(self, vec, cls):
        return cls([(key, int(c)) for key, c in zip(self.keys, vec) if c])


@dataclass
class _Scan:
    """Result of one pass: optimum, maximizers, OPT survivors and the point count."""

    count: int
    best: Fraction | None
    argmax: list
    opt: list  # points whose prefix values are maximal for their signature
    optimal_opt: list


def _scan(space: _Space, vectors: Iterable[tuple[int, ...]], cls, keep_opt: bool) -> _Scan:
    # per signature: componentwise max of prefix values, and the rows attaining it
    ceiling: dict[tuple, tuple] = {}
    holders: dict[tuple, list] = {}
    best, argmax, count = None, [], 0
    for arr in space.batches(vectors):
        count += len(arr)
        parts = np.cumsum(arr @ space.by_part, axis=1)
        values = parts[:, -1]
        top = values.max()
        if best is None or top > best:
            best, argmax = top, []
        if top == best:
            argmax.extend(arr[values == best])
        if not keep_opt:
            continue
        sigs = (arr @ space.by_group).tolist()
        for row, sig, pre in zip(arr, map(tuple, sigs), map(tuple, parts.tolist())):
            cur = ceiling.get(sig)
            if cur is None:
                ceiling[sig], holders[sig] = pre, [(row, pre)]
                continue
            top_pre = tuple(max(a, b) for a, b in zip(cur, pre))
            if top_pre != cur:
                ceiling[sig] = top_pre
                holders[sig] = [(r, p) for r, p in holders[sig] if p == top_pre]
            if pre == top_pre:
                holders[sig].append((row, pre))
    build = lambda r: space.build(r, cls)
    opt = [(build(r), p[-1]) for rows in holders.values() for r, p in rows]
    value = None if best is None else Fraction(int(best), space.scale)
    return _Scan(
        count, value, [build(r) for r in argmax],
        [x for x, _ in opt], [x for x, v in opt if v == best],
    )


# Item-level model ---------------------------------------------------------------

def _x_variables(instance: Instance):
    r = capacity_partition(instance).r
    variables, slots = [], {}
    for j, it in enumerate(instance.items):
        for i in range(instance.m):
            for h in range(instance.levels[j], instance.l):
                slot = slots.setdefault((i, h), len(slots))
                variables.append(_Var((i, j, h), slot, j, it.size, 1, 1))
    caps = [0] * len(slots)
    for (i, h), s in slots.items():
        caps[s] = r[i][h]
    return variables, caps


def _x_space(instance: Instance, variables) -> _Space:
    scale = _scale(it.value for it in instance.items)
    return _Space(
        [v.key for v in variables],
        np.array([int(instance.items[v.key[1]].value * scale) for v in variables], dtype=object),
        np.array([v.key[2] for v in variables], dtype=np.int64),
        np.array([v.key[1] for v in variables], dtype=np.int64),
        instance.l,
        instance.n,
        scale,
    )


def enumerate_feasible_x(
    instance: Instance, budget=None, totals: Sequence[int] | None = None
) -> Iterator[AssignmentX]:
    """Every feasible item-level assignment exactly once.

    With `totals`, only assignments packing exactly totals[j] copies of item j.
    """
    variables, caps = _x_variables(instance)
    groups = list(totals) if totals is not None else [it.bound for it in instance.items]
    keys = [v.key for v in variables]
    for vec in _count_vectors(variables, caps, groups, _as_budget(budget), exact=totals is not None):
        yield AssignmentX([(key, c) for key, c in zip(keys, vec) if c])


def count_feasible_x(instance: Instance, budget=None) -> int:
    variables, caps = _x_variables(instance)
    groups = [it.bound for it in instance.items]
    return sum(1 for _ in _count_vectors(variables, caps, groups, _as_budget(budget)))


def _scan_x(instance: Instance, budget, keep_opt: bool) -> _Scan:
    variables, caps = _x_variables(instance)
    groups = [it.bound for it in instance.items]
    space = _x_space(instance, variables)
    return _scan(space, _count_vectors(variables, caps, groups, _as_budget(budget)), AssignmentX, keep_opt)


def brute_optimum(instance: Instance, budget=None) -> tuple[Fraction, list[AssignmentX]]:
    """Optimal value and every maximizer."""
    scan = _scan_x(instance, budget, keep_opt=False)
    return scan.best, scan.argmax


def filter_opt_ordered(points: Sequence[AssignmentX], instance: Instance, candidates=None) -> list[AssignmentX]:
    """Points of `candidates` (default: all points) with both properties.

    `points` must be the complete feasible set, since the OPT property
    compares against every point packing the same items.
    """
    best: dict = {}
    for x in points:
        sig, pre = x.totals(instance.n), x.prefix_values(instance)
        cur = best.get(sig)
        best[sig] = pre if cur is None else tuple(max(a, b) for a, b in zip(cur, pre))
    pool = points if candidates is None else candidates
    return [
        x for x in pool
        if x.prefix_values(instance) == best[x.totals(instance.n)]
        and find_order_violation(x, instance) is None
    ]


def opt_ordered_x(instance: Instance, budget=None) -> list[AssignmentX]:
    """All feasible points with the OPT and the ordered property."""
    scan = _scan_x(instance, budget, keep_opt=True)
    return [x for x in scan.opt if find_order_violation(x, instance) is None]


def mo_oo_x(instance: Instance, budget=None) -> list[AssignmentX]:
    scan = _scan_x(instance, budget, keep_opt=True)
    return [x for x in scan.optimal_opt if find_order_violation(x, instance) is None]


# Block model --------------------------------------------------------------------

def _problem(target) -> RestrictedProblem:
    if isinstance(target, RestrictedProblem):
        return target
    if isinstance(target, MspInstance):
        return RestrictedProblem.full(target)
    if isinstance(target, Instance):
        return RestrictedProblem.full(to_msp(target))
    raise TypeError(f"cannot enumerate over {type(target).__name__}")


def _y_variables(prob: RestrictedProblem):
    msp = prob.msp
    variables, groups = [], []
    for w, q in prob.pairs():
        g = len(groups)
        groups.append(msp.chunk_limit(w, q))
        for h in range(q, msp.l):
            variables.append(_Var((w, q, h), h, g, msp.sizes[q], msp.f[w], msp.sizes[q]))
    return variables, groups


def _y_space(prob: RestrictedProblem, variables) -> _Space:
    msp = prob.msp
    scale = _scale(msp.p)
    pairs = {}
    for v in variables:
        pairs.setdefault(v.key[:2], len(pairs))
    return _Space(
        [v.key for v in variables],
        np.array([int(msp.p[v.key[0]] * scale) for v in variables], dtype=object),
        np.array([v.key[2] for v in variables], dtype=np.int64),
        np.array([pairs[v.key[:2]] for v in variables], dtype=np.int64),
        msp.l,
        len(pairs),
        scale,
    )


def enumerate_feasible_y(target, budget=None) -> Iterator[AssignmentY]:
    """Every feasible block assignment of a restricted problem (or full model)."""
    prob = _problem(target)
    variables, groups = _y_variables(prob)
    keys = [v.key for v in variables]
    for vec in _count_vectors(variables, prob.F, groups, _as_budget(budget)):
        yield AssignmentY([(key, c) for key, c in zip(keys, vec) if c])


def count_feasible_y(target, budget=None) -> int:
    prob = _problem(target)
    variables, groups = _y_variables(prob)
    return sum(1 for _ in _count_vectors(variables, prob.F, groups, _as_budget(budget)))


def brute_optimum_y(target, budget=None) -> tuple[Fraction, list[AssignmentY]]:
    prob = _problem(target)
    variables, groups = _y_variables(prob)
    space = _y_space(prob, variables)
    scan = _scan(space, _count_vectors(variables, prob.F, groups, _as_budget(budget)), AssignmentY, False)
    return scan.best, scan.argmax


def _exact_sums(items: Sequence[tuple[int, Fraction, int]], target: int) -> set[Fraction]:
    """Profits of sub-multisets of (size, profit, copies) with total size `target`."""
    reach: dict[int, set[Fraction]] = {0: {Fraction(0)}}
    for size, profit, copies in items:
        nxt: dict[int, set[Fraction]] = defaultdict(set)
        for s, values in reach.items():
            for c in range(copies + 1):
                t = s + c * size
                if t > target:
                    break
                nxt[t].update(v + c * profit for v in values)
        reach = nxt
    return reach.get(target, set())


def y_order_violation(y: AssignmentY, target) -> tuple[int, int] | None:
    """(part, class) of a bundle of lighter-class items in some part whose size and
    profit match a set of class-q items sitting higher or unassigned."""
    prob = _problem(target)
    msp = prob.msp
    for h in range(msp.l):
        for q in range(1, min(h, prob.b) + 1):
            size = msp.sizes[q]
            lower = [(msp.f[w], msp.p[w], c) for (w, qq, hh), c in y if hh == h and qq < q]
            if sum(f * c for f, _, c in lower) < size:
                continue
            avail = []
            for w in prob.types_in(q):
                placed = sum(y.get(w, q, hh) for hh in range(q, h + 1))
                free = msp.tilde_b[w][q] - placed
                if free:
                    avail.append((msp.f[w], msp.p[w], free))
            if avail and _exact_sums(lower, size) & _exact_sums(avail, size):
                return h, q
    return None


def filter_opt_ordered_y(points: Sequence[AssignmentY], target, candidates=None) -> list[AssignmentY]:
    prob = _problem(target)
    msp = prob.msp
    best: dict = {}
    for y in points:
        sig, pre = y.signature(), msp.prefix_profits(y)
        cur = best.get(sig)
        best[sig] = pre if cur is None else tuple(max(a, b) for a, b in zip(cur, pre))
    pool = points if candidates is None else candidates
    return [
        y for y in pool
        if msp.prefix_profits(y) == best[y.signature()] and y_order_violation(y, prob) is None
    ]


@dataclass
class YSweep:
    """Everything the condition checks need from one exhaustive pass."""

    count: int
    optimum: Fraction
    opt_ordered: list[AssignmentY]
    mo_oo: list[AssignmentY]


def sweep_y(target, budget=None) -> YSweep:
    prob = _problem(target)
    variables, groups = _y_variables(prob)
    space = _y_space(prob, variables)
    scan = _scan(space, _count_vectors(variables, prob.F, groups, _as_budget(budget)), AssignmentY, True)
    oo = [y for y in scan.opt if y_order_violation(y, prob) is None]
    best = scan.best
    return YSweep(scan.count, best, oo, [y for y in oo if prob.msp.profit(y) == best])


def mo_oo(target, budget=None) -> list:
    """Optimal solutions with both the OPT and the ordered property.

    An Instance yields item-level points; a RestrictedProblem or MspInstance
    yields block-level points.
    """
    if isinstance(target, Instance):
        return mo_oo_x(target, budget)
    return sweep_y(target, budget).mo_oo
