"""Range calculus and branch enumeration for optimal block assignments.

A restricted problem keeps block types up to k in size classes up to b,
with per-part capacities F.  For the heaviest active type the candidate
values of its part-b count and of its total count over parts b..l are
confined to at most three consecutive multiples of d_b / f_k.  They are
derived from the total size of strictly better (higher-gain) items that
must already occupy the lower parts.  Fixing one type and shrinking F
gives the next problem; class 1 (unit-size items) has a unique greedy
solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Mapping

from .assignment import AssignmentY
from .blocks import MspInstance
from .errors import BranchBudgetExceeded, DivisibilityViolation, InfeasibleY

log = logging.getLogger(__name__)

DEFAULT_BRANCH_BUDGET = 10**5


@dataclass(frozen=True)
class RestrictedProblem:
    """Blocks 0..k in class b, blocks 0..lower_k in classes < b, capacities F."""

    msp: MspInstance
    k: int
    b: int
    F: tuple[int, ...]
    lower_k: int = -2  # -2 means "same as k"

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(self.F))
        if self.lower_k == -2:
            object.__setattr__(self, "lower_k", self.k)

    @classmethod
    def full(cls, msp: MspInstance) -> "RestrictedProblem":
        return cls(msp, msp.t - 1, msp.l - 1, msp.part_capacities)

    def delta(self, h: int) -> int:
        return min(self.msp.sizes[h], self.msp.sizes[self.b])

    def top_type(self, q: int) -> int:
        if q > self.b:
            return -1
        return self.k if q == self.b else self.lower_k

    def contains(self, w: int, q: int) -> bool:
        return w <= self.top_type(q) and self.msp.tilde_b[w][q] > 0

    def types_in(self, q: int) -> list[int]:
        return [w for w in range(self.top_type(q) + 1) if self.msp.tilde_b[w][q] > 0]

    def pairs(self) -> list[tuple[int, int]]:
        """All (w, q) pairs of the universe, ordered by class then type."""
        return [(w, q) for q in range(self.b + 1) for w in self.types_in(q)]

    def next_type(self) -> int | None:
        """Heaviest type still present in class b."""
        found = self.types_in(self.b)
        return found[-1] if found else None

    def validate(self) -> None:
        if len(self.F) != self.msp.l:
            raise ValueError(f"F needs {self.msp.l} entries, got {len(self.F)}")
        for h, cap in enumerate(self.F):
            if cap < 0:
                raise ValueError(f"F[{h}] is negative")
            if cap % self.delta(h):
                raise DivisibilityViolation(f"F[{h}] = {cap} is not a multiple of {self.delta(h)}")

    def fixed(self, w: int, values: Mapping[int, int]) -> "RestrictedProblem":
        """Remove type w from class b after placing `values[h]` of its items in part h."""
        F = list(self.F)
        for h, v in values.items():
            F[h] -= self.msp.f[w] * v
            if F[h] < 0:
                raise InfeasibleY(f"part {h} overflows when fixing type {w}")
        return replace(self, k=w - 1, F=tuple(F))

    def descend(self) -> "RestrictedProblem":
        return replace(self, k=self.lower_k, b=self.b - 1)

    def is_feasible(self, y: AssignmentY) -> bool:
        for (w, q, h), _ in y:
            if not self.contains(w, q):
                return False
        return self.msp.is_feasible(y, self.F)


@dataclass(frozen=True)
class HProfile:
    sizes: tuple[int, ...]  # f(H_k^g) per part g
    mins: tuple[int, ...]  # v^g per part g


def gain_dominators(problem: RestrictedProblem, j: int) -> dict[tuple[int, int], int]:
    """Items of the universe with a strictly larger gain than type j, as (w, q) -> copies."""
    msp = problem.msp
    return {
        (w, q): msp.tilde_b[w][q]
        for (w, q) in problem.pairs()
        if msp.p[w] * msp.f[j] > msp.p[j] * msp.f[w]
    }


def h_profile(problem: RestrictedProblem, j: int) -> HProfile:
    """Sizes of the better-gain sets that must precede type j, part by part.

    Heavier types are dropped only from class b, where they are already fixed;
    lower classes keep every type of the universe.
    """
    msp = problem.msp
    better = gain_dominators(problem, j)
    sizes, mins = [], []
    taken = 0
    for g in range(msp.l):
        bar = sum(
            msp.f[w] * n for (w, q), n in better.items()
            if q <= g and not (q == problem.b and w > j)
        )
        size = bar - taken
        delta = problem.delta(g)
        v = min(size // delta * delta, problem.F[g])
        sizes.append(size)
        mins.append(v)
        taken += v
    return HProfile(tuple(sizes), tuple(mins))


def availability_bounds(problem: RestrictedProblem, j: int, g: int) -> tuple[int, int]:
    size = h_profile(problem, j).sizes[g]
    delta = problem.delta(g)
    return size // delta * delta, size + delta


def _window(cap: int, better: int, delta: int, f: int, limit: int) -> list[int]:
    low_cut = -(-(better + delta) // delta) * delta
    high_cut = better // delta * delta
    lower = min(max(cap - low_cut, 0) // f, limit)
    upper = min(max(cap - high_cut, 0) // f, limit)
    return list(range(lower, upper + 1, delta // f))


def value_range_top(problem: RestrictedProblem, j: int | None = None) -> list[int]:
    """Candidate counts of type j (default: the heaviest active type) in part b."""
    j = problem.next_type() if j is None else j
    b = problem.b
    if j is None or problem.msp.tilde_b[j][b] == 0:
        return [0]
    better = h_profile(problem, j).sizes[b]
    return _window(problem.F[b], better, problem.delta(b), problem.msp.f[j], problem.msp.tilde_b[j][b])


def value_range_tail(problem: RestrictedProblem, j: int | None = None) -> list[int]:
    """Candidate counts of type j over all parts b..l together."""
    j = problem.next_type() if j is None else j
    b = problem.b
    if j is None or problem.msp.tilde_b[j][b] == 0:
        return [0]
    better = h_profile(problem, j).sizes[b]
    cap = sum(problem.F[b:])
    return _window(cap, better, problem.delta(b), problem.msp.f[j], problem.msp.tilde_b[j][b])


def next_type_range(
    problem: RestrictedProblem, values: Mapping[int, int]
) -> tuple[RestrictedProblem, list[int]]:
    """Fix the heaviest type with per-part `values`; return the reduced problem and
    the part-b candidates of the next type."""
    w = problem.next_type()
    if w is None:
        raise ValueError("no active type left in this class")
    reduced = problem.fixed(w, values)
    return reduced, value_range_top(reduced)


def base_case(problem: RestrictedProblem) -> AssignmentY:
    """Unique optimum of class 1: fill parts in order, best type first."""
    if problem.b != 0:
        raise ValueError("the base case needs b = 0")
    F = list(problem.F)
    y = {}
    for w in problem.types_in(0):
        left = problem.msp.tilde_b[w][0]
        for h in range(len(F)):
            take = min(F[h], left)
            if take:
                y[(w, 0, h)] = take
                F[h] -= take
                left -= take
    return AssignmentY(y)


# Branch enumeration -----------------------------------------------------------

@dataclass
class EnumerationResult:
    candidates: list[AssignmentY]
    optima: list[AssignmentY]
    best: Fraction | None
    branches: int
    tree: dict | None = field(default=None, repr=False)


def _spread(rest: int, parts: list[int], F: tuple[int, ...], f: int, step: int) -> Iterator[dict[int, int]]:
    if rest % step:
        return
    if not parts:
        if rest == 0:
            yield {}
        return
    h, others = parts[0], parts[1:]
    most = min(rest, F[h] // f // step * step)
    for v in range(most, -1, -step):
        for tail in _spread(rest - v, others, F, f, step):
            yield {h: v, **tail} if v else tail


def enumerate_optima(
    problem: RestrictedProblem,
    budget: int = DEFAULT_BRANCH_BUDGET,
    record_tree: bool = False,
) -> EnumerationResult:
    """Walk the candidate tree and keep the best leaves.

    Types are fixed heaviest first within a class and classes from the top
    down.  Each fixation uses the part-b and all-parts windows; the
    remaining count is spread over the higher parts in every feasible way.
    """
    problem.validate()
    msp = problem.msp
    count = 0
    seen: dict[AssignmentY, None] = {}

    def expand(prob: RestrictedProblem, partial: dict, node: dict | None):
        nonlocal count
        while prob.b > 0 and prob.next_type() is None:
            prob = prob.descend()
        if prob.b == 0:
            y = AssignmentY(list(partial.items()) + list(base_case(prob)))
            seen.setdefault(y, None)
            if node is not None:
                node["leaf"] = y.to_json()["y"]
                node["profit"] = str(msp.profit(y))
            return
        w, b = prob.next_type(), prob.b
        top, tail = value_range_top(prob, w), value_range_tail(prob, w)
        step = prob.delta(b) // msp.f[w]
        if node is not None:
            node.update({"class": b + 1, "type": w + 1, "F": list(prob.F), "top": top, "tail": tail, "branches": []})
        for t in top:
            for total in tail:
                if total < t:
                    continue
                for spread in _spread(total - t, list(range(b + 1, msp.l)), prob.F, msp.f[w], step):
                    count += 1
                    if count > budget:
                        raise BranchBudgetExceeded(f"more than {budget} branches")
                    values = {b: t, **spread}
                    child = prob.fixed(w, values)
                    child.validate()
                    entries = dict(partial)
                    for h, v in values.items():
                        if v:
                            entries[(w, b, h)] = v
                    sub = None
                    if node is not None:
                        sub = {}
                        node["branches"].append({"parts": {str(h + 1): v for h, v in values.items()}, "child": sub})
                    expand(child, entries, sub)

    tree = {} if record_tree else None
    expand(problem, {}, tree)
    candidates = list(seen)
    best = max((msp.profit(y) for y in candidates), default=None)
    optima = [y for y in candidates if msp.profit(y) == best]
    log.debug("enumeration: %d branches, %d leaves, %d optima", count, len(candidates), len(optima))
    return EnumerationResult(candidates, optima, best, count, tree)


# Soundness trace --------------------------------------------------------------

@dataclass(frozen=True)
class RangeCheck:
    level: int
    type: int
    top_value: int
    top_range: tuple[int, ...]
    tail_value: int
    tail_range: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.top_value in self.top_range and self.tail_value in self.tail_range


@dataclass(frozen=True)
class RangeTrace:
    checks: tuple[RangeCheck, ...]
    base_expected: AssignmentY
    base_actual: AssignmentY

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks) and self.base_expected == self.base_actual

    def failures(self) -> list[str]:
        out = [repr(c) for c in self.checks if not c.ok]
        if self.base_expected != self.base_actual:
            out.append(f"class-1 part {self.base_actual} != greedy {self.base_expected}")
        return out


def trace_ranges(problem: RestrictedProblem, y: AssignmentY) -> RangeTrace:
    """Follow the fixations that `y` itself makes and test each against its window."""
    checks = []
    l = problem.msp.l
    while problem.b > 0:
        w = problem.next_type()
        if w is None:
            problem = problem.descend()
            continue
        b = problem.b
        values = {h: y.get(w, b, h) for h in range(b, l)}
        checks.append(RangeCheck(
            b, w,
            values[b], tuple(value_range_top(problem, w)),
            sum(values.values()), tuple(value_range_tail(problem, w)),
        ))
        problem = problem.fixed(w, values)
    actual = y.restricted(lambda w, q, h: q == 0)
    return RangeTrace(tuple(checks), base_case(problem), actual)
