"""Inductive valid-inequality families for the restricted block model.

Every inequality has the shape

    sum_{w,q} a_{w,q} f_w / d_q * sum_h y[w,q,h]  <=  g(sum_{h>=b} F_h)

where each coefficient a_{w,q} of a size class q >= 1 is one of two
increments of the right-hand-side function of the smaller problem (the
"alpha" and "beta" choices), and class-1 coefficients are 1.  A family
holds one inequality per alpha/beta selection.  The right-hand side g is
concave in its capacity argument; it is evaluated recursively, type by
type within a class and then one class down.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .assignment import AssignmentX, AssignmentY
from .blocks import MspInstance, XInequality, lift_inequality, to_msp
from .errors import DivisibilityViolation, SelectionBudgetExceeded, SubsetBudgetExceeded
from .instance import Instance, ItemType, fraction_to_json
from .optima import RestrictedProblem, h_profile

log = logging.getLogger(__name__)

DEFAULT_PAIR_LIMIT = 16
DEFAULT_SUBSET_CAP = 4096


class Tag(enum.Enum):
    ALPHA = "α"
    BETA = "β"


@dataclass(frozen=True)
class CoefficientSelection:
    """An alpha/beta choice for each selectable (w, q) pair."""

    choices: tuple[tuple[tuple[int, int], Tag], ...]

    def __post_init__(self):
        object.__setattr__(self, "_map", dict(self.choices))

    def __getitem__(self, pair: tuple[int, int]) -> Tag:
        return self._map[pair]

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(p for p, _ in self.choices)

    def label(self) -> str:
        return "".join(t.value for _, t in self.choices)

    @classmethod
    def parse(cls, pairs: Sequence[tuple[int, int]], label: str) -> "CoefficientSelection":
        if len(label) != len(pairs):
            raise ValueError(f"selection needs {len(pairs)} tags, got {len(label)}")
        lookup = {"α": Tag.ALPHA, "a": Tag.ALPHA, "β": Tag.BETA, "b": Tag.BETA}
        return cls(tuple((p, lookup[c]) for p, c in zip(pairs, label)))


def selectable_pairs(problem: RestrictedProblem) -> list[tuple[int, int]]:
    """Pairs carrying an alpha/beta coefficient, by class then type."""
    return [(w, q) for (w, q) in problem.pairs() if q >= 1]


def all_selections(pairs: Sequence[tuple[int, int]]) -> Iterable[CoefficientSelection]:
    """Every selection; the first pair varies fastest."""
    for combo in itertools.product((Tag.ALPHA, Tag.BETA), repeat=len(pairs)):
        yield CoefficientSelection(tuple(zip(pairs, reversed(combo))))


@dataclass
class GContext:
    """Right-hand-side function of one selection over one restricted problem.

    Only the capacities of the classes below b enter as fixed numbers; the
    capacity of classes b and above is the argument of g.
    """

    problem: RestrictedProblem
    selection: CoefficientSelection
    memo: dict = field(default_factory=dict)

    @property
    def msp(self) -> MspInstance:
        return self.problem.msp

    def _active(self, k: int, b: int) -> bool:
        return k <= self.problem.top_type(b) and self.msp.tilde_b[k][b] > 0

    def _sub(self, k: int, b: int) -> RestrictedProblem:
        F = tuple(self.problem.F[:b]) + (0,) * (self.msp.l - b)
        return RestrictedProblem(self.msp, k, b, F, self.problem.lower_k)

    def base(self, k: int, b: int) -> int:
        """d_b-multiple below the better-gain load that precedes type k in class b."""
        d = self.msp.sizes[b]
        return h_profile(self._sub(k, b), k).sizes[b] // d * d

    def _next(self, k: int, b: int, S: int) -> int:
        if k > 0:
            return self.g(k - 1, b, S)
        return self.g(self.problem.top_type(b - 1), b - 1, self.problem.F[b - 1] + S)

    def alpha_beta(self, k: int, b: int) -> tuple[int, int]:
        d = self.msp.sizes[b]
        base = self.base(k, b)
        g0, g1, g2 = (self._next(k, b, base + i * d) for i in range(3))
        return g1 - g0, g2 - g1

    def coefficient(self, k: int, b: int) -> int:
        alpha, beta = self.alpha_beta(k, b)
        return alpha if self.selection[(k, b)] is Tag.ALPHA else beta

    def g(self, k: int, b: int, S: int) -> int:
        key = (k, b, S)
        if key in self.memo:
            return self.memo[key]
        msp = self.msp
        d = msp.sizes[b]
        if S % d:
            raise DivisibilityViolation(f"capacity {S} is not a multiple of {d}")
        if b == 0:
            value = min(S, sum(msp.tilde_b[w][0] for w in range(k + 1)))
        elif k < 0:
            value = self.g(self.problem.top_type(b - 1), b - 1, self.problem.F[b - 1] + S)
        elif not self._active(k, b):
            value = self.g(k - 1, b, S)
        else:
            base = self.base(k, b)
            tag = self.selection[(k, b)]
            start = base + (d if tag is Tag.BETA else 0)
            s = (S - start) // d
            cap = msp.f[k] * msp.tilde_b[k][b] // d
            sigma = min(max(s, 0), cap)
            if s < 0:
                U = S
            elif s <= cap:
                U = start
            else:
                U = S - cap * d
            value = self._next(k, b, U) + self.coefficient(k, b) * sigma
        self.memo[key] = value
        return value

    def rhs(self) -> int:
        prob = self.problem
        return self.g(prob.k, prob.b, sum(prob.F[prob.b:]))

    def coefficients(self) -> dict[tuple[int, int], Fraction]:
        out = {}
        for w, q in self.problem.pairs():
            if q == 0:
                out[(w, q)] = Fraction(1)
            else:
                out[(w, q)] = Fraction(self.coefficient(w, q) * self.msp.f[w], self.msp.sizes[q])
        return out


def g_value(problem: RestrictedProblem, selection: CoefficientSelection, k: int, b: int, S: int) -> int:
    return GContext(problem, selection).g(k, b, S)


def alpha_beta(problem: RestrictedProblem, selection: CoefficientSelection, k: int, b: int) -> tuple[int, int]:
    return GContext(problem, selection).alpha_beta(k, b)


@dataclass(frozen=True)
class YInequality:
    """sum coefficients[(w, q)] * sum_h y[w, q, h] <= rhs."""

    coefficients: tuple[tuple[tuple[int, int], Fraction], ...]
    rhs: Fraction
    selection: CoefficientSelection | None = None

    def lhs(self, y: AssignmentY) -> Fraction:
        return sum((c * y.total(w, q) for (w, q), c in self.coefficients), Fraction(0))

    def holds(self, y: AssignmentY) -> bool:
        return self.lhs(y) <= self.rhs

    def is_tight(self, y: AssignmentY) -> bool:
        return self.lhs(y) == self.rhs

    def support(self) -> tuple[tuple[tuple[int, int], Fraction], ...]:
        return tuple((p, c) for p, c in self.coefficients if c)

    def to_json(self) -> dict:
        return {
            "lhs": [
                {"w": w + 1, "q": q + 1, "coef": fraction_to_json(c)}
                for (w, q), c in self.coefficients
            ],
            "rhs": fraction_to_json(self.rhs),
            "selection": self.selection.label() if self.selection else "",
        }


def base_inequality(problem: RestrictedProblem) -> YInequality:
    """The single inequality of a unit-size-only problem."""
    if problem.b != 0:
        raise ValueError("the base inequality needs b = 0")
    ctx = GContext(problem, CoefficientSelection(()))
    return YInequality(tuple(ctx.coefficients().items()), Fraction(ctx.rhs()), ctx.selection)


def _as_problem(target, k=None, b=None, F=None) -> RestrictedProblem:
    if isinstance(target, RestrictedProblem):
        return target
    msp = to_msp(target) if isinstance(target, Instance) else target
    full = RestrictedProblem.full(msp)
    return RestrictedProblem(
        msp,
        full.k if k is None else k,
        full.b if b is None else b,
        full.F if F is None else tuple(F),
    )


def generate_I(
    target,
    k: int | None = None,
    b: int | None = None,
    F: Sequence[int] | None = None,
    max_pairs: int = DEFAULT_PAIR_LIMIT,
    dedup: bool = True,
) -> list[YInequality]:
    """The family for a restricted problem, one inequality per selection.

    `target` is a RestrictedProblem, or an MspInstance / Instance together
    with optional k, b, F (defaults: the full problem).
    """
    problem = _as_problem(target, k, b, F)
    problem.validate()
    pairs = selectable_pairs(problem)
    if len(pairs) > max_pairs:
        raise SelectionBudgetExceeded(f"{len(pairs)} selectable pairs exceed the limit {max_pairs}")
    out, seen = [], set()
    for sel in all_selections(pairs):
        ctx = GContext(problem, sel)
        ineq = YInequality(tuple(ctx.coefficients().items()), Fraction(ctx.rhs()), sel)
        key = (ineq.coefficients, ineq.rhs)
        if dedup and key in seen:
            continue
        seen.add(key)
        out.append(ineq)
    log.debug("family at k=%d b=%d F=%s: %d inequalities", problem.k, problem.b, problem.F, len(out))
    return out


# Condition checks -------------------------------------------------------------------

@dataclass
class ConditionReport:
    points: int
    opt_ordered: int
    optima: int
    invalid: list[tuple[YInequality, AssignmentY]]
    uncovered: list[AssignmentY]

    @property
    def ok(self) -> bool:
        return not self.invalid and not self.uncovered

    def to_json(self) -> dict:
        return {
            "points": self.points,
            "opt_ordered": self.opt_ordered,
            "optima": self.optima,
            "ok": self.ok,
            "invalid": [{"inequality": i.to_json(), "point": y.to_json()["y"]} for i, y in self.invalid],
            "uncovered": [y.to_json()["y"] for y in self.uncovered],
        }


def check_conditions(inequalities: Sequence[YInequality], problem: RestrictedProblem, budget=None) -> ConditionReport:
    """Validity over all OPT/ordered points, and tightness at every optimal one."""
    from .oracle import sweep_y

    sweep = sweep_y(problem, budget)
    invalid = [(ineq, y) for y in sweep.opt_ordered for ineq in inequalities if not ineq.holds(y)]
    uncovered = [y for y in sweep.mo_oo if not any(i.is_tight(y) for i in inequalities)]
    return ConditionReport(sweep.count, len(sweep.opt_ordered), len(sweep.mo_oo), invalid, uncovered)


def coefficients_stable(problem: RestrictedProblem, other_F: Sequence[int], max_pairs: int = DEFAULT_PAIR_LIMIT) -> bool:
    """Lower-class coefficients do not depend on the capacities from class b up."""
    other = RestrictedProblem(problem.msp, problem.k, problem.b, tuple(other_F), problem.lower_k)
    if other.F[: problem.b] != problem.F[: problem.b]:
        raise ValueError("the capacities below class b must agree")
    pairs = selectable_pairs(problem)
    if len(pairs) > max_pairs:
        raise SelectionBudgetExceeded(f"{len(pairs)} selectable pairs exceed the limit {max_pairs}")
    for sel in all_selections(pairs):
        a = GContext(problem, sel).coefficients()
        c = GContext(other, sel).coefficients()
        if any(a[p] != c[p] for p in a if p[1] < problem.b):
            return False
    return True


# Item-level description ----------------------------------------------------------------

def _scaled_subinstance(instance: Instance, subset: Sequence[int]) -> tuple[Instance, list[int]]:
    """Items of `subset`, sizes divided by the smallest one, capacities floored to match."""
    unit = min(instance.items[j].size for j in subset)
    items = sorted(subset, key=lambda j: (instance.items[j].size, -instance.items[j].value, instance.items[j].index))
    scaled = tuple(
        ItemType(instance.items[j].size // unit, instance.items[j].value, instance.items[j].bound, instance.items[j].index)
        for j in items
    )
    sub = Instance(scaled, tuple(c // unit for c in instance.capacities))
    return sub, items


def describe_polytope(
    instance: Instance,
    subset_cap: int = DEFAULT_SUBSET_CAP,
    allow_large: bool = False,
    max_pairs: int = DEFAULT_PAIR_LIMIT,
) -> list[XInequality]:
    """Union over item subsets W of the lifted full-problem families of W.

    Non-negativity of x is implied and not listed.  Each subset's items are
    rescaled so the smallest size becomes 1; coefficients are keyed by the
    positions of the original instance.
    """
    n = instance.n
    count = 2**n - 1
    if count > subset_cap and not allow_large:
        raise SubsetBudgetExceeded(f"{count} subsets exceed the cap {subset_cap}")
    out: dict[tuple, XInequality] = {}
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            sub, positions = _scaled_subinstance(instance, subset)
            msp = to_msp(sub)
            for ineq in generate_I(msp, max_pairs=max_pairs):
                lifted = lift_inequality(ineq.coefficients, ineq.rhs, sub, msp)
                coeffs = tuple(sorted((positions[j], c) for j, c in lifted.coefficients))
                key = (coeffs, lifted.rhs)
                out.setdefault(key, XInequality(coeffs, lifted.rhs))
    return list(out.values())


def _integer_rows(inequalities: Sequence[XInequality], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Each inequality scaled by its denominators' lcm, as an exact integer row."""
    rows, rhs = [], []
    for ineq in inequalities:
        scale = math.lcm(ineq.rhs.denominator, *(c.denominator for _, c in ineq.coefficients))
        row = [0] * n
        for j, c in ineq.coefficients:
            row[j] = int(c * scale)
        rows.append(row)
        rhs.append(int(ineq.rhs * scale))
    return np.array(rows, dtype=object).reshape(len(rows), n), np.array(rhs, dtype=object)


def find_violations(
    inequalities: Sequence[XInequality], points: Iterable[AssignmentX], n: int
) -> list[tuple[XInequality, AssignmentX]]:
    """All (inequality, point) pairs where the point breaks the inequality."""
    points = list(points)
    if not points or not inequalities:
        return []
    A, rhs = _integer_rows(inequalities, n)
    totals = np.array([x.totals(n) for x in points], dtype=object).reshape(len(points), n)
    bad = np.argwhere(totals @ A.T > rhs)
    return [(inequalities[i], points[p]) for p, i in bad]


def violated(inequalities: Iterable[XInequality], x: AssignmentX, n: int) -> list[XInequality]:
    totals = x.totals(n)
    return [
        i for i in inequalities
        if sum((c * totals[j] for j, c in i.coefficients), Fraction(0)) > i.rhs
    ]
