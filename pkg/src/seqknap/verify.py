"""Cross-check the whole pipeline on one instance against exhaustive enumeration."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

from . import oracle
from .aopt import aopt_solve
from .blocks import to_msp, x_to_y, y_to_x
from .errors import BudgetExceeded
from .inequalities import check_conditions, describe_polytope, find_violations, generate_I
from .instance import Instance, restrict
from .optima import RestrictedProblem, enumerate_optima, trace_ranges

log = logging.getLogger(__name__)


@dataclass
class Check:
    name: str
    ok: bool | None  # None: skipped
    detail: str = ""
    counterexample: object = None

    def to_json(self) -> dict:
        out = {"name": self.name, "status": {True: "pass", False: "fail", None: "skipped"}[self.ok]}
        if self.detail:
            out["detail"] = self.detail
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok is not False for c in self.checks)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_json() for c in self.checks]}


def verify_instance(
    instance: Instance,
    max_points: int = 10**6,
    max_branches: int = 10**5,
    subset_cap: int = 64,
) -> Report:
    report = Report()
    msp = to_msp(instance)
    full = RestrictedProblem.full(msp)

    def run(name: str, body: Callable[[], Check]):
        try:
            check = body()
        except BudgetExceeded as exc:
            check = Check(name, None, str(exc))
        check.name = name
        log.info("%s: %s", name, check.ok)
        report.checks.append(check)

    def solve() -> Check:
        x = aopt_solve(instance)
        best, _ = oracle.brute_optimum(instance, max_points)
        if not x.is_feasible(instance):
            return Check("", False, "solver output is infeasible", x.to_json(instance))
        if x.value(instance) != best:
            return Check("", False, f"solver value {x.value(instance)} != optimum {best}", x.to_json(instance))
        prefixes = x.prefix_values(instance)
        for h in range(instance.l):
            sub_best, _ = oracle.brute_optimum(restrict(instance, h + 1), max_points)
            if prefixes[h] != sub_best:
                return Check("", False, f"prefix value of part {h + 1} is not optimal", x.to_json(instance))
        return Check("", True, f"optimum {best}")

    def correspondence() -> Check:
        for x in oracle.enumerate_feasible_x(instance, max_points):
            y = x_to_y(x, instance, msp)
            if not msp.is_feasible(y) or msp.profit(y) != x.value(instance):
                return Check("", False, "x -> y breaks feasibility or value", x.to_json(instance))
        for y in oracle.enumerate_feasible_y(msp, max_points):
            x = y_to_x(y, instance, msp)
            if not x.is_feasible(instance) or x.value(instance) < msp.profit(y):
                return Check("", False, "y -> x breaks feasibility or value", y.to_json())
        bx, _ = oracle.brute_optimum(instance, max_points)
        by, _ = oracle.brute_optimum_y(msp, max_points)
        if bx != by:
            return Check("", False, f"optima differ: {bx} vs {by}")
        return Check("", True)

    def ranges() -> Check:
        sweep = oracle.sweep_y(full, max_points)
        found = enumerate_optima(full, max_branches)
        for y in sweep.mo_oo:
            trace = trace_ranges(full, y)
            if not trace.ok:
                return Check("", False, "; ".join(trace.failures()), y.to_json())
            if y not in found.optima:
                return Check("", False, "optimum missed by the enumerator", y.to_json())
        return Check("", True, f"{len(sweep.mo_oo)} optimal OPT/ordered points")

    def conditions() -> Check:
        family = generate_I(full)
        result = check_conditions(family, full, max_points)
        if not result.ok:
            return Check("", False, "inequality family fails", result.to_json())
        return Check("", True, f"{len(family)} inequalities")

    def polytope() -> Check:
        system = describe_polytope(instance, subset_cap)
        bad = find_violations(system, oracle.opt_ordered_x(instance, max_points), instance.n)
        if bad:
            ineq, x = bad[0]
            witness = {"inequality": ineq.to_json(instance), "x": x.to_json(instance)}
            return Check("", False, "an OPT/ordered point violates the description", witness)
        return Check("", True, f"{len(system)} inequalities")

    run("solve", solve)
    run("correspondence", correspondence)
    run("ranges", ranges)
    run("conditions", conditions)
    run("describe", polytope)
    return report
