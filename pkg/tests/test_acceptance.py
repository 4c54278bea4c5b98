"""Acceptance criteria 1-10; each test records a PASS/FAIL line shown in the summary."""

import itertools
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import key
from seqknap import oracle
from seqknap.aopt import aopt_solve
from seqknap.blocks import maximal_block_partition, to_msp, x_to_y, y_to_x
from seqknap.errors import BudgetExceeded
from seqknap.generate import GenParams, gen_random
from seqknap.inequalities import (
    GContext,
    all_selections,
    check_conditions,
    describe_polytope,
    find_violations,
    generate_I,
    selectable_pairs,
)
from seqknap.instance import capacity_partition
from seqknap.optima import RestrictedProblem, enumerate_optima, h_profile, trace_ranges

RESULTS: dict[int, str] = {}

CORPUS_SIZE = 200
CORPUS_PARAMS = GenParams(min_types=3)
X_BUDGET = 5 * 10**4
Y_BUDGET = 10**5


@contextmanager
def criterion(number, title):
    try:
        yield
    except Exception as exc:
        reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        RESULTS[number] = f"FAIL criterion {number}: {title} ({reason[:160]})"
        raise
    RESULTS[number] = f"PASS criterion {number}: {title}"


def best_time(fn, repeats=20):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


# Worked example ------------------------------------------------------------------

def test_criterion_1_capacity_partition(example):
    with criterion(1, "capacity partition column sums (1, 6, 8)"):
        assert capacity_partition(example).column_sums() == (1, 6, 8)
        elapsed = best_time(lambda: capacity_partition(example))
        assert elapsed < 1e-3, f"{elapsed * 1e3:.3f} ms"


def test_criterion_2_blocks_with_tilde_b_5_3_equal_to_1_not_stated_2(example, example_msp):
    with criterion(2, "maximal blocks and copies per class"):
        members = [sorted(example.items[j].index + 1 for j in b.members) for b in maximal_block_partition(example)]
        assert members == [[1], [2], [3], [4, 5], [6]]
        tb = example_msp.tilde_b
        assert tb[0][0] == 2 and tb[1][1] == 4 and tb[2][1] == 8 and tb[3][1] == 7 and tb[3][2] == 4
        assert tb[4][2] == 1


def test_criterion_3_h_profile(example_msp):
    with criterion(3, "better-gain set sizes 8, 2, 24, 18"):
        full = RestrictedProblem.full(example_msp)
        top, second = h_profile(full, 4), h_profile(full, 3)
        assert (top.sizes[1], top.sizes[2]) == (8, 2)
        assert (second.sizes[1], second.sizes[2]) == (24, 18)


def _top_ranges(tree, found=None):
    found = {} if found is None else found
    if "type" in tree:
        found.setdefault((tree["type"], tree["class"]), []).append(tree["top"])
        for branch in tree["branches"]:
            _top_ranges(branch["child"], found)
    return found


def test_criterion_4_enumeration(example_msp, four_types):
    with criterion(4, "enumeration of the example"):
        start = time.perf_counter()
        full = enumerate_optima(RestrictedProblem.full(example_msp), record_tree=True)
        sub = enumerate_optima(four_types, record_tree=True)
        assert time.perf_counter() - start < 1.0

        # the heavier class-3 type is pinned to zero whatever the lighter one does
        fixed = _top_ranges(full.tree)[(4, 3)]
        assert fixed and all(r == [0] for r in fixed)

        ranges = _top_ranges(sub.tree)
        assert all(r == [0] for r in ranges[(4, 2)])
        assert all(r == [0] for r in ranges[(3, 2)])
        assert all(r == [2, 3] for r in ranges[(2, 2)])

        profiles = {
            (y.total(*key(1, 1)), y.total(*key(2, 2)), y.get(*key(3, 2, 3)), y.get(*key(4, 2, 3)))
            for y in sub.candidates
        }
        assert profiles == {(2, 4, 2, 0), (2, 3, 3, 0), (1, 4, 3, 0)}


# Reference family, one row per selection in listing order: support and rhs.
REFERENCE_FAMILY = [
    ({(1, 1), (2, 2), (3, 2), (4, 2)}, 8),
    ({(1, 1), (3, 2)}, 5),
    ({(1, 1), (2, 2)}, 6),
    ({(1, 1)}, 2),
    ({(1, 1), (2, 2), (3, 2)}, 8),
    ({(1, 1), (3, 2)}, 5),
    ({(1, 1), (2, 2)}, 6),
    ({(1, 1)}, 2),
]


def test_criterion_5_coefficients_and_g(four_types):
    with criterion(5, "coefficients, g and the reference family"):
        pairs = selectable_pairs(four_types)
        two, three, four = key(2, 2), key(3, 2), key(4, 2)
        g_values = []
        for sel in itertools.islice(all_selections(pairs), 4):
            ctx = GContext(four_types, sel)
            a22, b22 = ctx.alpha_beta(*two)
            a32, b32 = ctx.alpha_beta(*three)
            a42, b42 = ctx.alpha_beta(*four)
            upstream = sel[two].value + sel[three].value
            assert (a22, b22) == (1, 0)
            assert a32 == (1 if upstream[0] == "α" else 0) and b32 == 0
            assert a42 == (1 if upstream == "αα" else 0) and b42 == 0
            g_values.append(ctx.g(*three, 14))

        family = generate_I(four_types, dedup=False)
        mismatches = []
        for n, (ineq, (support, rhs)) in enumerate(zip(family, REFERENCE_FAMILY), start=1):
            got = {(w + 1, q + 1) for (w, q), c in ineq.support()}
            unit = all(c == 1 for _, c in ineq.support())
            if got != support or ineq.rhs != rhs or not unit:
                mismatches.append(f"#{n} {ineq.selection.label()}: rhs {ineq.rhs} vs {rhs}")
        assert g_values == [8, 5, 6, 2] and not mismatches, f"g32(14) = {g_values}; {'; '.join(mismatches)}"


# Random corpus -------------------------------------------------------------------

def _restricted_problems(msp):
    for b in range(msp.l):
        for k in range(msp.t):
            problem = RestrictedProblem(msp, k, b, msp.part_capacities)
            if b == 0 or problem.next_type() == k:
                yield problem


def _check_instance(inst):
    """Failures per criterion, the number of families checked, and the optimality-check time."""
    fails = {6: [], 7: [], 8: [], 9: []}
    start = time.perf_counter()
    best, _ = oracle.brute_optimum(inst, X_BUDGET)
    if aopt_solve(inst).value(inst) != best:
        fails[6].append("solver value")
    elapsed = time.perf_counter() - start

    msp = to_msp(inst)
    for x in oracle.enumerate_feasible_x(inst, X_BUDGET):
        y = x_to_y(x, inst, msp)
        if not msp.is_feasible(y) or msp.profit(y) != x.value(inst):
            fails[7].append(f"x->y {x}")
            break
    for y in oracle.enumerate_feasible_y(msp):
        x = y_to_x(y, inst, msp)
        if not x.is_feasible(inst) or x.value(inst) < msp.profit(y):
            fails[7].append(f"y->x {y}")
            break
    if oracle.brute_optimum_y(msp)[0] != best:
        fails[7].append("optima differ")

    full = RestrictedProblem.full(msp)
    sweep = oracle.sweep_y(full)
    found = enumerate_optima(full)
    for y in sweep.mo_oo:
        trace = trace_ranges(full, y)
        if not trace.ok:
            fails[8].append("; ".join(trace.failures()))
        if any(len(c.top_range) > 3 or len(c.tail_range) > 3 for c in trace.checks):
            fails[8].append("range wider than 3")
        if y not in found.optima:
            fails[8].append(f"enumerator misses {y}")

    families = 0
    if sweep.count <= Y_BUDGET:
        for problem in _restricted_problems(msp):
            try:
                report = check_conditions(generate_I(problem), problem, Y_BUDGET)
            except BudgetExceeded:
                continue
            families += 1
            if not report.ok:
                fails[9].append(f"family k={problem.k + 1} b={problem.b + 1}: {len(report.invalid)} invalid, "
                                f"{len(report.uncovered)} uncovered")
        system = describe_polytope(inst)
        if find_violations(system, oracle.opt_ordered_x(inst, X_BUDGET), inst.n):
            fails[9].append("description cuts off an OPT/ordered point")
    return fails, families, elapsed


@pytest.fixture(scope="module")
def corpus():
    records = []
    seed = 0
    while len(records) < CORPUS_SIZE:
        inst = gen_random(seed, CORPUS_PARAMS)
        seed += 1
        try:
            oracle.count_feasible_x(inst, X_BUDGET)
        except BudgetExceeded:
            continue
        records.append((seed - 1, *_check_instance(inst)))
    return records


def _failures(corpus, number):
    return [(seed, f) for seed, fails, _, _ in corpus for f in fails[number]]


def test_criterion_6_solver_optimality(corpus):
    with criterion(6, f"solver optimal on {len(corpus)} random instances"):
        assert len(corpus) >= 200
        assert not _failures(corpus, 6), _failures(corpus, 6)[:3]
        slowest = max(t for *_, t in corpus)
        assert slowest < 5.0, f"slowest instance {slowest:.2f} s"


def test_criterion_7_model_correspondence(corpus):
    with criterion(7, "item and block models correspond"):
        assert not _failures(corpus, 7), _failures(corpus, 7)[:3]


def test_criterion_8_range_soundness(corpus):
    with criterion(8, "optimal points lie inside ranges of width <= 3"):
        assert not _failures(corpus, 8), _failures(corpus, 8)[:3]


def test_criterion_9_inequality_conditions(corpus):
    with criterion(9, "families valid and covering; description valid"):
        assert sum(f for _, _, f, _ in corpus) > 0
        assert not _failures(corpus, 9), _failures(corpus, 9)[:3]


# g shape ---------------------------------------------------------------------

S_MAX, SIGMA_MAX = 40, 10
SELECTIONS_PER_FAMILY = 16


def _shape_failures(ctx, w, q):
    d = ctx.msp.sizes[q]
    steps = S_MAX // d
    g = np.array([ctx.g(w, q, s * d) for s in range(steps + SIGMA_MAX + 2)], dtype=np.int64)
    diffs = np.diff(g[: steps + 1])
    out = []
    if (diffs < 0).any():
        out.append("decreasing")
    if (np.diff(diffs) > 0).any():
        out.append("not concave")
    F, G = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    pairs = F <= G
    for sigma in range(SIGMA_MAX + 1):
        lhs_i = g[G] + sigma * (g[F + 1] - g[F])
        if (pairs & (lhs_i < g[G + sigma])).any():
            out.append(f"(i) fails at sigma={sigma}")
        ok = pairs & (F >= sigma) & (G >= 1)
        lhs_ii = g[np.clip(F - sigma, 0, None)] + sigma * (g[G] - g[np.clip(G - 1, 0, None)])
        if (ok & (lhs_ii > g[F])).any():
            out.append(f"(ii) fails at sigma={sigma}")
    return out


def _sampled_families(example_msp):
    yield RestrictedProblem(example_msp, 3, 1, (1, 6, 8))
    yield RestrictedProblem.full(example_msp)
    for seed in range(40):
        msp = to_msp(gen_random(seed, CORPUS_PARAMS))
        yield from _restricted_problems(msp)


def test_criterion_10_g_shape(example_msp):
    with criterion(10, "g nondecreasing, concave, and increment bounds"):
        failures, checked = [], 0
        for problem in _sampled_families(example_msp):
            for sel in itertools.islice(all_selections(selectable_pairs(problem)), SELECTIONS_PER_FAMILY):
                ctx = GContext(problem, sel)
                for w, q in problem.pairs():
                    if problem.msp.sizes[q] not in (1, 2, 4):
                        continue
                    checked += 1
                    for f in _shape_failures(ctx, w, q):
                        failures.append(f"{f} for type {w + 1} class {q + 1} under {sel.label() or '-'}")
        assert checked > 0
        assert not failures, failures[:3]
