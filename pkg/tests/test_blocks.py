from collections import defaultdict
from fractions import Fraction

from hypothesis import given, strategies as st

from conftest import key, seeds, small_instance
from seqknap import oracle
from seqknap.assignment import AssignmentX, AssignmentY
from seqknap.blocks import (
    is_block,
    lift_inequality,
    maximal_block_partition,
    to_msp,
    x_to_y,
    y_to_x,
)
from seqknap.instance import validate_instance


def originals(instance, members):
    return sorted(instance.items[j].index + 1 for j in members)


def test_two_item_block_of_example(example):
    members = [example.position_of(3), example.position_of(4)]
    assert is_block(example, members)


def test_block_condition_edges():
    inst = validate_instance([(1, 4, 1), (4, 16, 1)], [4])
    assert is_block(inst, [0])
    assert not is_block(inst, [0, 1])  # 4 > 1 + 1


def test_example_partition(example, example_msp):
    blocks = maximal_block_partition(example)
    assert [originals(example, b.members) for b in blocks] == [[1], [2], [3], [4, 5], [6]]
    tb = example_msp.tilde_b
    assert tb[0][0] == 2
    assert tb[1][1] == 4
    assert tb[2][1] == 8
    assert tb[3][1] == 7
    assert tb[3][2] == 4
    nonzero = {(w, q) for w in range(5) for q in range(3) if tb[w][q]}
    assert nonzero == {key(1, 1), key(2, 2), key(3, 2), key(4, 2), key(4, 3), key(5, 3)}


def test_tilde_b_5_3_is_1_known_discrepancy_with_stated_2(example_msp):
    # one copy of a size-4 item whose block weight is 4
    assert example_msp.tilde_b[4][2] == 1


def test_equal_sizes_with_distinct_values_stay_apart():
    inst = validate_instance([(1, 3, 2), (1, 2, 2), (1, 1, 2)], [3])
    assert len(maximal_block_partition(inst)) == 3


def test_single_type_is_one_block():
    inst = validate_instance([(1, 3, 5)], [3])
    (block,) = maximal_block_partition(inst)
    assert block.multiplicity == 5
    msp = to_msp(inst)
    assert msp.t == 1 and msp.f == (1,)


def test_example_block_model(example_msp):
    assert example_msp.p == (4, 28, 15, 14, 32)
    assert example_msp.f == (1, 2, 2, 2, 4)
    assert example_msp.part_capacities == (1, 6, 8)
    assert [example_msp.gain(w) for w in range(5)] == [4, 14, Fraction(15, 2), 7, 8]
    assert example_msp.growth_property_holds()


@given(seeds)
def test_partition_is_maximal_and_grows(seed):
    inst = small_instance(seed)
    blocks = maximal_block_partition(inst)
    assert sorted(j for b in blocks for j in b.members) == list(range(inst.n))
    by_gain = defaultdict(list)
    for b in blocks:
        assert is_block(inst, b.members)
        gains = {inst.items[j].value / inst.items[j].size for j in b.members}
        assert len(gains) == 1
        by_gain[gains.pop()].append(b)
    for group in by_gain.values():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                merged = sorted(a.members + b.members, key=lambda j: (inst.items[j].size, inst.items[j].index))
                assert not is_block(inst, merged)
    assert to_msp(inst).growth_property_holds()


@given(seeds)
def test_multiplicities_are_chunk_aligned(seed):
    inst = small_instance(seed)
    msp = to_msp(inst)
    for w in range(msp.t):
        for q in range(msp.l):
            assert (msp.f[w] * msp.tilde_b[w][q]) % msp.sizes[q] == 0


def test_x_to_y_simple_cases(example, example_msp):
    assert x_to_y(AssignmentX(), example, example_msp) == AssignmentY()
    x = AssignmentX({(0, example.position_of(3), 1): 1})
    assert x_to_y(x, example, example_msp) == AssignmentY({key(4, 2, 2): 1})


@given(seeds)
def test_x_to_y_is_feasible_and_keeps_value(seed):
    inst = small_instance(seed)
    msp = to_msp(inst)
    for x in oracle.enumerate_feasible_x(inst, 5000):
        y = x_to_y(x, inst, msp)
        assert msp.is_feasible(y)
        assert msp.profit(y) == x.value(inst)


@given(seeds)
def test_y_to_x_is_feasible_and_never_loses_value(seed):
    inst = small_instance(seed)
    msp = to_msp(inst)
    for y in oracle.enumerate_feasible_y(msp, 5000):
        x = y_to_x(y, inst, msp)
        assert x.is_feasible(inst)
        assert x.value(inst) >= msp.profit(y)
        aligned = all((msp.f[w] * c) % msp.sizes[q] == 0 for (w, q, _), c in y)
        if aligned:
            assert x.value(inst) == msp.profit(y)
            assert x_to_y(x, inst, msp) == y


def test_y_to_x_of_zero(example, example_msp):
    assert y_to_x(AssignmentY(), example, example_msp) == AssignmentX()


@given(seeds)
def test_both_models_share_the_optimum(seed):
    inst = small_instance(seed)
    assert oracle.brute_optimum(inst)[0] == oracle.brute_optimum_y(to_msp(inst))[0]


def _opt_points(points, signature, prefixes):
    best = {}
    for p in points:
        s, pre = signature(p), prefixes(p)
        cur = best.get(s)
        best[s] = pre if cur is None else tuple(max(a, b) for a, b in zip(cur, pre))
    return {p for p in points if prefixes(p) == best[signature(p)]}


@given(seeds)
def test_optimal_opt_points_correspond(seed):
    inst = small_instance(seed, max_types=3)
    msp = to_msp(inst)
    xs = list(oracle.enumerate_feasible_x(inst, 20000))
    ys = list(oracle.enumerate_feasible_y(msp, 20000))
    best = max(x.value(inst) for x in xs)
    good_x = {x for x in _opt_points(xs, lambda x: x.totals(inst.n), lambda x: x.prefix_values(inst)) if x.value(inst) == best}
    good_y = {y for y in _opt_points(ys, AssignmentY.signature, msp.prefix_profits) if msp.profit(y) == best}
    for x in xs:
        assert (x in good_x) == (x_to_y(x, inst, msp) in good_y)


def test_lifting(example, example_msp):
    zero = lift_inequality({}, 0, example, example_msp)
    assert zero.coefficients == () and zero.rhs == 0
    lifted = lift_inequality({key(1, 1): 1}, 2, example, example_msp)
    assert lifted.coefficients == ((example.position_of(0), 1),)
    assert lifted.rhs == 2
    # a block of weight 2 seen from its size-2 member
    lifted = lift_inequality({key(2, 2): 1}, 4, example, example_msp)
    assert lifted.coefficients == ((example.position_of(1), 1),)


@given(st.integers(0, 3), st.integers(0, 3))
def test_lifting_rescales_heavier_members(nu, copies):
    inst = validate_instance([(1, 1, 1), (2, 4, 2), (4, 8, 2)], [8])
    msp = to_msp(inst)
    (w,) = {msp.block_of[1], msp.block_of[2]}
    lifted = lift_inequality({(w, 1): nu, (w, 2): nu}, 0, inst, msp)
    coef = dict(lifted.coefficients)
    assert coef.get(1, 0) == nu and coef.get(2, 0) == 2 * nu
    x = AssignmentX({(0, 2, 2): copies})
    assert lifted.lhs(x, inst.n) == nu * x_to_y(x, inst, msp).total(w, 2)
