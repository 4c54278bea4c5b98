import pytest
from hypothesis import given

from conftest import seeds
from seqknap.generate import GenParams, gen_random, parse_params


@given(seeds)
def test_same_seed_same_instance(seed):
    assert gen_random(seed) == gen_random(seed)


@given(seeds)
def test_instances_respect_the_parameters(seed):
    params = GenParams(min_types=2, max_types=4, max_knapsacks=2, max_bound=2, max_capacity=5)
    inst = gen_random(seed, params)
    assert 2 <= inst.n <= 4 and 1 <= inst.m <= 2
    assert all(1 <= it.bound <= 2 and it.value > 0 for it in inst.items)
    assert all(0 <= c <= 5 for c in inst.capacities)
    assert set(inst.sizes) <= {1, 2, 4, 8} and inst.sizes[0] == 1


@given(seeds)
def test_unit_chain_gives_one_class(seed):
    assert gen_random(seed, GenParams(chain=(1,))).l == 1


@given(seeds)
def test_exact_counts(seed):
    inst = gen_random(seed, GenParams(n=4, m=2))
    assert (inst.n, inst.m) == (4, 2)


def test_parse_params():
    p = parse_params("n=4 m=2 chain=1,2,4")
    assert (p.n, p.m, p.chain) == (4, 2, (1, 2, 4))
    assert parse_params("") == GenParams()
    assert parse_params(None) == GenParams()
    with pytest.raises(ValueError):
        parse_params("colour=3")
    with pytest.raises(ValueError):
        parse_params("n")
