"""Seeded random instances small enough for exhaustive checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, fields, replace
from fractions import Fraction

from .instance import Instance, validate_instance


@dataclass(frozen=True)
class GenParams:
    min_types: int = 1
    max_types: int = 5
    max_knapsacks: int = 3
    chain: tuple[int, ...] = (1, 2, 4, 8)
    max_bound: int = 3
    max_capacity: int = 12
    max_gain: int = 6
    n: int | None = None  # exact type count, overrides max_types
    m: int | None = None  # exact knapsack count, overrides max_knapsacks


def parse_params(text: str | None) -> GenParams:
    """Read "n=4 m=2 chain=1,2,4" style overrides."""
    params = GenParams()
    if not text:
        return params
    known = {f.name for f in fields(GenParams)}
    updates = {}
    for token in text.replace(";", " ").split():
        key, sep, value = token.partition("=")
        if not sep or key not in known:
            raise ValueError(f"bad generator parameter {token!r}")
        if key == "chain":
            updates[key] = tuple(int(v) for v in value.split(","))
        else:
            updates[key] = int(value)
    return replace(params, **updates)


def gen_random(seed: int, params: GenParams | None = None) -> Instance:
    """A valid instance, identical for identical seeds and parameters.

    Sizes come from a random sub-chain that always contains 1.  Half of the
    values are gain * size for one of two shared gains, so equal-gain blocks
    actually occur; the rest are arbitrary positive integers.
    """
    p = params or GenParams()
    rng = random.Random(seed)
    chain = sorted(set(p.chain) | {1})
    sizes = [1] + [d for d in chain[1:] if rng.random() < 0.6]
    n = p.n if p.n is not None else rng.randint(p.min_types, p.max_types)
    m = p.m if p.m is not None else rng.randint(1, p.max_knapsacks)
    gains = [rng.randint(1, p.max_gain) for _ in range(2)]
    items = []
    for j in range(n):
        size = 1 if j == 0 else rng.choice(sizes)
        if rng.random() < 0.5:
            value = rng.choice(gains) * size
        else:
            value = rng.randint(1, p.max_gain * size)
        items.append((size, Fraction(value), rng.randint(1, p.max_bound)))
    capacities = [rng.randint(0, p.max_capacity) for _ in range(m)]
    return validate_instance(items, capacities)
