"""Instances of the multiple knapsack problem with divisible item sizes.

An instance is a list of item types (size, value, bound) and a list of
knapsack capacities.  The distinct sizes must form a divisibility chain
starting at 1.  Items are kept sorted by size ascending and, within one
size, by value non-increasing; each item remembers its input position so
results can be reported in the caller's numbering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Sequence

from .errors import (
    EmptyInstance,
    InstanceError,
    MissingUnitSize,
    NonDivisibleSizes,
    NonPositiveField,
)


@dataclass(frozen=True)
class ItemType:
    size: int
    value: Fraction
    bound: int
    index: int  # 0-based position in the caller's item list


@dataclass(frozen=True)
class Instance:
    items: tuple[ItemType, ...]
    capacities: tuple[int, ...]

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        """Distinct sizes d_1 < d_2 < ... < d_l."""
        return tuple(sorted({it.size for it in self.items}))

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def l(self) -> int:  # noqa: E743 - the number of size classes
        return len(self.sizes)

    @cached_property
    def levels(self) -> tuple[int, ...]:
        """Size-class index of every item (0-based)."""
        pos = {d: q for q, d in enumerate(self.sizes)}
        return tuple(pos[it.size] for it in self.items)

    def position_of(self, original_index: int) -> int:
        for j, it in enumerate(self.items):
            if it.index == original_index:
                return j
        raise KeyError(original_index)


@dataclass(frozen=True)
class CapacityPartition:
    """r[i][h]: the share of knapsack i reserved for items of size <= d_h."""

    r: tuple[tuple[int, ...], ...]

    def column_sums(self) -> tuple[int, ...]:
        if not self.r:
            return ()
        return tuple(sum(col) for col in zip(*self.r))


def parse_value(raw: Any) -> Fraction:
    """Accept ints, Fractions and exact strings such as "7/2"; refuse floats."""
    if isinstance(raw, bool):
        raise NonPositiveField(f"value must be a number, got {raw!r}")
    if isinstance(raw, (int, Fraction)):
        return Fraction(raw)
    if isinstance(raw, str):
        try:
            return Fraction(raw.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise NonPositiveField(f"cannot parse value {raw!r}") from exc
    raise NonPositiveField(f"value must be an int or a fraction string, got {raw!r}")


def _as_int(raw: Any, what: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise NonPositiveField(f"{what} must be an integer, got {raw!r}")
    return raw


def validate_instance(raw_items: Iterable[Any], raw_capacities: Iterable[Any]) -> Instance:
    """Build a normalized Instance from (size, value, bound) triples or dicts."""
    raw_items = list(raw_items)
    raw_capacities = list(raw_capacities)
    if not raw_items:
        raise EmptyInstance("the item list is empty")
    if not raw_capacities:
        raise EmptyInstance("the capacity list is empty")

    items = []
    for pos, raw in enumerate(raw_items):
        if isinstance(raw, dict):
            try:
                size, value, bound = raw["size"], raw["value"], raw["bound"]
            except KeyError as exc:
                raise NonPositiveField(f"items[{pos}] is missing field {exc.args[0]!r}") from None
        else:
            size, value, bound = raw
        size = _as_int(size, f"items[{pos}].size")
        bound = _as_int(bound, f"items[{pos}].bound")
        if size < 1:
            raise NonPositiveField(f"items[{pos}].size must be >= 1, got {size}")
        if bound < 1:
            raise NonPositiveField(f"items[{pos}].bound must be >= 1, got {bound}")
        items.append(ItemType(size, parse_value(value), bound, pos))

    capacities = []
    for i, c in enumerate(raw_capacities):
        c = _as_int(c, f"capacities[{i}]")
        if c < 0:
            raise NonPositiveField(f"capacities[{i}] must be >= 0, got {c}")
        capacities.append(c)

    sizes = sorted({it.size for it in items})
    if sizes[0] != 1:
        raise MissingUnitSize(f"the smallest size must be 1, got {sizes[0]}")
    for small, big in zip(sizes, sizes[1:]):
        if big % small:
            raise NonDivisibleSizes(f"size {big} is not a multiple of size {small}")

    items.sort(key=lambda it: (it.size, -it.value, it.index))
    return Instance(tuple(items), tuple(capacities))


def capacity_partition(instance: Instance) -> CapacityPartition:
    d = instance.sizes
    rows = []
    for c in instance.capacities:
        row, rest = [], c
        for h in range(len(d) - 1):
            part = rest % d[h + 1]
            row.append(part)
            rest -= part
        row.append(rest)
        rows.append(tuple(row))
    return CapacityPartition(tuple(rows))


def part_capacities(instance: Instance) -> tuple[int, ...]:
    """Aggregated part capacities c_bar_h = sum_i r_i^h."""
    return capacity_partition(instance).column_sums()


def restrict(instance: Instance, h: int) -> Instance:
    """Keep the first h size classes and the matching prefix of every knapsack."""
    if not 1 <= h <= instance.l:
        raise IndexError(f"restriction level must lie in 1..{instance.l}, got {h}")
    limit = instance.sizes[h - 1]
    r = capacity_partition(instance).r
    items = tuple(it for it in instance.items if it.size <= limit)
    caps = tuple(sum(row[:h]) for row in r)
    return Instance(items, caps)


def extract_subset(sizes: Sequence[int], target: int) -> list[int]:
    """Pick positions of `sizes` whose total is exactly `target`.

    Sizes must form a divisibility chain and the largest must divide
    `target`, with target <= sum(sizes).  Largest-first greedy is exact here.
    """
    if target > sum(sizes):
        raise ValueError("target exceeds the total size")
    chosen, left = [], target
    for pos in sorted(range(len(sizes)), key=lambda p: -sizes[p]):
        if sizes[pos] <= left:
            chosen.append(pos)
            left -= sizes[pos]
    if left:
        raise ValueError("sizes are not divisible or the target is not aligned")
    return chosen


def chunk_sizes(sizes: Sequence[int], chunk: int) -> list[list[int]]:
    """Split positions into the minimum number of groups of total size <= chunk.

    Every size must divide `chunk`.  Groups are filled largest-first so all
    groups except possibly the last are exactly full.
    """
    groups: list[list[int]] = []
    load = chunk
    for pos in sorted(range(len(sizes)), key=lambda p: -sizes[p]):
        if load + sizes[pos] > chunk:
            groups.append([])
            load = 0
        groups[-1].append(pos)
        load += sizes[pos]
    return groups


# JSON ------------------------------------------------------------------------

def fraction_to_json(value: Fraction) -> int | str:
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise InstanceError("instance JSON must be an object")
    for key in ("items", "capacities"):
        if key not in data:
            raise InstanceError(f"instance JSON is missing field {key!r}")
        if not isinstance(data[key], list):
            raise InstanceError(f"field {key!r} must be a list")
    for pos, raw in enumerate(data["items"]):
        if not isinstance(raw, dict):
            raise InstanceError(f"items[{pos}] must be an object")
    return validate_instance(data["items"], data["capacities"])


def instance_to_dict(instance: Instance) -> dict:
    """Serialize in the caller's original item order."""
    items = sorted(instance.items, key=lambda it: it.index)
    return {
        "items": [
            {"size": it.size, "value": fraction_to_json(it.value), "bound": it.bound}
            for it in items
        ],
        "capacities": list(instance.capacities),
    }


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return instance_from_dict(data)


def load_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return loads_instance(fh.read())
