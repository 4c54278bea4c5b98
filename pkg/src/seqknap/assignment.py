"""Immutable sparse assignments for the item-level and block-level models.

AssignmentX maps (knapsack i, item j, part h) to a count; AssignmentY maps
(block type w, size class q, part h) to a count.  All indices are 0-based
and zero entries are never stored, so equal assignments compare and hash
equal.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .instance import CapacityPartition, Instance, capacity_partition, fraction_to_json

Key = tuple[int, int, int]


class _Sparse:
    __slots__ = ("_entries", "_map", "_hash")

    def __init__(self, counts: Mapping[Key, int] | Iterable[tuple[Key, int]] = ()):
        pairs = counts.items() if isinstance(counts, Mapping) else counts
        merged: dict[Key, int] = defaultdict(int)
        for key, n in pairs:
            if n < 0:
                raise ValueError(f"negative count {n} at {key}")
            merged[tuple(key)] += n
        self._entries = tuple(sorted((k, n) for k, n in merged.items() if n))
        self._map = dict(self._entries)
        self._hash = hash(self._entries)

    def __eq__(self, other):
        return type(other) is type(self) and other._entries == self._entries

    def __hash__(self):
        return self._hash

    def __iter__(self) -> Iterator[tuple[Key, int]]:
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        body = ", ".join(f"{k}: {n}" for k, n in self._entries)
        return f"{type(self).__name__}({{{body}}})"

    def get(self, a: int, b: int, c: int) -> int:
        return self._map.get((a, b, c), 0)

    def as_dict(self) -> dict[Key, int]:
        return dict(self._map)

    def merged(self, other: "_Sparse"):
        return type(self)(list(self._entries) + list(other._entries))


class AssignmentX(_Sparse):
    """x[(i, j, h)]: copies of item j placed in part h of knapsack i."""

    def totals(self, n: int) -> tuple[int, ...]:
        out = [0] * n
        for (_, j, _), c in self._entries:
            out[j] += c
        return tuple(out)

    def value(self, instance: Instance) -> Fraction:
        return sum((instance.items[j].value * c for (_, j, _), c in self._entries), Fraction(0))

    def prefix_values(self, instance: Instance) -> tuple[Fraction, ...]:
        per_part = [Fraction(0)] * instance.l
        for (_, j, h), c in self._entries:
            per_part[h] += instance.items[j].value * c
        return _prefix(per_part)

    def prefix_sizes(self, instance: Instance) -> tuple[int, ...]:
        per_part = [0] * instance.l
        for (_, j, h), c in self._entries:
            per_part[h] += instance.items[j].size * c
        return _prefix(per_part)

    def loads(self, instance: Instance) -> list[list[int]]:
        load = [[0] * instance.l for _ in range(instance.m)]
        for (i, j, h), c in self._entries:
            load[i][h] += instance.items[j].size * c
        return load

    def violations(self, instance: Instance, partition: CapacityPartition | None = None) -> list[str]:
        r = (partition or capacity_partition(instance)).r
        problems = []
        for (i, j, h), _ in self._entries:
            if not (0 <= i < instance.m and 0 <= j < instance.n and 0 <= h < instance.l):
                problems.append(f"index out of range at {(i, j, h)}")
            elif h < instance.levels[j]:
                problems.append(f"item {j} is too large for part {h}")
        if problems:
            return problems
        for i, row in enumerate(self.loads(instance)):
            for h, load in enumerate(row):
                if load > r[i][h]:
                    problems.append(f"knapsack {i} part {h}: load {load} > {r[i][h]}")
        for j, t in enumerate(self.totals(instance.n)):
            if t > instance.items[j].bound:
                problems.append(f"item {j}: {t} copies > bound {instance.items[j].bound}")
        return problems

    def is_feasible(self, instance: Instance, partition: CapacityPartition | None = None) -> bool:
        return not self.violations(instance, partition)

    def to_json(self, instance: Instance) -> dict:
        return {
            "x": [
                {"knapsack": i + 1, "item": instance.items[j].index + 1, "part": h + 1, "count": c}
                for (i, j, h), c in self._entries
            ],
            "value": fraction_to_json(self.value(instance)),
        }


class AssignmentY(_Sparse):
    """y[(w, q, h)]: block-w items from size class q placed in part h."""

    def total(self, w: int, q: int) -> int:
        return sum(c for (ww, qq, _), c in self._entries if ww == w and qq == q)

    def signature(self) -> tuple[tuple[tuple[int, int], int], ...]:
        """Multiset of assigned items: counts per (w, q)."""
        acc: dict[tuple[int, int], int] = defaultdict(int)
        for (w, q, _), c in self._entries:
            acc[(w, q)] += c
        return tuple(sorted(acc.items()))

    def restricted(self, keep) -> "AssignmentY":
        """Entries whose key satisfies the predicate `keep(w, q, h)`."""
        return AssignmentY([(k, c) for k, c in self._entries if keep(*k)])

    def to_json(self) -> dict:
        return {
            "y": [
                {"w": w + 1, "q": q + 1, "part": h + 1, "count": c}
                for (w, q, h), c in self._entries
            ]
        }


def _prefix(values):
    out, acc = [], type(values[0])(0) if values else 0
    for v in values:
        acc += v
        out.append(acc)
    return tuple(out)
