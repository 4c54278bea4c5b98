"""Block aggregation: from item types to the single-knapsack block model.

Item types with equal value-per-unit-size are merged into blocks whenever
each member's size is covered by the smallest member plus the total size
of the members before it.  Every block then behaves like one item type of
the smallest member's size, available in as many copies as the block's
total size allows.  The resulting model has one knapsack split into l
parts whose capacities are the column sums of the capacity partition.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .assignment import AssignmentX, AssignmentY
from .errors import InfeasibleY
from .instance import Instance, capacity_partition, fraction_to_json


@dataclass(frozen=True)
class Block:
    members: tuple[int, ...]  # item positions, size ascending
    weight: int
    profit: Fraction
    multiplicity: int

    @property
    def gain(self) -> Fraction:
        return self.profit / self.weight


def is_block(instance: Instance, members: Sequence[int]) -> bool:
    """Check the covering chain s_{w_j} <= s_{w_1} + sum_{v<j} b s over members."""
    if not members:
        return False
    items = [instance.items[j] for j in members]
    covered = items[0].size
    for prev, it in zip(items, items[1:]):
        covered += prev.bound * prev.size
        if it.size > covered:
            return False
    return True


def _make_block(instance: Instance, members: list[int]) -> Block:
    first = instance.items[members[0]]
    total = sum(instance.items[j].bound * instance.items[j].size for j in members)
    return Block(tuple(members), first.size, first.value, total // first.size)


def maximal_block_partition(instance: Instance) -> list[Block]:
    """Coarsest partition into blocks of equal gain, in block-model order.

    Blocks come out sorted by weight ascending, profit non-increasing, then
    by the smallest original index of the leading member.
    """
    classes: dict[Fraction, list[int]] = defaultdict(list)
    for j, it in enumerate(instance.items):
        classes[it.value / it.size].append(j)

    blocks = []
    for members in classes.values():
        members.sort(key=lambda j: (instance.items[j].size, instance.items[j].index))
        current = [members[0]]
        covered = instance.items[members[0]].size
        for j in members[1:]:
            it = instance.items[j]
            prev = instance.items[current[-1]]
            covered += prev.bound * prev.size
            if it.size <= covered:
                current.append(j)
            else:
                blocks.append(_make_block(instance, current))
                current, covered = [j], it.size
        blocks.append(_make_block(instance, current))

    blocks.sort(key=lambda b: (b.weight, -b.profit, instance.items[b.members[0]].index))
    return blocks


@dataclass(frozen=True)
class MspInstance:
    """Block model: t block types, l size classes, one knapsack with l parts."""

    blocks: tuple[Block, ...]
    f: tuple[int, ...]
    p: tuple[Fraction, ...]
    tilde_b: tuple[tuple[int, ...], ...]  # tilde_b[w][q]
    part_capacities: tuple[int, ...]
    sizes: tuple[int, ...]
    block_of: tuple[int, ...]  # item position -> block type

    @property
    def t(self) -> int:
        return len(self.blocks)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.sizes)

    def gain(self, w: int) -> Fraction:
        return self.p[w] / self.f[w]

    def chunk_limit(self, w: int, q: int) -> int:
        """Largest number of size-d_q chunks block w may occupy in class q."""
        return self.f[w] * self.tilde_b[w][q] // self.sizes[q]

    def chunks(self, w: int, q: int, count: int) -> int:
        return -(-self.f[w] * count // self.sizes[q])

    def profit(self, y: AssignmentY) -> Fraction:
        return sum((self.p[w] * c for (w, _, _), c in y), Fraction(0))

    def prefix_profits(self, y: AssignmentY) -> tuple[Fraction, ...]:
        per_part = [Fraction(0)] * self.l
        for (w, _, h), c in y:
            per_part[h] += self.p[w] * c
        out, acc = [], Fraction(0)
        for v in per_part:
            acc += v
            out.append(acc)
        return tuple(out)

    def violations(self, y: AssignmentY, capacities: Sequence[int] | None = None) -> list[str]:
        caps = self.part_capacities if capacities is None else capacities
        problems = []
        occupancy = [0] * self.l
        used: dict[tuple[int, int], int] = defaultdict(int)
        for (w, q, h), c in y:
            if not (0 <= w < self.t and 0 <= q <= h < self.l):
                problems.append(f"index out of range at {(w, q, h)}")
                continue
            if self.tilde_b[w][q] == 0:
                problems.append(f"block {w} has no items in class {q}")
                continue
            k = self.chunks(w, q, c)
            occupancy[h] += k * self.sizes[q]
            used[(w, q)] += k
        for h, occ in enumerate(occupancy):
            if occ > caps[h]:
                problems.append(f"part {h}: occupancy {occ} > {caps[h]}")
        for (w, q), k in used.items():
            if k > self.chunk_limit(w, q):
                problems.append(f"block {w} class {q}: {k} chunks > {self.chunk_limit(w, q)}")
        return problems

    def is_feasible(self, y: AssignmentY, capacities: Sequence[int] | None = None) -> bool:
        return not self.violations(y, capacities)

    def growth_property_holds(self) -> bool:
        """Each block outweighs all earlier blocks of the same gain combined."""
        seen: dict[Fraction, int] = defaultdict(int)
        for w in range(self.t):
            g = self.gain(w)
            if self.f[w] <= seen[g]:
                return False
            seen[g] += self.f[w] * sum(self.tilde_b[w])
        return True


def to_msp(instance: Instance, blocks: Sequence[Block] | None = None) -> MspInstance:
    blocks = tuple(maximal_block_partition(instance) if blocks is None else blocks)
    unit = blocks[0].weight if blocks else 1
    if unit != 1:
        raise ValueError("the lightest block must have weight 1")
    d = instance.sizes
    level = instance.levels
    tilde_b = []
    block_of = [0] * instance.n
    for w, b in enumerate(blocks):
        row = [0] * len(d)
        for j in b.members:
            row[level[j]] += instance.items[j].bound * d[level[j]] // b.weight
            block_of[j] = w
        tilde_b.append(tuple(row))
    return MspInstance(
        blocks=blocks,
        f=tuple(b.weight for b in blocks),
        p=tuple(b.profit for b in blocks),
        tilde_b=tuple(tilde_b),
        part_capacities=capacity_partition(instance).column_sums(),
        sizes=d,
        block_of=tuple(block_of),
    )


def x_to_y(x: AssignmentX, instance: Instance, msp: MspInstance | None = None) -> AssignmentY:
    msp = msp or to_msp(instance)
    level = instance.levels
    y: dict[tuple[int, int, int], int] = defaultdict(int)
    for (_, j, h), c in x:
        w, q = msp.block_of[j], level[j]
        y[(w, q, h)] += c * msp.sizes[q] // msp.f[w]
    return AssignmentY(y)


def y_to_x(y: AssignmentY, instance: Instance, msp: MspInstance | None = None) -> AssignmentX:
    """Realize a block assignment with actual items and knapsacks.

    Each (w, q, h) entry needs ceil(f_w y / d_q) copies of block-w members of
    size d_q; they are drawn from the members with the smallest original
    index first.  The copies placed in part h are then packed into the
    knapsacks' part-h shares, largest first.
    """
    msp = msp or to_msp(instance)
    problems = msp.violations(y)
    if problems:
        raise InfeasibleY("; ".join(problems))
    level = instance.levels
    left = [it.bound for it in instance.items]
    per_part: dict[int, list[int]] = defaultdict(list)  # part -> item positions, one per copy
    for (w, q, h), c in y:
        need = msp.chunks(w, q, c)
        members = sorted(
            (j for j in msp.blocks[w].members if level[j] == q),
            key=lambda j: instance.items[j].index,
        )
        for j in members:
            take = min(need, left[j])
            per_part[h].extend([j] * take)
            left[j] -= take
            need -= take
        if need:
            raise InfeasibleY(f"block {w} class {q} runs out of items")

    r = capacity_partition(instance).r
    x: dict[tuple[int, int, int], int] = defaultdict(int)
    for h, copies in per_part.items():
        room = [r[i][h] for i in range(instance.m)]
        for j in sorted(copies, key=lambda j: -instance.items[j].size):
            s = instance.items[j].size
            i = next((i for i, free in enumerate(room) if free >= s), None)
            if i is None:
                raise InfeasibleY(f"part {h} cannot hold the required items")
            room[i] -= s
            x[(i, j, h)] += 1
    return AssignmentX(x)


@dataclass(frozen=True)
class XInequality:
    """sum_j coefficients[j] * (copies of item j) <= rhs; keys are item positions."""

    coefficients: tuple[tuple[int, Fraction], ...]
    rhs: Fraction

    def lhs(self, x: AssignmentX, n: int) -> Fraction:
        totals = x.totals(n)
        return sum((c * totals[j] for j, c in self.coefficients), Fraction(0))

    def holds(self, x: AssignmentX, n: int) -> bool:
        return self.lhs(x, n) <= self.rhs

    def to_json(self, instance: Instance) -> dict:
        return {
            "lhs": [
                {"item": instance.items[j].index + 1, "coef": fraction_to_json(c)}
                for j, c in sorted(self.coefficients, key=lambda jc: instance.items[jc[0]].index)
            ],
            "rhs": fraction_to_json(self.rhs),
        }


def lift_inequality(
    coefficients: Mapping[tuple[int, int], Fraction] | Iterable[tuple[tuple[int, int], Fraction]],
    rhs: Fraction,
    instance: Instance,
    msp: MspInstance | None = None,
) -> XInequality:
    """Turn sum nu_{w,q} sum_h y^h_{w,q} <= rhs into an item-level inequality."""
    msp = msp or to_msp(instance)
    pairs = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
    nu = {key: Fraction(c) for key, c in pairs}
    level = instance.levels
    out = []
    for j in range(instance.n):
        w, q = msp.block_of[j], level[j]
        c = nu.get((w, q), Fraction(0))
        if c:
            out.append((j, c * msp.sizes[q] / msp.f[w]))
    return XInequality(tuple(out), Fraction(rhs))

