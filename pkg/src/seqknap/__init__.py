"""Exact tools for multiple knapsack problems whose item sizes divide each other."""

from .assignment import AssignmentX, AssignmentY
from .instance import Instance, ItemType, capacity_partition, restrict, validate_instance

__all__ = [
    "AssignmentX",
    "AssignmentY",
    "Instance",
    "ItemType",
    "capacity_partition",
    "restrict",
    "validate_instance",
]
