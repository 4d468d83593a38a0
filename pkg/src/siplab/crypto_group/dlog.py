"""Baby-step giant-step discrete logarithms, for toy-sized groups only."""

from __future__ import annotations

from math import isqrt

MAX_ORDER = 2**40


class GroupTooLarge(ValueError):
    pass


class NoSolution(ValueError):
    pass


def solve_dlog(group, target, base=None) -> int:
    """Return s with base^s == target (s = 0 for the identity).

    ``base`` defaults to the group generator.
    """
    if group.order > MAX_ORDER:
        raise GroupTooLarge(f"{group.name}: order has {group.order.bit_length()} bits")
    if not group.is_element(target):
        raise NoSolution(f"{target!r} is not a group element")
    base = group.generator if base is None else base
    m = isqrt(group.order) + 1
    baby = {}
    e = group.identity
    for j in range(m):
        baby.setdefault(e, j)
        e = group.op(e, base)
    stride = group.inverse(group.exp(base, m))
    gamma = target
    for i in range(m + 1):
        j = baby.get(gamma)
        if j is not None:
            return (i * m + j) % group.order
        gamma = group.op(gamma, stride)
    raise NoSolution(f"{target!r} is not in the subgroup generated by {base!r}")


class DlogOracle:
    """Adversary capability: discrete logs in a group small enough for BSGS."""

    def __init__(self, group):
        if group.order > MAX_ORDER:
            raise GroupTooLarge(f"{group.name}: no discrete-log oracle above 2^40")
        self.group = group
        self.calls = 0

    def __call__(self, target, base=None) -> int:
        self.calls += 1
        return solve_dlog(self.group, target, base)
