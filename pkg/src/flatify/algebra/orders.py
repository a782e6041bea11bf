"""Monomial orders.

An order is turned into a *key function* mapping an exponent tuple to a flat
tuple of ints, such that comparing keys lexicographically compares monomials.
Keys being plain int tuples lets the division code negate them for heaps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

Exp = Tuple[int, ...]
KeyFn = Callable[[Exp], Tuple[int, ...]]


@dataclass(frozen=True)
class TermOrder:
    """``name`` is ``"degrevlex"``, ``"lex"`` or ``"block"``.

    A block order compares the first ``split`` variables with ``first`` and
    breaks ties on the remaining variables with ``second``.
    """

    name: str = "degrevlex"
    split: int = 0
    first: "TermOrder | None" = None
    second: "TermOrder | None" = None

    def __post_init__(self):
        if self.name not in ("degrevlex", "lex", "block"):
            raise ValueError(f"unknown term order {self.name!r}")
        if self.name == "block" and (self.first is None or self.second is None):
            raise ValueError("block order needs both inner orders")

    @classmethod
    def block(cls, split: int, first: "TermOrder | None" = None,
              second: "TermOrder | None" = None) -> "TermOrder":
        return cls("block", split, first or DEGREVLEX, second or DEGREVLEX)

    def key_function(self, nvars: int) -> KeyFn:
        return _key_function(self, nvars)

    def restrict(self, keep: Tuple[int, ...], nvars: int) -> "TermOrder":
        """The order induced on the variable subset ``keep`` (sorted indices)."""
        if self.name != "block":
            return self
        left = tuple(i for i in keep if i < self.split)
        right = tuple(i - self.split for i in keep if i >= self.split)
        if not left:
            return self.second.restrict(right, nvars - self.split)
        if not right:
            return self.first.restrict(left, self.split)
        return TermOrder.block(len(left), self.first.restrict(left, self.split),
                               self.second.restrict(right, nvars - self.split))

    def __str__(self):
        if self.name == "block":
            return f"block({self.split}, {self.first}, {self.second})"
        return self.name


DEGREVLEX = TermOrder("degrevlex")
LEX = TermOrder("lex")


def _key_function(order: TermOrder, nvars: int) -> KeyFn:
    if order.name == "lex":
        return tuple
    if order.name == "degrevlex":
        def key(e: Exp) -> Tuple[int, ...]:
            return (sum(e),) + tuple(-x for x in reversed(e))
        return key
    k = order.split
    if not 0 <= k <= nvars:
        raise ValueError("block split out of range")
    kf = _key_function(order.first, k)
    ks = _key_function(order.second, nvars - k)

    def key(e: Exp) -> Tuple[int, ...]:
        return kf(e[:k]) + ks(e[k:])
    return key
