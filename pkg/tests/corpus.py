"""Seeded random modules on QQ[x,y] shared by the property and acceptance tests."""

import random

from flatify.algebra import PolyRing
from flatify.modules import PresentedModule

PLANE = PolyRing(["x", "y"])
MONOMIALS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def random_entry(rng: random.Random, zero_bias: float = 0.45):
    if rng.random() < zero_bias:
        return PLANE.zero
    terms = {}
    for _ in range(rng.randint(1, 3)):
        terms[rng.choice(MONOMIALS)] = rng.choice([-3, -2, -1, 1, 1, 2, 3])
    f = PLANE.zero
    for (a, b), c in terms.items():
        f = f + c * PLANE.var("x") ** a * PLANE.var("y") ** b
    return f


def random_module(rng: random.Random) -> PresentedModule:
    q = rng.randint(1, 3)
    ncols = rng.randint(1, 3)
    cols = [[random_entry(rng) for _ in range(q)] for _ in range(ncols)]
    return PresentedModule(PLANE, q, cols)


def corpus(n: int = 100, seed: int = 20261014):
    rng = random.Random(seed)
    return [random_module(rng) for _ in range(n)]
