"""Seeded random instances, shared by the CLI batch modes and the tests.

Everything is driven by an explicit ``random.Random`` so identical seeds
reproduce identical instances byte for byte.
"""
from __future__ import annotations

import random

from elgames.arena import Arena, ColorRegistry
from elgames.conditions import (And, CombinedCondition, Formula, Inf, Not,
                                Or, Var)
from elgames.el_solver import ParityGame
from elgames.monitors import MonitorDfa, make_absorbing


def rand_arena(rng: random.Random, n: int, ncolors: int) -> Arena:
    v1, v2 = set(), set()
    for v in range(n):
        (v1 if rng.random() < 0.5 else v2).add(v)
    edges = set()
    for v in range(n):
        out = rng.randint(1, min(3, n))
        for w in rng.sample(range(n), out):
            edges.add((v, w))
    gamma = {v: rng.randrange(ncolors) for v in range(n)}
    return Arena(v1, v2, edges, gamma)


def rand_monitor(rng: random.Random, registry: ColorRegistry,
                 max_states: int = 3) -> MonitorDfa:
    n = rng.randint(1, max_states)
    delta = [[rng.randrange(n) for _ in range(len(registry))] for _ in range(n)]
    final = [q for q in range(n) if rng.random() < 0.35]
    return make_absorbing(MonitorDfa(n, 0, final, delta, registry))


def rand_el_formula(rng: random.Random, registry: ColorRegistry,
                    depth: int = 2) -> Formula:
    if depth == 0 or rng.random() < 0.4:
        return Inf(rng.randrange(len(registry)))
    op = rng.choice(("and", "or", "not"))
    if op == "not":
        return Not(rand_el_formula(rng, registry, depth - 1))
    left = rand_el_formula(rng, registry, depth - 1)
    right = rand_el_formula(rng, registry, depth - 1)
    return And(left, right) if op == "and" else Or(left, right)


def rand_combined_formula(rng: random.Random, k: int, l: int,
                          depth: int = 2) -> Formula:
    atoms = [Var("W", i) for i in range(k)] + [Var("R", i) for i in range(l)]

    def go(d: int) -> Formula:
        if d == 0 or rng.random() < 0.35:
            return rng.choice(atoms)
        op = rng.choice(("and", "or", "not"))
        if op == "not":
            return Not(go(d - 1))
        return (And if op == "and" else Or)(go(d - 1), go(d - 1))
    return go(depth)


def random_instance(rng: random.Random, *, max_vertices: int = 10,
                    ncolors: int = 3, max_el: int = 2, max_monitors: int = 2,
                    max_monitor_states: int = 3):
    """One random combined game: ``(arena, condition)``."""
    registry = ColorRegistry([f"c{i}" for i in range(ncolors)])
    arena = rand_arena(rng, rng.randint(2, max_vertices), ncolors)
    k = rng.randint(1, max_el)
    l = rng.randint(0, max_monitors)
    cond = CombinedCondition(
        [rand_el_formula(rng, registry) for _ in range(k)],
        [rand_monitor(rng, registry, max_monitor_states) for _ in range(l)],
        rand_combined_formula(rng, k, l), registry)
    return arena, cond


def rand_parity_game(rng: random.Random, n: int, max_priority: int = 4) -> ParityGame:
    arena = rand_arena(rng, n, ncolors=1)
    priority = {v: rng.randint(0, max_priority) for v in arena.vertices}
    return ParityGame(arena, priority)
