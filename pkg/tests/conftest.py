import os
import random

import pytest

from elgames.arena import Arena, ColorRegistry

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def reg2():
    return ColorRegistry(["a", "b"])


@pytest.fixture
def reg3():
    return ColorRegistry(["a", "b", "c"])


@pytest.fixture
def rng():
    return random.Random(1234)


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def self_loop_arena(color: int = 0) -> Arena:
    return Arena({0}, set(), {(0, 0)}, {0: color})


def two_cycle_arena() -> Arena:
    # 0 (P1, color a) <-> 1 (P2, color b)
    return Arena({0}, {1}, {(0, 1), (1, 0)}, {0: 0, 1: 1})


def valid_subset(rng: random.Random, arena: Arena):
    """Random subset repaired to satisfy the restriction precondition; may
    come out empty (caller skips those)."""
    keep = {v for v in arena.vertices if rng.random() < 0.7}
    while True:
        bad = [v for v in keep if not any(w in keep for w in arena.succ(v))]
        if not bad:
            return keep
        keep.difference_update(bad)


def relabeled(arena: Arena, key) -> tuple:
    """Comparable encoding of an arena after renaming each vertex with
    ``key(vertex)``; two arenas are isomorphic via the implied bijection iff
    their encodings are equal."""
    names = {v: key(v) for v in arena.vertices}
    assert len(set(names.values())) == len(names), "key must be injective"
    verts = tuple(sorted((names[v], arena.owner(v), arena.gamma[v])
                         for v in arena.vertices))
    edges = tuple(sorted((names[a], names[b]) for a, b in arena.edges))
    return verts, edges


def full_dfa_product(a, b):
    """Synchronous product over *all* state pairs (the product notion the
    arena algebra laws quantify over).  Returns (monitor, pair_list)."""
    from elgames.monitors import MonitorDfa
    pairs = [(qa, qb) for qa in range(a.num_states) for qb in range(b.num_states)]
    index = {p: i for i, p in enumerate(pairs)}
    delta = [[index[(a.delta[qa][c], b.delta[qb][c])]
              for c in range(len(a.colors))]
             for qa, qb in pairs]
    final = [i for i, (qa, qb) in enumerate(pairs)
             if qa in a.final and qb in b.final]
    return MonitorDfa(len(pairs), index[(a.initial, b.initial)], final,
                      delta, a.colors), pairs
