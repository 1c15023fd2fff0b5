import itertools
import random

import pytest

from elgames.arena import Arena, P1, P2
from elgames.errors import ArenaError
from elgames.randgen import rand_arena
from elgames.reachability import attractor


def test_target_everything(reg3, rng):
    arena = rand_arena(rng, 5, 3)
    res = attractor(arena, set(arena.vertices), P1)
    assert res.attracted == frozenset(arena.vertices)
    assert all(res.rank[v] == 0 for v in arena.vertices)


def test_empty_target(reg3, rng):
    arena = rand_arena(rng, 5, 3)
    res = attractor(arena, set(), P1)
    assert res.attracted == frozenset()
    assert res.rank == {}


def test_chain_ranks_and_witness():
    arena = Arena({0, 1, 2}, set(), {(0, 1), (1, 2), (2, 2)},
                  {0: 0, 1: 0, 2: 0})
    res = attractor(arena, {2}, P1)
    assert res.attracted == frozenset({0, 1, 2})
    assert res.rank == {0: 2, 1: 1, 2: 0}
    assert res.witness == {0: 1, 1: 2}


def test_unknown_target_vertex():
    arena = Arena({0}, set(), {(0, 0)}, {0: 0})
    with pytest.raises(ArenaError):
        attractor(arena, {3}, P1)


def test_opponent_blocks_when_it_can():
    # P2 at 0 can loop away from the target forever
    arena = Arena(set(), {0, 1}, {(0, 0), (0, 1), (1, 1)}, {0: 0, 1: 0})
    res = attractor(arena, {1}, P1)
    assert 0 not in res.attracted


def _positional_profiles(arena, player):
    owned = sorted(v for v in arena.vertices if arena.owner(v) == player)
    for combo in itertools.product(*(arena.succ(v) for v in owned)):
        yield dict(zip(owned, combo))


def test_witness_reaches_target_against_all_opponents(rng):
    for _ in range(25):
        arena = rand_arena(rng, rng.randint(2, 6), 2)
        player = rng.choice((P1, P2))
        opponent = P2 if player == P1 else P1
        target = {v for v in arena.vertices if rng.random() < 0.3}
        res = attractor(arena, target, player)
        for start in res.attracted:
            for sigma in _positional_profiles(arena, opponent):
                v, steps = start, 0
                while v not in target:
                    v = res.witness[v] if arena.owner(v) == player else sigma[v]
                    steps += 1
                    assert steps <= len(arena), "witness failed to make progress"


def test_complement_has_avoiding_opponent_strategy(rng):
    for _ in range(20):
        arena = rand_arena(rng, rng.randint(2, 6), 2)
        player = rng.choice((P1, P2))
        opponent = P2 if player == P1 else P1
        target = {v for v in arena.vertices if rng.random() < 0.3}
        res = attractor(arena, target, player)
        outside = [v for v in arena.vertices if v not in res.attracted]
        for start in outside:
            found = False
            for sigma in _positional_profiles(arena, opponent):
                # with sigma fixed, can `player` still reach the target?
                reach = {start}
                frontier = [start]
                hit = start in target
                while frontier and not hit:
                    v = frontier.pop()
                    succ = [sigma[v]] if arena.owner(v) == opponent \
                        else list(arena.succ(v))
                    for w in succ:
                        if w in target:
                            hit = True
                            break
                        if w not in reach:
                            reach.add(w)
                            frontier.append(w)
                if not hit:
                    found = True
                    break
            assert found, f"no avoiding strategy from {start}"


def test_attractor_is_deterministic(rng):
    arena = rand_arena(rng, 6, 2)
    target = {v for v in arena.vertices if v % 2 == 0}
    a = attractor(arena, target, P1)
    b = attractor(arena, target, P1)
    assert a.rank == b.rank and a.witness == b.witness


def test_rank_invariants(rng):
    for _ in range(25):
        arena = rand_arena(rng, rng.randint(2, 7), 2)
        target = {v for v in arena.vertices if rng.random() < 0.4}
        res = attractor(arena, target, P1)
        for v in res.attracted:
            if v in target:
                assert res.rank[v] == 0
            elif arena.owner(v) == P1:
                w = res.witness[v]
                assert w in arena.succ(v)
                assert res.rank[w] < res.rank[v]
            else:
                for w in arena.succ(v):
                    assert w in res.attracted
                    assert res.rank[w] < res.rank[v]
