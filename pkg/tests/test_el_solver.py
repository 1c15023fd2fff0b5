import pytest

from elgames.arena import Arena, ColorRegistry, P1
from elgames.conditions import And, Inf, Not, TRUE, parity_to_el
from elgames.el_solver import (ParityGame, el_winners, lar_expand,
                               solve_el, zielonka)
from elgames.errors import ArenaError
from elgames.oracle import brute_force_positional
from elgames.randgen import rand_arena, rand_el_formula, rand_parity_game

from conftest import self_loop_arena, two_cycle_arena


# --- parity game type ---------------------------------------------------------

def test_parity_game_requires_total_priorities():
    with pytest.raises(ArenaError):
        ParityGame(self_loop_arena(), {})


def test_parity_game_rejects_negative_priorities():
    with pytest.raises(ArenaError):
        ParityGame(self_loop_arena(), {0: -1})


# --- zielonka -------------------------------------------------------------------

def test_even_self_loop_won_by_p1():
    pg = ParityGame(self_loop_arena(), {0: 2})
    win1, win2, s1, s2 = zielonka(pg)
    assert win1 == frozenset({0}) and not win2
    assert s1[0] == 0


def test_odd_self_loop_won_by_p2():
    pg = ParityGame(Arena(set(), {0}, {(0, 0)}, {0: 0}), {0: 1})
    win1, win2, s1, s2 = zielonka(pg)
    assert win2 == frozenset({0})
    assert s2[0] == 0


def test_strategies_play_inside_winning_regions(rng):
    for _ in range(30):
        pg = rand_parity_game(rng, rng.randint(2, 7))
        win1, win2, s1, s2 = zielonka(pg)
        assert win1 | win2 == frozenset(pg.arena.vertices)
        assert not (win1 & win2)
        for v, w in s1.items():
            assert v in win1 and w in pg.arena.succ(v) and w in win1
        for v, w in s2.items():
            assert v in win2 and w in pg.arena.succ(v) and w in win2


def test_zielonka_matches_brute_force(rng):
    for _ in range(80):
        pg = rand_parity_game(rng, rng.randint(1, 6), max_priority=4)
        win1, win2, _, _ = zielonka(pg)
        bwin1, bwin2 = brute_force_positional(pg)
        assert win1 == bwin1 and win2 == bwin2


# --- record expansion --------------------------------------------------------

def test_single_relevant_color_expansion_is_flat(reg2):
    arena = Arena({0, 1}, set(), {(0, 1), (1, 0)}, {0: 0, 1: 0})
    registry = ColorRegistry(["a"])
    pg, mapping = lar_expand(arena, Inf(0), registry)
    assert len(pg.arena) == len(arena)


def test_expansion_size_bound(rng, reg3):
    import math
    for _ in range(20):
        arena = rand_arena(rng, rng.randint(2, 6), 3)
        f = rand_el_formula(rng, reg3)
        pg, mapping = lar_expand(arena, f, reg3)
        relevant = len({a.color for a in _atoms(f)})
        classes = relevant + (1 if relevant < 3 else 0)
        assert len(pg.arena) <= len(arena) * math.factorial(max(classes, 1))


def _atoms(f):
    from elgames.conditions import atoms, Inf as InfNode
    return [a for a in atoms(f) if isinstance(a, InfNode)]


def test_two_color_expansion_priorities(reg2):
    # both vertices colored differently; f = Inf(a) & Inf(b)
    arena = two_cycle_arena()
    f = And(Inf(0), Inf(1))
    pg, mapping = lar_expand(arena, f, reg2, memory="full")
    assert len(pg.arena) <= 4
    # hit sets of size 2 must carry priority 4 (f holds on {a,b}),
    # singleton hits carry odd priorities (f fails there)
    priorities = set(pg.priority.values())
    assert priorities <= {1, 3, 4}
    assert 4 in priorities


def test_full_mode_covers_all_records(reg2):
    arena = self_loop_arena()
    pg, mapping = lar_expand(arena, Inf(0), reg2, memory="full")
    # records over two classes: the color and the catch-all
    assert len(pg.arena) == 2


# --- solve_el -------------------------------------------------------------------

def test_true_formula_wins_everywhere(reg3, rng):
    arena = rand_arena(rng, 5, 3)
    res = solve_el(arena, TRUE, reg3)
    assert res.win1 == frozenset(arena.vertices)


def test_one_player_reachable_cycle(reg2):
    # P1 owns everything; an a-colored cycle is reachable from both vertices
    arena = Arena({0, 1}, set(), {(0, 0), (1, 0), (1, 1)}, {0: 0, 1: 1})
    res = solve_el(arena, Inf(0), reg2)
    assert res.win1 == frozenset({0, 1})
    res2 = solve_el(arena, And(Inf(1), Not(Inf(0))), reg2)
    assert res2.win1 == frozenset({1})


def test_el_route_matches_direct_parity(rng):
    registry = ColorRegistry(["a", "b", "c"])
    for _ in range(25):
        arena = rand_arena(rng, rng.randint(2, 6), 3)
        priorities = {c: rng.randint(0, 3) for c in range(3)}
        f = parity_to_el(priorities, registry)
        res = solve_el(arena, f, registry)
        pg = ParityGame(arena, {v: priorities[arena.gamma[v]]
                                for v in arena.vertices})
        win1, win2, _, _ = zielonka(pg)
        assert res.win1 == win1 and res.win2 == win2


def test_el_winners_matches_solve_el(rng, reg3):
    for _ in range(25):
        arena = rand_arena(rng, rng.randint(2, 7), 3)
        f = rand_el_formula(rng, reg3)
        full = solve_el(arena, f, reg3)
        quick = el_winners(arena, f, reg3)
        assert full.win1 == quick.win1 and full.win2 == quick.win2


def test_strategy_moves_are_edges(rng, reg3):
    for _ in range(15):
        arena = rand_arena(rng, rng.randint(2, 6), 3)
        f = rand_el_formula(rng, reg3)
        res = solve_el(arena, f, reg3)
        for strategy, owned in ((res.strategy1, arena.v1), (res.strategy2, arena.v2)):
            for m in range(strategy.size):
                for v in owned:
                    assert strategy.next_action(m, v) in arena.succ(v)


def test_lifted_answers_factor_through_records(reg2):
    arena = two_cycle_arena()
    res = solve_el(arena, Inf(0), reg2)
    s = res.strategy1
    h1 = [0, 1, 0]
    h2 = [1, 1, 0]
    if s.run_update(h1) == s.run_update(h2):
        assert s.next_action(s.run_update(h1), 0) == \
            s.next_action(s.run_update(h2), 0)
