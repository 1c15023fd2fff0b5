import math
import random

import pytest

from elgames.arena import Arena, ColorRegistry, P1, P2, ProductSpace
from elgames.combiner import (conj_fast_path, detect_fast_path,
                              disj_fast_path, lookahead_flags, memory_bound,
                              region_decompose, solve_combined,
                              switching_bound)
from elgames.conditions import (And, CombinedCondition, FALSE, Inf, Not, Or,
                                TRUE, Var)
from elgames.el_solver import solve_el
from elgames.errors import ArenaError, InternalSoundnessError
from elgames.monitors import MonitorDfa, compile_color_safety
from elgames.oracle import oracle_solve
from elgames.randgen import (rand_arena, rand_el_formula, rand_monitor,
                             random_instance)

from conftest import two_cycle_arena


def test_constant_true_wins_everywhere(reg2):
    cond = CombinedCondition([], [], TRUE, reg2)
    res = solve_combined(two_cycle_arena(), cond)
    assert all(player == P1 for player in res.winner.values())
    # strategies are valid moves
    s = res.profile.p1
    assert s.next_action(s.initial, 0) in two_cycle_arena().succ(0)


def test_constant_false_loses_everywhere(reg2):
    cond = CombinedCondition([], [], FALSE, reg2)
    res = solve_combined(two_cycle_arena(), cond)
    assert all(player == P2 for player in res.winner.values())


def test_no_monitors_matches_solve_el(reg3, rng):
    for _ in range(20):
        arena = rand_arena(rng, rng.randint(2, 7), 3)
        g = rand_el_formula(rng, reg3)
        cond = CombinedCondition([g], [], Var("W", 0), reg3)
        res = solve_combined(arena, cond)
        el = solve_el(arena, g, reg3)
        for v in arena.vertices:
            assert res.winner_at(v) == (P1 if v in el.win1 else P2)


def test_dual_path_agreement(rng):
    for _ in range(80):
        arena, cond = random_instance(rng)
        res = solve_combined(arena, cond)
        assert res.winner_table() == oracle_solve(arena, cond)


def test_winner_table_is_total(rng):
    arena, cond = random_instance(rng)
    res = solve_combined(arena, cond)
    assert set(res.winner) == set(range(len(res.space.pairs)))


def test_monitor_order_independence(rng):
    checked = 0
    while checked < 15:
        arena, cond = random_instance(rng)
        if cond.l < 2:
            continue
        base = solve_combined(arena, cond).winner_table()
        flipped = solve_combined(arena, cond, monitor_order=[1, 0]).winner_table()
        assert base == flipped
        checked += 1


def test_region_invariants_on_trace(rng):
    for _ in range(30):
        arena, cond = random_instance(rng)
        res = solve_combined(arena, cond)
        for dec in res.regions:
            parts = dec.parts()
            union = frozenset().union(*parts)
            assert sum(len(p) for p in parts) == len(union)
            assert dec.flagged <= dec.s1 | dec.s2
            assert not (dec.s1p & dec.s2p)
            sub = res.space.arena
            for v in dec.vtop:
                assert any(w in dec.vtop for w in sub.succ(v)
                           if w in union) or \
                    any(w in dec.vtop for w in sub.succ(v))


def test_region_decompose_rejects_partial_winner_table(reg2):
    arena = two_cycle_arena()
    space = ProductSpace(arena, reg2, [])
    sub = space.arena
    with pytest.raises(InternalSoundnessError):
        region_decompose(sub, frozenset(), {0: P1})


def test_all_flagged_when_monitor_starts_final(reg2, rng):
    # a monitor whose initial state is final flags every product vertex
    mon = MonitorDfa(1, 0, [0], [[0, 0]], reg2)
    arena = two_cycle_arena()
    cond = CombinedCondition([Inf(0)], [mon], And(Var("W", 0), Var("R", 0)), reg2)
    res = solve_combined(arena, cond)
    assert all(player == P2 for player in res.winner.values())
    assert res.winner_table() == oracle_solve(arena, cond)


def test_funnel_lands_in_winner_fringe(reg2):
    # 0 -> 1 -> 2 is a P1-controlled funnel into a flagged vertex P1 wins;
    # 3 is a safe side loop. The funnel must end up in the P1 fringe.
    arena = Arena({0, 1, 2}, {3}, {(0, 1), (1, 2), (2, 2), (3, 3), (0, 3)},
                  {0: 1, 1: 1, 2: 0, 3: 1})
    mon = compile_color_safety({0}, reg2)  # color a is the trigger
    # the formula rewards falsification, so P1 funnels into vertex 2
    cond = CombinedCondition([], [mon], Not(Var("R", 0)), reg2)
    res = solve_combined(arena, cond)
    dec = res.regions[-1]
    space = res.space
    flagged_two = space.id_of(2, (0,))
    assert flagged_two in dec.s1
    assert space.id_of(0, (0,)) in dec.s1p
    assert space.id_of(1, (0,)) in dec.s1p
    assert res.winner_at(0) == P1 and res.winner_at(3) == P2


def test_lookahead_flag_semantics(reg2):
    arena = two_cycle_arena()  # vertex 0 emits a
    mon = compile_color_safety({0}, reg2)
    space = ProductSpace(arena, reg2, [mon])
    flags = lookahead_flags(space, 0)
    # standing at vertex 0 with the monitor fresh: the step on `a` fires
    assert space.id_of(0, (0,)) in flags
    # standing at vertex 1 (emits b) with the monitor fresh: still safe
    assert space.id_of(1, (0,)) not in flags
    # any vertex with the monitor already final stays flagged
    assert space.id_of(1, (1,)) in flags


# --- fast paths ------------------------------------------------------------------

def _fast_instances(rng, count):
    registry = ColorRegistry(["a", "b", "c"])
    for _ in range(count):
        arena = rand_arena(rng, rng.randint(2, 7), 3)
        w = rand_el_formula(rng, registry)
        mon = rand_monitor(rng, registry)
        yield arena, w, mon, registry


def test_conj_fast_path_matches_general(rng):
    for arena, w, mon, registry in _fast_instances(rng, 30):
        cond = CombinedCondition([w], [mon], And(Var("W", 0), Var("R", 0)),
                                 registry)
        assert conj_fast_path(arena, cond).winner_table() == \
            solve_combined(arena, cond).winner_table()


def test_disj_fast_path_matches_general(rng):
    for arena, w, mon, registry in _fast_instances(rng, 30):
        cond = CombinedCondition([w], [mon], Or(Var("W", 0), Var("R", 0)),
                                 registry)
        assert disj_fast_path(arena, cond).winner_table() == \
            solve_combined(arena, cond).winner_table()


def test_conj_with_vacuous_monitor_is_plain_el(reg3, rng):
    never = MonitorDfa(1, 0, [], [[0, 0, 0]], reg3)
    for _ in range(10):
        arena = rand_arena(rng, rng.randint(2, 6), 3)
        w = rand_el_formula(rng, reg3)
        cond = CombinedCondition([w], [never], And(Var("W", 0), Var("R", 0)), reg3)
        res = conj_fast_path(arena, cond)
        el = solve_el(arena, w, reg3)
        for v in arena.vertices:
            assert res.winner_at(v) == (P1 if v in el.win1 else P2)


def test_disj_with_vacuous_monitor_wins_everywhere(reg3, rng):
    never = MonitorDfa(1, 0, [], [[0, 0, 0]], reg3)
    arena = rand_arena(rng, 5, 3)
    cond = CombinedCondition([FALSE], [never], Or(Var("W", 0), Var("R", 0)), reg3)
    res = disj_fast_path(arena, cond)
    assert all(player == P1 for player in res.winner.values())


def test_disj_with_false_base_is_flag_avoidance(reg2, rng):
    # W = false collapses the disjunction to "avoid ever triggering the
    # monitor", a pure safety game for P1
    from elgames.reachability import attractor
    for _ in range(10):
        arena = rand_arena(rng, rng.randint(2, 6), 2)
        mon = compile_color_safety({0}, reg2)
        cond = CombinedCondition([FALSE], [mon], Or(Var("W", 0), Var("R", 0)),
                                 reg2)
        res = disj_fast_path(arena, cond)
        flagged = lookahead_flags(res.space, 0)
        att = attractor(res.space.arena, flagged, P2)
        for pid, player in res.winner.items():
            assert player == (P2 if pid in att.attracted else P1)
        assert res.winner_table() == solve_combined(arena, cond).winner_table()


def test_conj_safety_only_is_attractor_complement(reg2, rng):
    from elgames.reachability import attractor
    for _ in range(10):
        arena = rand_arena(rng, rng.randint(2, 6), 2)
        mon = compile_color_safety({0}, reg2)
        cond = CombinedCondition([TRUE], [mon], And(Var("W", 0), Var("R", 0)), reg2)
        res = conj_fast_path(arena, cond)
        flagged = lookahead_flags(res.space, 0)
        att = attractor(res.space.arena, flagged, P2)
        for pid, player in res.winner.items():
            assert player == (P2 if pid in att.attracted else P1)


def test_fast_path_profiles_verify(rng):
    from elgames.oracle import verify_solve_result
    for arena, w, mon, registry in _fast_instances(rng, 8):
        for shape, solver in (("conj", conj_fast_path), ("disj", disj_fast_path)):
            f = And(Var("W", 0), Var("R", 0)) if shape == "conj" \
                else Or(Var("W", 0), Var("R", 0))
            res = solver(arena, CombinedCondition([w], [mon], f, registry))
            for player in (P1, P2):
                report = verify_solve_result(res, player)
                assert report.ok, (shape, player, report.failures)


def test_synthesized_moves_are_edges_at_every_reachable_memory(rng):
    from elgames.strategies import reachable_memory
    for _ in range(10):
        arena, cond = random_instance(rng, max_vertices=6)
        res = solve_combined(arena, cond)
        for strategy in (res.profile.p1, res.profile.p2):
            owned = [v for v in arena.vertices
                     if arena.owner(v) == strategy.owner]
            for m in reachable_memory(strategy):
                for v in owned:
                    assert strategy.next_action(m, v) in arena.succ(v)


def test_profile_play_realizes_the_winner(rng):
    # letting the two synthesized strategies play each other from every
    # vertex must produce a play the computed winner actually wins
    from elgames.conditions import eval_combined_lasso
    from elgames.strategies import simulate_to_lasso
    for _ in range(25):
        arena, cond = random_instance(rng, max_vertices=6)
        res = solve_combined(arena, cond)
        for v in arena.vertices:
            lasso = simulate_to_lasso(res.profile, arena, v)
            assert eval_combined_lasso(cond, lasso) == (res.winner_at(v) == P1)


def test_detect_fast_path(reg2):
    mon = compile_color_safety({0}, reg2)
    conj = CombinedCondition([Inf(0)], [mon], And(Var("W", 0), Var("R", 0)), reg2)
    disj = CombinedCondition([Inf(0)], [mon], Or(Var("R", 0), Var("W", 0)), reg2)
    other = CombinedCondition([Inf(0)], [mon], Var("R", 0), reg2)
    assert detect_fast_path(conj) == "conj"
    assert detect_fast_path(disj) == "disj"
    assert detect_fast_path(other) is None


def test_conj_fast_path_size_bound(rng):
    for arena, w, mon, registry in _fast_instances(rng, 15):
        cond = CombinedCondition([w], [mon], And(Var("W", 0), Var("R", 0)),
                                 registry)
        res = conj_fast_path(arena, cond)
        el_size = max((lvl["sizes"][0] for lvl in res.levels
                       if lvl["kind"] == "el"), default=1)
        assert res.profile.p1.size <= mon.num_states * el_size


def test_disj_fast_path_p2_additive_size(rng):
    for arena, w, mon, registry in _fast_instances(rng, 15):
        cond = CombinedCondition([w], [mon], Or(Var("W", 0), Var("R", 0)),
                                 registry)
        res = disj_fast_path(arena, cond)
        base = solve_el(arena, w, registry)
        assert res.profile.p2.size <= mon.num_states + base.strategy2.size


# --- bound calculators --------------------------------------------------------------

def test_memory_bound_base_case():
    assert memory_bound(0, 7, 3, lambda n: 42) == 42


def test_memory_bound_positional_base():
    assert memory_bound(1, 4, 3, lambda n: 1) == 3 ** 4


def test_memory_bound_two_levels_hand_expanded():
    # n=3, m=2, base == 2:
    #   f(1, 3)  = 2**3 * 2 * 2          = 32
    #   f(1, 24) = 2**24 * 2 * 2         = 2**26
    #   f(2, 3)  = 2**3 * 32 * 2**26     = 2**34
    assert memory_bound(2, 3, 2, lambda n: 2) == 2 ** 34


def test_memory_bound_rejects_bad_inputs():
    with pytest.raises(ArenaError):
        memory_bound(-1, 3, 2, lambda n: 1)
    with pytest.raises(ArenaError):
        memory_bound(1, 0, 2, lambda n: 1)


def test_switching_bound_values():
    assert switching_bound(1, 1, 1) == 2
    assert switching_bound(1, 2, 1) == 256


def test_switching_bound_monotone():
    for l in (1, 2):
        for k in (1, 2):
            for v in (1, 2):
                here = switching_bound(l, k, v)
                assert switching_bound(l + 1, k, v) >= here
                assert switching_bound(l, k + 1, v) >= here
                assert switching_bound(l, k, v + 1) >= here


def test_stitched_size_within_recursive_bound(rng):
    from elgames.conditions import colors_of
    for _ in range(20):
        arena, cond = random_instance(rng)
        res = solve_combined(arena, cond)
        if cond.l == 0:
            continue
        m = max(d.num_states for d in cond.monitors)
        colors = set()
        for g in cond.el_atoms:
            colors |= set(colors_of(g))
        ceiling = math.factorial(min(len(colors) + 1, len(cond.registry)))
        bound = memory_bound(cond.l, len(arena), m, lambda n: ceiling)
        assert res.profile.p1.size <= bound
