import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elgames.arena import ColorRegistry
from elgames.errors import ArenaError, RegistryMismatchError
from elgames.monitors import (MonitorDfa, WeightMap, compile_battery_energy,
                              compile_color_reach, compile_color_safety,
                              compile_spillover_energy, compile_window,
                              dfa_product, make_absorbing, run_dfa)
from elgames.randgen import rand_monitor


def all_words(ncolors, max_len):
    for length in range(max_len + 1):
        yield from itertools.product(range(ncolors), repeat=length)


# --- run_dfa -----------------------------------------------------------------

def test_run_empty_word_is_initial(reg2):
    dfa = compile_color_reach({1}, reg2)
    assert run_dfa(dfa, []) == dfa.initial


@given(st.lists(st.integers(0, 1), max_size=6), st.integers(0, 1))
@settings(max_examples=60, deadline=None)
def test_run_recurrence(word, last):
    reg = ColorRegistry(["a", "b"])
    dfa = compile_color_reach({1}, reg)
    assert run_dfa(dfa, word + [last]) == dfa.step(run_dfa(dfa, word), last)


def test_run_contains_color_example(reg2):
    dfa = compile_color_reach({1}, reg2)
    assert run_dfa(dfa, [0, 0, 1, 0]) in dfa.final


def test_run_rejects_unknown_color(reg2):
    dfa = compile_color_reach({1}, reg2)
    with pytest.raises(ArenaError):
        run_dfa(dfa, [5])


# --- products ----------------------------------------------------------------

def test_product_with_never_final_is_neutral_for_or(reg2):
    a = compile_color_reach({0}, reg2)
    never = MonitorDfa(1, 0, [], [[0, 0]], reg2)
    prod = dfa_product(a, never, "or")
    for word in all_words(2, 5):
        assert prod.accepts(word) == a.accepts(word)


def test_product_self_and_is_idempotent(reg2):
    a = compile_color_reach({1}, reg2)
    prod = dfa_product(a, a, "and")
    for word in all_words(2, 5):
        assert prod.accepts(word) == a.accepts(word)


def test_product_size_bound():
    rng = random.Random(3)
    reg = ColorRegistry(["a", "b"])
    for _ in range(25):
        a = rand_monitor(rng, reg)
        b = rand_monitor(rng, reg)
        prod = dfa_product(a, b, "and")
        assert prod.num_states <= a.num_states * b.num_states


def test_product_registry_mismatch(reg2, reg3):
    a = compile_color_reach({0}, reg2)
    b = compile_color_reach({0}, reg3)
    with pytest.raises(RegistryMismatchError):
        dfa_product(a, b, "or")


# --- make_absorbing ----------------------------------------------------------

def exactly_01_dfa(reg):
    # accepts exactly the word "ab" (colors 0 then 1); state 3 is a trap
    delta = [
        [1, 3],  # from start: a -> 1, b -> dead
        [3, 2],  # after a: b -> accept
        [3, 3],  # accept state falls into the trap on any continuation
        [3, 3],
    ]
    return MonitorDfa(4, 0, [2], delta, reg)


def test_absorbing_accepts_prefix_closure(reg2):
    dfa = make_absorbing(exactly_01_dfa(reg2))
    for word in all_words(2, 4):
        expected = len(word) >= 2 and word[0] == 0 and word[1] == 1
        assert dfa.accepts(word) == expected
    assert dfa.is_absorbing()


def test_absorbing_is_fixpoint_on_absorbing_input(reg2):
    dfa = compile_color_reach({0}, reg2)
    again = make_absorbing(dfa)
    for word in all_words(2, 5):
        assert dfa.accepts(word) == again.accepts(word)


def test_absorbing_initial_final_accepts_everything(reg2):
    dfa = MonitorDfa(2, 0, [0], [[1, 1], [0, 0]], reg2)
    absorbed = make_absorbing(dfa)
    assert absorbed.accepts([])
    for word in all_words(2, 3):
        assert absorbed.accepts(word)


# --- energy compilers ----------------------------------------------------------

def battery_violates(weights, bound, word, initial=0):
    level = initial
    for c in word:
        level = min(bound, level + weights[c])
        if level < 0:
            return True
    return False


def spillover_violates(weights, bound, word, initial=0):
    level = initial
    for c in word:
        level += weights[c]
        if level < 0 or level > bound:
            return True
    return False


def test_battery_example_sequence(reg2):
    wm = WeightMap((1, -1), reg2)
    dfa = compile_battery_energy(wm, 2)
    # levels 1, 2, 2, 1, 0 then the drop below zero
    assert not dfa.accepts([0, 0, 0, 1, 1])
    assert dfa.accepts([0, 0, 0, 1, 1, 1])


def test_battery_nonnegative_weights_never_accept(reg2):
    wm = WeightMap((1, 0), reg2)
    dfa = compile_battery_energy(wm, 3)
    for word in all_words(2, 6):
        assert not dfa.accepts(word)


def test_battery_zero_bound_single_drop(reg2):
    wm = WeightMap((1, -1), reg2)
    dfa = compile_battery_energy(wm, 0)
    assert dfa.accepts([1])
    assert dfa.num_states == 2


def test_battery_state_count_is_bound_plus_two(reg2):
    for b in range(0, 5):
        dfa = compile_battery_energy(WeightMap((1, -1), reg2), b)
        assert dfa.num_states == b + 2


def test_spillover_examples(reg3):
    wm = WeightMap((1, -1, 0), reg3)
    dfa = compile_spillover_energy(wm, 2)
    assert dfa.accepts([0, 0, 0])          # 1, 2, 3 overflows
    word = [0, 1] * 4
    assert not dfa.accepts(word)           # oscillates 1, 0
    assert dfa.accepts([1])                # immediate underflow
    assert dfa.num_states == 4


@pytest.mark.parametrize("variant,checker", [
    (compile_battery_energy, battery_violates),
    (compile_spillover_energy, spillover_violates),
])
def test_energy_agrees_with_simulator(variant, checker):
    reg = ColorRegistry(["x", "y", "z"])
    rng = random.Random(8)
    for _ in range(30):
        weights = tuple(rng.randint(-2, 2) for _ in range(3))
        bound = rng.randint(0, 3)
        dfa = variant(WeightMap(weights, reg), bound)
        for word in all_words(3, 5):
            assert dfa.accepts(word) == checker(weights, bound, word), \
                (weights, bound, word)


def test_energy_rejects_negative_bounds(reg2):
    with pytest.raises(ArenaError):
        compile_battery_energy(WeightMap((1, -1), reg2), -1)


# --- window compiler -----------------------------------------------------------

def window_violates(weights, lam, word):
    vals = [weights[c] for c in word]
    for i in range(len(vals) - lam + 1):
        if all(sum(vals[i:i + j]) < 0 for j in range(1, lam + 1)):
            return True
    return False


def test_window_length_one_detects_negative_colors(reg2):
    dfa = compile_window(WeightMap((1, -1), reg2), 1)
    assert dfa.accepts([0, 1])
    assert not dfa.accepts([0, 0, 0])


def test_window_closes_good(reg2):
    dfa = compile_window(WeightMap((2, -1), reg2), 2)
    # -1 then +2: the opened window recovers to +1
    assert not dfa.accepts([1, 0])


def test_window_completes_bad(reg3):
    dfa = compile_window(WeightMap((5, -1, 0), reg3), 2)
    # -1, -1: the first window stays negative through its whole span
    assert dfa.accepts([1, 1, 0])
    assert dfa.accepts([1, 1])


def test_window_agrees_with_sliding_checker():
    reg = ColorRegistry(["x", "y", "z"])
    rng = random.Random(21)
    for _ in range(25):
        weights = tuple(rng.randint(-2, 2) for _ in range(3))
        for lam in (1, 2, 3):
            dfa = compile_window(WeightMap(weights, reg), lam)
            for word in all_words(3, 5):
                expected = any(window_violates(weights, lam, word[:k])
                               for k in range(len(word) + 1))
                assert dfa.accepts(word) == expected, (weights, lam, word)


# --- reach / safety -------------------------------------------------------------

def test_reach_empty_target_never_accepts(reg2):
    dfa = compile_color_reach(set(), reg2)
    for word in all_words(2, 5):
        assert not dfa.accepts(word)


def test_reach_full_target_accepts_nonempty(reg2):
    dfa = compile_color_reach({0, 1}, reg2)
    assert not dfa.accepts([])
    for word in all_words(2, 4):
        if word:
            assert dfa.accepts(word)


def test_reach_single_color(reg2):
    dfa = compile_color_reach({1}, reg2)
    assert not dfa.accepts([0, 0, 0])
    assert dfa.accepts([0, 1, 0])


def test_safety_is_absorbing_form(reg2):
    reach = compile_color_reach({1}, reg2)
    safe = compile_color_safety({1}, reg2)
    assert safe.is_absorbing()
    for word in all_words(2, 5):
        assert reach.accepts(word) == safe.accepts(word)


def test_compilers_emit_absorbing_and_complete(reg3):
    wm = WeightMap((1, -1, 0), reg3)
    for dfa in (compile_battery_energy(wm, 2), compile_spillover_energy(wm, 1),
                compile_window(wm, 2), compile_color_reach({0}, reg3),
                compile_color_safety({0}, reg3)):
        assert dfa.is_absorbing()
        for q in range(dfa.num_states):
            for c in range(3):
                assert 0 <= dfa.step(q, c) < dfa.num_states
