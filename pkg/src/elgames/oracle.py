"""Independent solution paths and strategy verification.

The oracle solves combined games by a completely different route than the
region construction: fold every regular atom into the prefix-independent
layer.  On the full product, a monitor's final states are absorbing, so
"some prefix hits the language" is equivalent to "vertices whose monitor
state is final occur infinitely often".  Recoloring product vertices with
(color, flag vector) pairs therefore turns the whole condition into one
Emerson-Lei formula over extended colors, solved directly.

``verify_strategy`` checks a claimed winner the hard way: fix the
strategy's moves, hand every remaining choice to the opponent, and solve
the resulting one-player game; any opponent win reachable from a claimed
configuration refutes the claim and yields a concrete counterexample lasso.

``brute_force_positional`` is the ground-truth parity solver used to
cross-check Zielonka's algorithm on small games.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from elgames.arena import (P1, P2, Arena, ColorRegistry, ProductSpace,
                           ProductVertex)
from elgames.combiner import SolveResult
from elgames.conditions import (CombinedCondition, Formula, Inf, Lasso, Not,
                                Var, disjunction, simplify, substitute)
from elgames.el_solver import ParityGame, el_winners, extract_lasso
from elgames.errors import ArenaError, SizeGuardError
from elgames.monitors import MonitorDfa
from elgames.strategies import MooreStrategy


# ---------------------------------------------------------------------------
# Monolithic reduction
# ---------------------------------------------------------------------------

@dataclass
class MonolithicReduction:
    """Product arena recolored by (color, monitor-finality vector) with the
    combined formula rewritten over those extended colors."""
    space: ProductSpace
    arena: Arena              # same graph as space.arena, extended colors
    registry: ColorRegistry   # extended colors
    formula: Formula
    ext_color_of: dict[int, int]  # pid -> extended color


def _flag_vector(space: ProductSpace, pid: int) -> tuple[int, ...]:
    pv = space.pairs[pid]
    return tuple(1 if q in dfa.final else 0
                 for dfa, q in zip(space.monitors, pv.states))


def monolithic_reduce(arena: Arena, cond: CombinedCondition) -> MonolithicReduction:
    space = ProductSpace(arena, cond.registry, cond.monitors)
    pairs_seen: dict[tuple[int, tuple[int, ...]], int] = {}
    ext_of: dict[int, tuple[int, tuple[int, ...]]] = {}
    for pid in range(len(space.pairs)):
        key = (arena.gamma[space.base_of(pid)], _flag_vector(space, pid))
        ext_of[pid] = key
    ext_keys = sorted(set(ext_of.values()))
    ext_index = {key: i for i, key in enumerate(ext_keys)}
    names = [f"{cond.registry.name(c)}|{''.join(map(str, flags))}"
             for c, flags in ext_keys]
    registry = ColorRegistry(names)
    gamma = {pid: ext_index[ext_of[pid]] for pid in range(len(space.pairs))}
    recolored = Arena(space.arena.v1, space.arena.v2, space.arena.edges, gamma)
    formula = rewrite_over_extended(cond, ext_keys)
    return MonolithicReduction(space, recolored, registry, formula,
                               {pid: ext_index[k] for pid, k in ext_of.items()})


def rewrite_over_extended(cond: CombinedCondition,
                          ext_keys: list[tuple[int, tuple[int, ...]]]) -> Formula:
    """Rewrite the combined formula as a pure EL formula over extended
    colors (indices into ``ext_keys``)."""
    by_base: dict[int, list[int]] = {}
    by_flag: dict[int, list[int]] = {}
    for i, (c, flags) in enumerate(ext_keys):
        by_base.setdefault(c, []).append(i)
        for d, bit in enumerate(flags):
            if bit:
                by_flag.setdefault(d, []).append(i)

    def lift_el(g: Formula) -> Formula:
        def repl(a):
            if isinstance(a, Inf):
                return disjunction(Inf(e) for e in by_base.get(a.color, []))
            return None
        return substitute(g, repl)

    def repl_var(a):
        if isinstance(a, Var):
            if a.kind == "W":
                return lift_el(cond.el_atoms[a.index])
            if a.kind == "R":
                return Not(disjunction(Inf(e) for e in by_flag.get(a.index, [])))
        return None

    return simplify(substitute(cond.formula, repl_var))


def oracle_solve(arena: Arena, cond: CombinedCondition) -> dict[ProductVertex, int]:
    """Winner per product vertex via the monolithic reduction; the
    cross-validation path for the region-based solver."""
    red = monolithic_reduce(arena, cond)
    res = el_winners(red.arena, red.formula, red.registry)
    return {red.space.vertex(pid): res.winner_of(pid)
            for pid in range(len(red.space.pairs))}


def eval_reduced_lasso(red: MonolithicReduction, start_pid: int,
                       vertex_lasso: tuple[list[int], list[int]]) -> bool:
    """Evaluate the rewritten formula on a lasso given as product-vertex id
    sequences (stem, cycle); used to cross-check the reduction."""
    from elgames.conditions import eval_el_lasso
    stem, cycle = vertex_lasso
    lasso = Lasso(tuple(red.ext_color_of[p] for p in stem),
                  tuple(red.ext_color_of[p] for p in cycle))
    return eval_el_lasso(red.formula, lasso)


# ---------------------------------------------------------------------------
# Strategy verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationFailure:
    vertex: ProductVertex
    lasso: Lasso

    def format(self, registry: ColorRegistry) -> str:
        return (f"claimed {self.vertex} lost; counterexample "
                f"{self.lasso.format(registry)}")


@dataclass
class VerificationReport:
    ok: bool
    checked: int
    failures: tuple[VerificationFailure, ...]


def verify_strategy(arena: Arena, cond: CombinedCondition, strategy: MooreStrategy,
                    player: int, claimed) -> VerificationReport:
    """Check that ``strategy`` wins for ``player`` from every claimed
    product vertex against every opponent behavior.

    Fixes the strategy's choices, gives all other choices to the opponent,
    and solves the resulting one-player game (monitors are baked into the
    explored configurations, so the condition becomes an EL formula over
    extended colors).  A claimed configuration the opponent can win from is
    returned with a witness lasso.
    """
    claimed = sorted(claimed, key=lambda pv: (pv.base, pv.states))
    opponent = P2 if player == P1 else P1
    if not claimed:
        return VerificationReport(True, 0, ())

    configs: list[tuple[int, tuple[int, ...], object]] = []
    index: dict[tuple[int, tuple[int, ...], object], int] = {}
    seeds = []
    for pv in claimed:
        memory = strategy.seed(pv.states)
        key = (pv.base, pv.states, memory)
        if key not in index:
            index[key] = len(configs)
            configs.append(key)
        seeds.append(index[key])
    succ_lists: list[list[int]] = []
    head = 0
    while head < len(configs):
        v, states, memory = configs[head]
        head += 1
        color = arena.gamma[v]
        states2 = tuple(d.step(q, color) for d, q in zip(cond.monitors, states))
        memory2 = strategy.update(memory, color)
        if arena.owner(v) == player:
            targets = [strategy.next_action(memory, v)]
            if targets[0] not in arena.succ(v):
                raise ArenaError(
                    f"strategy proposes non-edge {v} -> {targets[0]}")
        else:
            targets = list(arena.succ(v))
        row = []
        for w in targets:
            key = (w, states2, memory2)
            if key not in index:
                index[key] = len(configs)
                configs.append(key)
            row.append(index[key])
        succ_lists.append(row)

    ext_keys = sorted({
        (arena.gamma[v],
         tuple(1 if q in dfa.final else 0
               for dfa, q in zip(cond.monitors, states)))
        for v, states, _ in configs})
    ext_index = {k: i for i, k in enumerate(ext_keys)}
    ext_registry = ColorRegistry(
        [f"{cond.registry.name(c)}|{''.join(map(str, fl))}" for c, fl in ext_keys])
    gamma = {}
    for i, (v, states, _) in enumerate(configs):
        flags = tuple(1 if q in dfa.final else 0
                      for dfa, q in zip(cond.monitors, states))
        gamma[i] = ext_index[(arena.gamma[v], flags)]

    # every choice belongs to the opponent
    n = len(configs)
    if opponent == P1:
        game = Arena(set(range(n)), set(),
                     {(i, t) for i, row in enumerate(succ_lists) for t in row},
                     gamma)
    else:
        game = Arena(set(), set(range(n)),
                     {(i, t) for i, row in enumerate(succ_lists) for t in row},
                     gamma)
    formula = rewrite_over_extended(cond, ext_keys)
    res = el_winners(game, formula, ext_registry)

    failures = []
    for pv, cid in zip(claimed, seeds):
        if res.winner_of(cid) == opponent:
            side = 0 if opponent == P1 else 1
            stem, cycle = extract_lasso(res, game, cid, side)
            ext_lasso = Lasso(stem, cycle)
            base_lasso = Lasso(
                tuple(ext_keys[c][0] for c in ext_lasso.stem),
                tuple(ext_keys[c][0] for c in ext_lasso.cycle))
            failures.append(VerificationFailure(pv, base_lasso))
    return VerificationReport(not failures, len(claimed), tuple(failures))


def verify_solve_result(result: SolveResult, player: int) -> VerificationReport:
    """Verify a solver output on its claimed region for one player."""
    claimed = [result.space.vertex(pid) for pid in sorted(result.claimed(player))]
    return verify_strategy(result.base_arena, result.condition,
                           result.profile.strategy_for(player), player, claimed)


# ---------------------------------------------------------------------------
# Positional brute force for parity games
# ---------------------------------------------------------------------------

def brute_force_positional(pg: ParityGame, *, guard: int = 8):
    """Ground truth for parity games by exhausting positional strategies.

    A vertex is won by Player 1 iff some positional Player 1 strategy makes
    the eventual cycle even against every positional Player 2 reply.
    """
    arena = pg.arena
    if len(arena) > guard:
        raise SizeGuardError(f"brute force limited to {guard} vertices")
    verts = list(arena.vertices)
    own1 = [v for v in verts if arena.owner(v) == P1]
    own2 = [v for v in verts if arena.owner(v) == P2]

    def cycles_even(succ: dict[int, int], start: int) -> bool:
        seen: dict[int, int] = {}
        path = []
        v = start
        while v not in seen:
            seen[v] = len(path)
            path.append(v)
            v = succ[v]
        cycle = path[seen[v]:]
        top = max(pg.priority[u] for u in cycle)
        return top % 2 == 0

    win1 = set()
    for v in verts:
        won = False
        for choice1 in itertools.product(*(arena.succ(u) for u in own1)):
            s1 = dict(zip(own1, choice1))
            good = True
            for choice2 in itertools.product(*(arena.succ(u) for u in own2)):
                succ = dict(s1)
                succ.update(zip(own2, choice2))
                if not cycles_even(succ, v):
                    good = False
                    break
            if good:
                won = True
                break
        if won:
            win1.add(v)
    win2 = frozenset(v for v in verts if v not in win1)
    return frozenset(win1), win2


# ---------------------------------------------------------------------------
# Predictability automata
# ---------------------------------------------------------------------------

@dataclass
class PredictabilityAutomaton:
    """For a base vertex: a DFA over colors accepting exactly the histories
    after which Player 1 wins when standing at that vertex."""
    vertex: int
    dfa: MonitorDfa
    states: tuple[tuple[int, ...], ...]  # dfa state id -> monitor-state tuple

    def accepts(self, history) -> bool:
        return self.dfa.accepts(history)


def extract_predictability(result: SolveResult, v: int) -> PredictabilityAutomaton:
    """The monitor-product automaton with accepting states at the monitor
    configurations from which Player 1 wins at ``v``."""
    if v not in result.base_arena:
        raise ArenaError(f"unknown vertex {v}")
    space = result.space
    combos = sorted({pv.states for pv in space.pairs})
    sidx = {states: i for i, states in enumerate(combos)}
    ncolors = len(result.condition.registry)
    delta = [[sidx[space.step_states(states, c)] for c in range(ncolors)]
             for states in combos]
    final = [i for i, states in enumerate(combos)
             if result.winner[space.id_of(v, states)] == P1]
    dfa = MonitorDfa(len(combos), sidx[space.initial_states], final, delta,
                     result.condition.registry)
    return PredictabilityAutomaton(v, dfa, tuple(combos))
