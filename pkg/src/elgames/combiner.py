"""The main solving construction for combined conditions.

``solve_combined`` works on one up-front product of the arena with all
monitors and recurses on the number of regular atoms still active.  For the
atom handled at a level, a product vertex is *flagged* when its own color
step drives the monitor into a final state: from such a vertex the
prefix-avoidance atom is falsified no matter how play continues, while
plays that never visit a flagged vertex satisfy it.  The level then:

* solves the game with the atom substituted by false on the current vertex
  set (the flagged vertices inherit these winners),
* attracts each player toward the flagged vertices they win,
* solves the game with the atom substituted by true on what remains (a
  deadlock-free subarena, which is asserted),
* stitches the three layers into one pair of strategies by region dispatch.

Winners: Player 1 takes the flagged vertices they win, their attractor
fringe, and their winning part of the remainder game; Player 2 the rest.

The two fast paths (`conj_fast_path`, `disj_fast_path`) implement the
specialized single-conjunct and single-disjunct constructions with their
sharper memory bounds; the bound calculators at the bottom evaluate the
closed-form memory formulas exactly in big-integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from elgames.arena import (P1, P2, Arena, ProductSpace, ProductVertex,
                           require_valid, restrict)
from elgames.conditions import (And, CombinedCondition, Const, Formula, Or,
                                Var, inline_el_atoms, simplify, substitute)
from elgames.el_solver import solve_el
from elgames.errors import ArenaError, FormulaError, InternalSoundnessError
from elgames.reachability import attractor
from elgames.strategies import (DispatchStrategy, MooreStrategy,
                                PositionalStrategy, StrategyProfile,
                                TrackedStrategy)


@dataclass(frozen=True)
class RegionDecomposition:
    """The five-way split of a level's vertex set.

    ``s1``/``s2``: flagged vertices by winner of the falsified game;
    ``s1p``/``s2p``: the players' attractor fringes toward them;
    ``vtop``: the rest, where the regular atom survives.
    """
    level: int
    s1: frozenset[int]
    s2: frozenset[int]
    s1p: frozenset[int]
    s2p: frozenset[int]
    vtop: frozenset[int]
    flagged: frozenset[int]
    witness1: dict[int, int] = field(default_factory=dict)
    witness2: dict[int, int] = field(default_factory=dict)

    def parts(self):
        return self.s1, self.s2, self.s1p, self.s2p, self.vtop


def region_decompose(sub_arena: Arena, flagged, winners_bot: Mapping[int, int],
                     level: int = 0) -> RegionDecomposition:
    """Split the vertices of ``sub_arena`` given the flag predicate and the
    winner table of the falsified game.

    Raises ``InternalSoundnessError`` when any structural invariant fails
    (these can only be solver bugs, not bad inputs).
    """
    subset = frozenset(sub_arena.vertices)
    flagged = frozenset(flagged)
    for pid in subset:
        if pid not in winners_bot:
            raise InternalSoundnessError(f"winner table not total at {pid}")
    s1 = frozenset(p for p in flagged if winners_bot[p] == P1)
    s2 = frozenset(p for p in flagged if winners_bot[p] == P2)
    a1 = attractor(sub_arena, s1, P1)
    a2 = attractor(sub_arena, s2, P2)
    if a1.attracted & s2:
        raise InternalSoundnessError("P1 attractor reaches opponent-won flagged vertices")
    if a2.attracted & s1:
        raise InternalSoundnessError("P2 attractor reaches opponent-won flagged vertices")
    s1p = a1.attracted - s1 - s2
    s2p = a2.attracted - s2 - s1
    if s1p & s2p:
        raise InternalSoundnessError("attractor fringes overlap")
    vtop = subset - s1 - s2 - s1p - s2p
    for v in sorted(vtop):
        if not any(w in vtop for w in sub_arena.succ(v)):
            raise InternalSoundnessError(f"remainder vertex {v} has no remainder successor")
    witness1 = {v: w for v, w in a1.witness.items() if v in s1p}
    witness2 = {v: w for v, w in a2.witness.items() if v in s2p}
    return RegionDecomposition(level, s1, s2, s1p, s2p, vtop, flagged,
                               witness1, witness2)


@dataclass
class SolveResult:
    """Everything the construction produces for one instance.

    ``winner`` is total over the product-vertex ids of ``space``; the
    profile plays on the base arena with the monitor states tracked in
    memory.  ``space`` plus ``winner`` are also the raw material for the
    predictability automata.
    """
    base_arena: Arena
    condition: CombinedCondition
    space: ProductSpace
    winner: dict[int, int]
    profile: StrategyProfile
    product_strategies: tuple[MooreStrategy, MooreStrategy]
    levels: list[dict]
    regions: list[RegionDecomposition]
    fast_path: str | None = None

    def winner_table(self) -> dict[ProductVertex, int]:
        return {self.space.vertex(pid): pl for pid, pl in self.winner.items()}

    def winner_at(self, base_vertex: int, states: tuple[int, ...] | None = None) -> int:
        if states is None:
            states = self.space.initial_states
        return self.winner[self.space.id_of(base_vertex, states)]

    def claimed(self, player: int) -> frozenset[int]:
        return frozenset(pid for pid, pl in self.winner.items() if pl == player)


def lookahead_flags(space: ProductSpace, monitor_index: int, subset=None) -> frozenset[int]:
    """Product vertices whose own color step drives the monitor final.

    Because monitors are absorbing this is exactly "the play is doomed to
    have a prefix in the monitored language once it stands here".
    """
    dfa = space.monitors[monitor_index]
    base = space.base
    out = []
    pids = range(len(space.pairs)) if subset is None else sorted(subset)
    for pid in pids:
        pv = space.pairs[pid]
        q = pv.states[monitor_index]
        if dfa.step(q, base.gamma[pv.base]) in dfa.final:
            out.append(pid)
    return frozenset(out)


def _substitute_r(formula: Formula, index: int, value: bool) -> Formula:
    def repl(a):
        if isinstance(a, Var) and a.kind == "R" and a.index == index:
            return Const(value)
        return None
    return simplify(substitute(formula, repl))


def _constant_result(sub_arena: Arena, registry, value: bool):
    winners = {pid: (P1 if value else P2) for pid in sub_arena.vertices}
    choices = {pid: min(sub_arena.succ(pid)) for pid in sub_arena.vertices}
    s1 = PositionalStrategy(P1, registry, choices)
    s2 = PositionalStrategy(P2, registry, choices)
    return winners, s1, s2


def solve_combined(arena: Arena, cond: CombinedCondition, *,
                   monitor_order: Sequence[int] | None = None) -> SolveResult:
    """Solve a combined game; winners for every product vertex plus a
    stitched finite-memory strategy profile.

    ``monitor_order`` permutes the processing order of the regular atoms
    (last listed is handled first); the returned winner table is always
    keyed in the original monitor order.
    """
    registry = cond.registry
    require_valid(arena, registry)
    if monitor_order is not None:
        perm = list(monitor_order)
        if sorted(perm) != list(range(cond.l)):
            raise FormulaError("monitor_order must permute the monitor indices")
        cond2 = _permute_condition(cond, perm)
        result = solve_combined(arena, cond2)
        return _unpermute_result(result, arena, cond, perm)

    space = ProductSpace(arena, registry, cond.monitors)
    levels: list[dict] = []
    regions: list[RegionDecomposition] = []
    winners, s1, s2 = _solve_rec(space, frozenset(range(len(space.pairs))),
                                 cond.formula, cond, cond.l, levels, regions)
    profile = StrategyProfile(TrackedStrategy(space, s1), TrackedStrategy(space, s2))
    return SolveResult(arena, cond, space, winners, profile, (s1, s2),
                       levels, regions)


def _solve_rec(space: ProductSpace, subset: frozenset[int], formula: Formula,
               cond: CombinedCondition, active: int, levels, regions):
    registry = cond.registry
    sub_arena = restrict(space.arena, subset)
    fsim = simplify(formula)
    if isinstance(fsim, Const):
        winners, s1, s2 = _constant_result(sub_arena, registry, fsim.value)
        levels.append({"level": active, "size": len(subset), "kind": "constant",
                       "sizes": (s1.size, s2.size)})
        return winners, s1, s2
    if active == 0:
        el_formula = inline_el_atoms(
            CombinedCondition(cond.el_atoms, (), fsim, registry))
        res = solve_el(sub_arena, el_formula, registry)
        winners = {pid: (P1 if pid in res.win1 else P2) for pid in subset}
        levels.append({"level": 0, "size": len(subset), "kind": "el",
                       "sizes": (res.strategy1.size, res.strategy2.size)})
        return winners, res.strategy1, res.strategy2

    j = active - 1
    bot_formula = _substitute_r(fsim, j, False)
    win_bot, bot1, bot2 = _solve_rec(space, subset, bot_formula, cond, j,
                                     levels, regions)
    flagged = lookahead_flags(space, j, subset)
    dec = region_decompose(sub_arena, flagged, win_bot, level=active)
    regions.append(dec)

    if dec.vtop:
        top_formula = _substitute_r(fsim, j, True)
        win_top, top1, top2 = _solve_rec(space, dec.vtop, top_formula, cond, j,
                                         levels, regions)
    else:
        win_top, top1, top2 = {}, None, None

    winners: dict[int, int] = {}
    for pid in dec.s1 | dec.s1p:
        winners[pid] = P1
    for pid in dec.s2 | dec.s2p:
        winners[pid] = P2
    for pid in dec.vtop:
        winners[pid] = win_top[pid]

    s1 = _stitch_level(P1, registry, dec, bot1, top1)
    s2 = _stitch_level(P2, registry, dec, bot2, top2)
    levels.append({"level": active, "size": len(subset), "kind": "split",
                   "vtop": len(dec.vtop), "sizes": (s1.size, s2.size)})
    return winners, s1, s2


def _stitch_level(player: int, registry, dec: RegionDecomposition,
                  bot: MooreStrategy, top: MooreStrategy | None) -> MooreStrategy:
    """Region dispatch for one level: falsified region and the opponent's
    fringe follow the bottom profile, the own fringe follows the attractor
    witness, the remainder follows the top profile."""
    components = [bot]
    region: dict[int, int] = {}
    own_fringe = dec.s1p if player == P1 else dec.s2p
    other_fringe = dec.s2p if player == P1 else dec.s1p
    witness = dec.witness1 if player == P1 else dec.witness2
    for pid in dec.s1 | dec.s2 | other_fringe:
        region[pid] = 0
    if own_fringe:
        components.append(PositionalStrategy(player, registry, witness))
        for pid in own_fringe:
            region[pid] = len(components) - 1
    if dec.vtop:
        assert top is not None
        components.append(top)
        for pid in dec.vtop:
            region[pid] = len(components) - 1
    return DispatchStrategy(player, registry, region, components)


# ---------------------------------------------------------------------------
# Fast paths for single conjunctions / disjunctions
# ---------------------------------------------------------------------------

class LiftedBaseStrategy(MooreStrategy):
    """Adapter exposing a base-arena strategy on the product arena."""

    def __init__(self, space: ProductSpace, inner: MooreStrategy):
        self.space = space
        self.inner = inner
        self.owner = inner.owner
        self.registry = inner.registry
        self.size = inner.size
        self.initial = inner.initial

    def update(self, memory, color: int):
        return self.inner.update(memory, color)

    def next_action(self, memory, pid: int) -> int:
        pv = self.space.pairs[pid]
        target = self.inner.next_action(memory, pv.base)
        states = self.space.step_states(pv.states, self.space.base.gamma[pv.base])
        return self.space.id_of(target, states)


class PhaseStrategy(MooreStrategy):
    """Two-phase machine realizing the additive memory bound for the
    spoiling player in a single-disjunct game.

    Phase one runs only the monitor and forces flagged, base-losing
    vertices via a positional witness; once the monitor fires the machine
    switches to the base-game strategy started fresh (uniformity of that
    strategy makes the fresh start sound).  Memory is the disjoint union of
    the two state spaces.
    """

    def __init__(self, space: ProductSpace, witness: Mapping[int, int],
                 base_strategy: MooreStrategy):
        self.space = space
        self.witness = dict(witness)
        self.base_strategy = base_strategy
        self.owner = base_strategy.owner
        self.registry = base_strategy.registry
        self.size = space.monitors[0].num_states + base_strategy.size
        dfa = space.monitors[0]
        self.initial = ("w", base_strategy.initial) if dfa.initial in dfa.final \
            else ("f", dfa.initial)

    def seed(self, monitor_states):
        q = monitor_states[0]
        dfa = self.space.monitors[0]
        if q in dfa.final:
            return ("w", self.base_strategy.initial)
        return ("f", q)

    def update(self, memory, color: int):
        phase, st = memory
        if phase == "w":
            return ("w", self.base_strategy.update(st, color))
        dfa = self.space.monitors[0]
        q2 = dfa.step(st, color)
        if q2 in dfa.final:
            return ("w", self.base_strategy.update(self.base_strategy.initial, color))
        return ("f", q2)

    def next_action(self, memory, vertex: int) -> int:
        phase, st = memory
        if phase == "w":
            return self.base_strategy.next_action(st, vertex)
        dfa = self.space.monitors[0]
        if dfa.step(st, self.space.base.gamma[vertex]) in dfa.final:
            return self.base_strategy.next_action(self.base_strategy.initial, vertex)
        pid = self.space.id_of(vertex, (st,))
        if pid in self.witness:
            return self.space.base_of(self.witness[pid])
        return self.base_strategy.next_action(self.base_strategy.initial, vertex)


def _single_monitor_cond(cond: CombinedCondition) -> None:
    if cond.k != 1 or cond.l != 1:
        raise FormulaError("fast paths need exactly one EL atom and one monitor")


def conj_fast_path(arena: Arena, cond: CombinedCondition) -> SolveResult:
    """Single conjunction: EL objective AND no prefix in the monitored
    language.

    Player 2 wins exactly the attractor of the flagged product vertices;
    outside it the game is the plain EL game on the safe restriction.  The
    Player 1 strategy is the restricted EL strategy plus the monitor
    tracker, realizing the quadratic (tracker times base memory) bound.
    """
    _single_monitor_cond(cond)
    registry = cond.registry
    require_valid(arena, registry)
    space = ProductSpace(arena, registry, cond.monitors)
    all_pids = frozenset(range(len(space.pairs)))
    flagged = lookahead_flags(space, 0)
    a2 = attractor(space.arena, flagged, P2)
    safe = all_pids - a2.attracted

    winners = {pid: P2 for pid in a2.attracted}
    levels = [{"level": 1, "size": len(all_pids), "kind": "conj-fast"}]

    comps1: list[MooreStrategy] = []
    comps2: list[MooreStrategy] = []
    region1: dict[int, int] = {}
    region2: dict[int, int] = {}

    if safe:
        sub = restrict(space.arena, safe)
        res = solve_el(sub, cond.el_atoms[0], registry)
        for pid in safe:
            winners[pid] = P1 if pid in res.win1 else P2
        comps1.append(res.strategy1)
        comps2.append(res.strategy2)
        for pid in safe:
            region1[pid] = region2[pid] = 0
        levels.append({"level": 0, "size": len(safe), "kind": "el",
                       "sizes": (res.strategy1.size, res.strategy2.size)})

    if a2.attracted:
        lost = PositionalStrategy(
            P1, registry, {pid: min(space.arena.succ(pid)) for pid in a2.attracted})
        comps1.append(lost)
        for pid in a2.attracted:
            region1[pid] = len(comps1) - 1
        won = PositionalStrategy(
            P2, registry, {pid: min(space.arena.succ(pid)) for pid in flagged})
        comps2.append(won)
        for pid in flagged:
            region2[pid] = len(comps2) - 1
        fringe = a2.attracted - flagged
        if fringe:
            wit = PositionalStrategy(
                P2, registry, {v: w for v, w in a2.witness.items() if v in fringe})
            comps2.append(wit)
            for pid in fringe:
                region2[pid] = len(comps2) - 1

    s1 = DispatchStrategy(P1, registry, region1, comps1)
    s2 = DispatchStrategy(P2, registry, region2, comps2)
    profile = StrategyProfile(TrackedStrategy(space, s1), TrackedStrategy(space, s2))
    return SolveResult(arena, cond, space, winners, profile, (s1, s2),
                       levels, [], fast_path="conj")


def disj_fast_path(arena: Arena, cond: CombinedCondition) -> SolveResult:
    """Single disjunction: EL objective OR no prefix in the monitored
    language.

    Player 2 must force a flagged vertex whose base vertex they also win in
    the EL game; the attractor of those targets is their region.  Player 1
    wins everywhere else: stay inside the complement while unflagged, and
    switch to the base EL strategy once flagged (flagged vertices in the
    complement are always base-winning for Player 1).  The Player 2 machine
    is a two-phase strategy of additive size (monitor plus base memory).
    """
    _single_monitor_cond(cond)
    registry = cond.registry
    require_valid(arena, registry)
    base_res = solve_el(arena, cond.el_atoms[0], registry)
    space = ProductSpace(arena, registry, cond.monitors)
    all_pids = frozenset(range(len(space.pairs)))
    flagged = lookahead_flags(space, 0)
    target2 = frozenset(pid for pid in flagged
                        if space.base_of(pid) in base_res.win2)
    a2 = attractor(space.arena, target2, P2)
    safe = all_pids - a2.attracted

    winners = {pid: (P2 if pid in a2.attracted else P1) for pid in all_pids}

    # Player 1: preserve `safe` while unflagged, base EL strategy afterwards
    # (and anywhere lost, where the move only needs to be legal).
    lifted1 = LiftedBaseStrategy(space, base_res.strategy1)
    comps1: list[MooreStrategy] = [lifted1]
    region1 = {pid: 0 for pid in all_pids}
    stay = {}
    for pid in sorted(safe - flagged):
        if space.arena.owner(pid) == P1:
            inside = [w for w in space.arena.succ(pid) if w in safe]
            stay[pid] = min(inside)
    if stay:
        comps1.append(PositionalStrategy(P1, registry, stay))
        for pid in stay:
            region1[pid] = 1
    s1 = DispatchStrategy(P1, registry, region1, comps1)

    s2 = PhaseStrategy(space, {v: w for v, w in a2.witness.items()},
                       base_res.strategy2)

    profile = StrategyProfile(TrackedStrategy(space, s1), s2)
    levels = [{"level": 1, "size": len(all_pids), "kind": "disj-fast",
               "sizes": (profile.p1.size, profile.p2.size)}]
    return SolveResult(arena, cond, space, winners, profile,
                       (s1, LiftedBaseStrategy(space, s2)), levels, [],
                       fast_path="disj")


def detect_fast_path(cond: CombinedCondition) -> str | None:
    """Structural detection of W1 & R1 / W1 | R1 shapes (k = l = 1)."""
    if cond.k != 1 or cond.l != 1:
        return None
    f = simplify(cond.formula)
    w, r = Var("W", 0), Var("R", 0)
    if isinstance(f, And) and {f.left, f.right} == {w, r}:
        return "conj"
    if isinstance(f, Or) and {f.left, f.right} == {w, r}:
        return "disj"
    return None


# ---------------------------------------------------------------------------
# Closed-form memory calculators
# ---------------------------------------------------------------------------

def memory_bound(l: int, n: int, m: int, base: Callable[[int], int]) -> int:
    """The level-recursive memory bound, evaluated exactly.

    ``f(0, n) = base(n)`` and
    ``f(l, n) = m**n * f(l-1, n) * f(l-1, n * m**n)``.
    """
    if l < 0:
        raise ArenaError("level count must be non-negative")
    if n <= 0 or m <= 0:
        raise ArenaError("vertex and monitor counts must be positive")
    memo: dict[tuple[int, int], int] = {}

    def f(level: int, size: int) -> int:
        if level == 0:
            return int(base(size))
        key = (level, size)
        if key not in memo:
            grow = m ** size
            memo[key] = grow * f(level - 1, size) * f(level - 1, size * grow)
        return memo[key]

    return f(l, n)


def switching_bound(l: int, k: int, v: int) -> int:
    """Size of the strategy-switching construction: (2*l*k) ** ((k*v) ** (k*v)).

    Calculator only; the construction itself is not part of the solver.
    """
    if l <= 0 or k <= 0 or v <= 0:
        raise ArenaError("all arguments must be positive")
    return (2 * l * k) ** ((k * v) ** (k * v))


# ---------------------------------------------------------------------------
# Monitor-order plumbing
# ---------------------------------------------------------------------------

def _permute_condition(cond: CombinedCondition, perm: Sequence[int]) -> CombinedCondition:
    monitors = tuple(cond.monitors[i] for i in perm)
    inverse = {old: new for new, old in enumerate(perm)}

    def repl(a):
        if isinstance(a, Var) and a.kind == "R":
            return Var("R", inverse[a.index])
        return None
    return CombinedCondition(cond.el_atoms, monitors,
                             substitute(cond.formula, repl), cond.registry)


def _unpermute_result(result: SolveResult, arena: Arena, cond: CombinedCondition,
                      perm: Sequence[int]) -> SolveResult:
    """Re-key the winner table to the original monitor order; the profile
    keeps playing in the working order (it is equivalent, only its tracker
    components are permuted)."""
    space = ProductSpace(arena, cond.registry, cond.monitors)
    winners: dict[int, int] = {}
    for pid, player in result.winner.items():
        pv = result.space.vertex(pid)
        original = tuple(pv.states[perm.index(i)] for i in range(len(perm)))
        winners[space.id_of(pv.base, original)] = player
    return SolveResult(arena, cond, space, winners, result.profile,
                       result.product_strategies, result.levels,
                       result.regions, fast_path=result.fast_path)
