"""Base-case solver for Emerson-Lei conditions.

The route is classical: expand the arena with a latest-appearance record
over the colors the formula mentions, derive a max-parity game whose
priorities reflect the record's hit sets, solve it with Zielonka's
algorithm (through the selected kernel), and lift the positional parity
strategies back to uniform Moore strategies over the original arena.

Colors the formula does not mention cannot influence satisfaction but still
drive the memory, so they are funneled into one catch-all record slot; this
keeps every priority non-negative and the record total over the registry.

Two expansion modes exist: ``full`` pairs every vertex with every record
state (so the lifted strategies answer optimally after arbitrary, even
unrealizable, histories), ``reachable`` materializes only record states
reachable in the arena (used where only the winner table matters).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from elgames import _kernel
from elgames.arena import P1, P2, Arena, ColorRegistry, arena_csr
from elgames.conditions import Formula, colors_of, evaluate, Inf
from elgames.errors import (ArenaError, FormulaError,
                            InternalSoundnessError, SizeGuardError)
from elgames.strategies import MooreStrategy, StrategyProfile


@dataclass(frozen=True)
class ParityGame:
    """Arena plus a total, non-negative priority labeling (max-parity:
    Player 1 wins iff the highest priority seen infinitely often is even)."""
    arena: Arena
    priority: dict[int, int]

    def __post_init__(self):
        for v in self.arena.vertices:
            if v not in self.priority:
                raise ArenaError(f"priority missing for vertex {v}")
            if self.priority[v] < 0:
                raise ArenaError("priorities must be non-negative")


def zielonka(pg: ParityGame):
    """Exact winning regions with positional witness strategies.

    Returns ``(win1, win2, strategy1, strategy2)`` where the strategies are
    successor-choice maps defined on the owned part of each region.
    """
    ids, indptr, indices, rev_indptr, rev_indices, owner = arena_csr(pg.arena)
    priority = np.fromiter((pg.priority[v] for v in ids), dtype=np.int64,
                           count=len(ids))
    winner, strategy = _kernel.solve_parity(
        indptr, indices, rev_indptr, rev_indices, owner, priority)
    win1 = frozenset(ids[i] for i in range(len(ids)) if winner[i] == 0)
    win2 = frozenset(ids[i] for i in range(len(ids)) if winner[i] == 1)
    s1 = {ids[i]: ids[int(strategy[i])] for i in range(len(ids))
          if winner[i] == 0 and strategy[i] >= 0}
    s2 = {ids[i]: ids[int(strategy[i])] for i in range(len(ids))
          if winner[i] == 1 and strategy[i] >= 0}
    return win1, win2, s1, s2


# ---------------------------------------------------------------------------
# Latest-appearance records
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _record_closure(num_classes: int):
    """All appearance records reachable from the canonical initial one.

    A record is a permutation of the classes ordered by recency (most
    recent first); reading a class pulls it to the front.  The hit position
    of a step is derived from the record and the class read, so it is not
    part of the state.  Returns (states, index, updates, hits) where
    ``updates[state_id][cls]`` is the successor record and
    ``hits[state_id][cls]`` the position the class was pulled from.
    """
    initial = tuple(range(num_classes))
    states = [initial]
    index = {initial: 0}
    updates: list[tuple[int, ...]] = []
    hits: list[tuple[int, ...]] = []
    head = 0
    while head < len(states):
        perm = states[head]
        row = []
        hrow = []
        for cls in range(num_classes):
            p = perm.index(cls)
            nxt = (cls,) + perm[:p] + perm[p + 1:]
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            row.append(index[nxt])
            hrow.append(p)
        updates.append(tuple(row))
        hits.append(tuple(hrow))
        head += 1
    return tuple(states), index, tuple(updates), tuple(hits)


_FULL_CLASS_GUARD = 8


class _RecordSetup:
    """Per-formula record configuration: class mapping, record transitions
    and priorities.

    ``full=True`` materializes the whole record closure (factorial in the
    class count, guarded); ``full=False`` discovers records lazily, which is
    what keeps the monolithic oracle tractable when many extended colors
    exist but plays can only shuffle a few of them at a time.
    """

    def __init__(self, formula: Formula, registry: ColorRegistry, *,
                 full: bool):
        self.formula = formula
        self.registry = registry
        self.full = full
        self.relevant = tuple(sorted(colors_of(formula)))
        for c in self.relevant:
            if not 0 <= c < len(registry):
                raise FormulaError(f"formula mentions unknown color {c}")
        class_of = {c: i for i, c in enumerate(self.relevant)}
        catch_all = any(c not in class_of for c in registry.colors())
        self.num_classes = len(self.relevant) + (1 if catch_all else 0)
        self.cls = np.fromiter(
            (class_of.get(c, len(self.relevant)) for c in registry.colors()),
            dtype=np.int64, count=len(registry))
        self.initial_state = 0
        self._eval_cache: dict[frozenset[int], bool] = {}
        if full:
            if self.num_classes > _FULL_CLASS_GUARD:
                raise SizeGuardError(
                    f"full record closure over {self.num_classes} classes")
            states, index, updates, hits = _record_closure(self.num_classes)
            self.states: list = list(states)
            self.up = np.asarray(updates, dtype=np.int64).reshape(
                len(states), self.num_classes)
            self.num_states = len(states)
            prio = np.empty((len(states), self.num_classes), dtype=np.int64)
            for mid, perm in enumerate(states):
                for k in range(self.num_classes):
                    prio[mid, k] = self._transition_priority(perm, hits[mid][k], k)
            self.priority_table = prio
        else:
            initial = tuple(range(self.num_classes))
            self.states = [initial]
            self._index = {initial: 0}
            self._upd_memo: dict[tuple[int, int], int] = {}
            self._prio_memo: dict[tuple[int, int], int] = {}

    def _transition_priority(self, perm, hit_pos: int, cls: int) -> int:
        hit_set = frozenset((cls,) + perm[:hit_pos])
        if hit_set not in self._eval_cache:
            self._eval_cache[hit_set] = self._eval_on(hit_set)
        size = hit_pos + 1
        return 2 * size if self._eval_cache[hit_set] else 2 * size - 1

    def update(self, mid: int, cls: int) -> int:
        """Successor record id (lazy mode)."""
        key = (mid, cls)
        out = self._upd_memo.get(key)
        if out is None:
            perm = self.states[mid]
            p = perm.index(cls)
            nxt = (cls,) + perm[:p] + perm[p + 1:]
            out = self._index.get(nxt)
            if out is None:
                out = len(self.states)
                self._index[nxt] = out
                self.states.append(nxt)
            self._upd_memo[key] = out
        return out

    def step_priority(self, mid: int, cls: int) -> int:
        """Priority of reading ``cls`` in record ``mid`` (lazy mode)."""
        key = (mid, cls)
        out = self._prio_memo.get(key)
        if out is None:
            perm = self.states[mid]
            out = self._transition_priority(perm, perm.index(cls), cls)
            self._prio_memo[key] = out
        return out

    def _eval_on(self, hit_classes: frozenset[int]) -> bool:
        def env(a: Formula) -> bool:
            if isinstance(a, Inf):
                return int(self.cls[a.color]) in hit_classes
            raise FormulaError("EL solving requires a pure Inf formula")
        return evaluate(self.formula, env)


class LarExpansion:
    """Mapping between arena x record pairs and parity-game vertices."""

    def __init__(self, setup: _RecordSetup, base_ids: list[int], mode: str,
                 pair_of: list[tuple[int, int]], pid_lookup):
        self.setup = setup
        self.base_ids = base_ids
        self.mode = mode
        self.pairs = pair_of  # parity vertex -> (base position, record id)
        self._pid_lookup = pid_lookup

    def base_vertex(self, pid: int) -> int:
        return self.base_ids[self.pairs[pid][0]]

    def record_id(self, pid: int) -> int:
        return self.pairs[pid][1]

    def record_state(self, pid: int):
        return self.setup.states[self.pairs[pid][1]]

    def pid(self, vertex: int, record: int) -> int:
        return self._pid_lookup(vertex, record)

    def __len__(self) -> int:
        return len(self.pairs)


class _LarGame:
    """Array-level product of an arena with a record automaton."""

    def __init__(self, setup, base_ids, indptr, indices, owner, priority,
                 pairs, pid_lookup, mode):
        self.setup = setup
        self.base_ids = base_ids
        self.indptr = indptr
        self.indices = indices
        self.owner = owner
        self.priority = priority
        self.pairs = pairs
        self.pid_lookup = pid_lookup
        self.mode = mode
        self.n = len(pairs)

    def solve(self):
        rev_indptr, rev_indices = _reverse_csr(self.n, self.indptr, self.indices)
        return _kernel.solve_parity(self.indptr, self.indices,
                                    rev_indptr, rev_indices,
                                    self.owner, self.priority)

    def expansion(self) -> LarExpansion:
        return LarExpansion(self.setup, self.base_ids, self.mode,
                            self.pairs, self.pid_lookup)


def _reverse_csr(n, indptr, indices):
    counts = np.bincount(indices, minlength=n)
    rev_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=rev_indptr[1:])
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    rev_indices = src[order]
    return rev_indptr, rev_indices


def _build_full(arena: Arena, setup: _RecordSetup) -> _LarGame:
    base_ids, bindptr, bindices, _, _, bowner = arena_csr(arena)
    n_base = len(base_ids)
    m = setup.num_states
    cls_of_vertex = np.fromiter((setup.cls[arena.gamma[v]] for v in base_ids),
                                dtype=np.int64, count=n_base)
    bdeg = np.diff(bindptr)
    indptr = np.zeros(n_base * m + 1, dtype=np.int64)
    np.cumsum(np.repeat(bdeg, m), out=indptr[1:])
    blocks = []
    for upos in range(n_base):
        succ = bindices[bindptr[upos]:bindptr[upos + 1]]
        mprime = setup.up[:, cls_of_vertex[upos]]
        block = succ[None, :] * m + mprime[:, None]
        blocks.append(block.reshape(-1))
    indices = np.concatenate(blocks) if blocks else np.zeros(0, dtype=np.int64)
    owner = np.repeat(bowner, m)
    priority = setup.priority_table[:, cls_of_vertex].T.reshape(-1)
    pairs = [(upos, mid) for upos in range(n_base) for mid in range(m)]
    pos = {v: i for i, v in enumerate(base_ids)}

    def pid_lookup(vertex: int, record: int) -> int:
        return pos[vertex] * m + record

    return _LarGame(setup, base_ids, indptr, indices.astype(np.int64),
                    owner.astype(np.uint8), priority.astype(np.int64),
                    pairs, pid_lookup, "full")


def _build_reachable(arena: Arena, setup: _RecordSetup) -> _LarGame:
    base_ids = list(arena.vertices)
    pos = {v: i for i, v in enumerate(base_ids)}
    init = setup.initial_state
    pairs: list[tuple[int, int]] = [(pos[v], init) for v in base_ids]
    index = {p: i for i, p in enumerate(pairs)}
    succ_lists: list[list[int]] = []
    head = 0
    while head < len(pairs):
        upos, mid = pairs[head]
        head += 1
        v = base_ids[upos]
        nxt_mid = setup.update(mid, int(setup.cls[arena.gamma[v]]))
        row = []
        for w in arena.succ(v):
            key = (pos[w], nxt_mid)
            if key not in index:
                index[key] = len(pairs)
                pairs.append(key)
            row.append(index[key])
        succ_lists.append(row)
    n = len(pairs)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, row in enumerate(succ_lists):
        indptr[i + 1] = indptr[i] + len(row)
    indices = np.fromiter((t for row in succ_lists for t in row),
                          dtype=np.int64, count=int(indptr[-1]))
    owner = np.fromiter(
        (0 if arena.owner(base_ids[upos]) == P1 else 1 for upos, _ in pairs),
        dtype=np.uint8, count=n)
    priority = np.fromiter(
        (setup.step_priority(mid, int(setup.cls[arena.gamma[base_ids[upos]]]))
         for upos, mid in pairs),
        dtype=np.int64, count=n)

    def pid_lookup(vertex: int, record: int) -> int:
        return index[(pos[vertex], record)]

    return _LarGame(setup, base_ids, indptr, indices, owner, priority,
                    pairs, pid_lookup, "reachable")


def lar_expand(arena: Arena, formula: Formula, registry: ColorRegistry,
               memory: str = "reachable"):
    """Public record expansion: returns ``(ParityGame, LarExpansion)``.

    ``memory="reachable"`` materializes record states reachable in-arena;
    ``memory="full"`` pairs every vertex with every record state.
    """
    setup = _RecordSetup(formula, registry, full=(memory == "full"))
    game = _build_full(arena, setup) if memory == "full" else _build_reachable(arena, setup)
    v1, v2, edges, gamma, priority = set(), set(), set(), {}, {}
    for pid, (upos, mid) in enumerate(game.pairs):
        v = game.base_ids[upos]
        (v1 if arena.owner(v) == P1 else v2).add(pid)
        gamma[pid] = arena.gamma[v]
        priority[pid] = int(game.priority[pid])
    for pid in range(game.n):
        for e in range(int(game.indptr[pid]), int(game.indptr[pid + 1])):
            edges.add((pid, int(game.indices[e])))
    pg = ParityGame(Arena(v1, v2, edges, gamma), priority)
    return pg, game.expansion()


# ---------------------------------------------------------------------------
# Lifted strategies and the EL solver proper
# ---------------------------------------------------------------------------

class LarStrategy(MooreStrategy):
    """Moore strategy whose memory is the record automaton.

    Uniform: the underlying parity solve covers every (vertex, record)
    pair, so the answer is optimal after arbitrary histories.  Pairs won by
    the opponent fall back to the smallest successor.
    """

    def __init__(self, owner_player: int, registry: ColorRegistry,
                 setup: _RecordSetup, base_ids, pos, action, fallback):
        self.owner = owner_player
        self.registry = registry
        self.size = setup.num_states
        self.initial = 0
        self._setup = setup
        self._base_ids = base_ids
        self._pos = pos
        self._action = action  # np.int64[n_base * m], target pid or -1
        self._fallback = fallback  # smallest successor per base position
        self._m = setup.num_states

    def update(self, memory, color: int):
        return int(self._setup.up[memory, int(self._setup.cls[color])])

    def next_action(self, memory, vertex: int) -> int:
        upos = self._pos[vertex]
        target = int(self._action[upos * self._m + memory])
        if target >= 0:
            return self._base_ids[target // self._m]
        return self._fallback[upos]


@dataclass
class ElSolveResult:
    win1: frozenset[int]
    win2: frozenset[int]
    strategy1: MooreStrategy
    strategy2: MooreStrategy

    def profile(self) -> StrategyProfile:
        return StrategyProfile(self.strategy1, self.strategy2)

    def winner(self, v: int) -> int:
        return P1 if v in self.win1 else P2


def solve_el(arena: Arena, formula: Formula, registry: ColorRegistry) -> ElSolveResult:
    """Solve the EL game and lift uniform Moore strategies.

    Because the condition is prefix-independent the winner of a (vertex,
    record) pair does not depend on the record; this is asserted, and the
    winner table is projected to vertices.  The lifted strategies answer at
    every record state, making the pair a subgame-optimal profile under any
    history.
    """
    setup = _RecordSetup(formula, registry, full=True)
    game = _build_full(arena, setup)
    winner, strategy = game.solve()
    m = setup.num_states
    n_base = len(game.base_ids)
    wmat = np.asarray(winner, dtype=np.uint8).reshape(n_base, m)
    if not (wmat == wmat[:, :1]).all():
        raise InternalSoundnessError(
            "winner of a prefix-independent game depended on the record state")
    win1 = frozenset(game.base_ids[i] for i in range(n_base) if wmat[i, 0] == 0)
    win2 = frozenset(v for v in game.base_ids if v not in win1)

    pos = {v: i for i, v in enumerate(game.base_ids)}
    fallback = [min(arena.succ(v)) for v in game.base_ids]
    strategy = np.asarray(strategy, dtype=np.int64)
    act1 = np.where(np.asarray(winner) == 0, strategy, -1)
    act2 = np.where(np.asarray(winner) == 1, strategy, -1)
    s1 = LarStrategy(P1, registry, setup, game.base_ids, pos, act1, fallback)
    s2 = LarStrategy(P2, registry, setup, game.base_ids, pos, act2, fallback)
    return ElSolveResult(win1, win2, s1, s2)


@dataclass
class ElWinners:
    """Reachable-mode solve: winner table only, plus the raw arrays needed
    to extract witness lassos."""
    win1: frozenset[int]
    win2: frozenset[int]
    game: _LarGame
    winner: np.ndarray
    strategy: np.ndarray

    def winner_of(self, v: int) -> int:
        return P1 if v in self.win1 else P2


def el_winners(arena: Arena, formula: Formula, registry: ColorRegistry) -> ElWinners:
    """Winner table without strategy lifting (record states reachable
    in-arena only)."""
    setup = _RecordSetup(formula, registry, full=False)
    game = _build_reachable(arena, setup)
    winner, strategy = game.solve()
    win1 = set()
    for v in arena.vertices:
        pid = game.pid_lookup(v, setup.initial_state)
        if winner[pid] == 0:
            win1.add(v)
    win1 = frozenset(win1)
    win2 = frozenset(v for v in arena.vertices if v not in win1)
    return ElWinners(win1, win2, game, np.asarray(winner), np.asarray(strategy))


def extract_lasso(result: ElWinners, arena: Arena, start_vertex: int, side: int):
    """Walk the winning positional strategy of ``side`` (0 for P1) from the
    start vertex until the parity-game configuration repeats; returns the
    color lasso (stem, cycle)."""
    game = result.game
    pid = game.pid_lookup(start_vertex, game.setup.initial_state)
    seen: dict[int, int] = {}
    colors: list[int] = []
    while pid not in seen:
        seen[pid] = len(colors)
        upos, _ = game.pairs[pid]
        v = game.base_ids[upos]
        colors.append(arena.gamma[v])
        target = int(result.strategy[pid])
        if target < 0 or result.winner[pid] != side:
            # not this side's vertex to steer or outside its region: the
            # walk is only meaningful inside the winning region of `side`
            # where every vertex is side-owned (one-player usage)
            target = int(game.indices[game.indptr[pid]])
        pid = target
    k = seen[pid]
    return tuple(colors[:k]), tuple(colors[k:])
