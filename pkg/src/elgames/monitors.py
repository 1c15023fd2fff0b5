"""Complete DFAs over colors and the compilers producing them.

Monitors encode the regular part of a combined winning condition.  A
monitor *accepts* a finite color word when the constraint it watches has
been violated; the corresponding atom of the combined condition holds
exactly when the monitor never accepts any prefix of the play.  All
compilers therefore emit violation recognizers, complete and with absorbing
final states, so that acceptance of a prefix is permanent.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from elgames.arena import ColorRegistry
from elgames.errors import ArenaError, IncompleteDfaError, RegistryMismatchError


class MonitorDfa:
    """A complete DFA over the colors of a registry.

    ``delta`` is a full table: ``delta[state][color]`` is always defined,
    so completeness holds by construction.
    """

    def __init__(self, num_states: int, initial: int, final: Iterable[int],
                 delta: Sequence[Sequence[int]], colors: ColorRegistry):
        if num_states <= 0:
            raise IncompleteDfaError("a monitor needs at least one state")
        self.num_states = num_states
        self.initial = int(initial)
        self.final = frozenset(int(f) for f in final)
        self.delta = tuple(tuple(int(t) for t in row) for row in delta)
        self.colors = colors
        if not 0 <= self.initial < num_states:
            raise IncompleteDfaError("initial state out of range")
        if any(not 0 <= f < num_states for f in self.final):
            raise IncompleteDfaError("final state out of range")
        if len(self.delta) != num_states:
            raise IncompleteDfaError("transition table must have one row per state")
        for q, row in enumerate(self.delta):
            if len(row) != len(colors):
                raise IncompleteDfaError(f"state {q} missing transitions")
            for t in row:
                if not 0 <= t < num_states:
                    raise IncompleteDfaError(f"state {q} has transition out of range")

    def step(self, state: int, color: int) -> int:
        return self.delta[state][color]

    def is_absorbing(self) -> bool:
        return all(self.delta[f][c] in self.final
                   for f in self.final for c in range(len(self.colors)))

    def accepts(self, word: Iterable[int]) -> bool:
        return run_dfa(self, word) in self.final

    def __repr__(self) -> str:
        return (f"MonitorDfa(states={self.num_states}, initial={self.initial}, "
                f"final={sorted(self.final)})")


def run_dfa(dfa: MonitorDfa, word: Iterable[int]) -> int:
    """Extended transition function from the initial state; empty word
    returns the initial state."""
    state = dfa.initial
    ncolors = len(dfa.colors)
    for c in word:
        if not 0 <= c < ncolors:
            raise ArenaError(f"unknown color index {c}")
        state = dfa.delta[state][c]
    return state


def dfa_product(a: MonitorDfa, b: MonitorDfa, final_combiner: str = "and") -> MonitorDfa:
    """Synchronous product on the reachable part.

    ``final_combiner`` is ``"and"`` (both final) or ``"or"`` (either final).
    """
    if a.colors != b.colors:
        raise RegistryMismatchError("monitors use different color registries")
    if final_combiner not in ("and", "or"):
        raise ArenaError(f"unknown final combiner {final_combiner!r}")
    ncolors = len(a.colors)
    start = (a.initial, b.initial)
    order = [start]
    seen = {start: 0}
    head = 0
    while head < len(order):
        qa, qb = order[head]
        head += 1
        for c in range(ncolors):
            nxt = (a.delta[qa][c], b.delta[qb][c])
            if nxt not in seen:
                seen[nxt] = len(order)
                order.append(nxt)
    delta = []
    final = []
    for i, (qa, qb) in enumerate(order):
        delta.append([seen[(a.delta[qa][c], b.delta[qb][c])] for c in range(ncolors)])
        fa, fb = qa in a.final, qb in b.final
        if (fa and fb) if final_combiner == "and" else (fa or fb):
            final.append(i)
    return MonitorDfa(len(order), 0, final, delta, a.colors)


def make_absorbing(dfa: MonitorDfa) -> MonitorDfa:
    """Close final states under all colors.

    The result accepts exactly the words that have a prefix accepted by
    ``dfa``; once a final state is entered it is never left.
    """
    delta = [list(row) for row in dfa.delta]
    for f in dfa.final:
        for c in range(len(dfa.colors)):
            delta[f][c] = f
    return MonitorDfa(dfa.num_states, dfa.initial, dfa.final, delta, dfa.colors)


@dataclass(frozen=True)
class WeightMap:
    """Total map color -> integer energy delta."""
    weights: tuple[int, ...]
    colors: ColorRegistry

    @staticmethod
    def from_dict(d: Mapping[str, int], colors: ColorRegistry) -> "WeightMap":
        missing = [name for name in colors.names if name not in d]
        if missing:
            raise ArenaError(f"weight map missing colors: {missing}")
        return WeightMap(tuple(int(d[name]) for name in colors.names), colors)

    def weight(self, color: int) -> int:
        return self.weights[color]

    def max_abs(self) -> int:
        return max((abs(w) for w in self.weights), default=0)


def compile_battery_energy(weights: WeightMap, upper: int, *,
                           initial_level: int = 0, lower: int = 0) -> MonitorDfa:
    """Violation monitor for battery-like bounded energy.

    The running level is clamped at ``upper`` (excess charge is lost) and a
    word is accepted as soon as the level would drop below ``lower``.  Live
    states are the levels ``lower..upper`` plus one absorbing sink, hence
    exactly ``upper - lower + 2`` states.
    """
    return _energy_monitor(weights, upper, clamp=True,
                           initial_level=initial_level, lower=lower)


def compile_spillover_energy(weights: WeightMap, upper: int, *,
                             initial_level: int = 0, lower: int = 0) -> MonitorDfa:
    """Violation monitor for spill-over bounded energy.

    The exact running sum must stay within ``[lower, upper]``; leaving the
    interval on either side is a (permanent) violation.
    """
    return _energy_monitor(weights, upper, clamp=False,
                           initial_level=initial_level, lower=lower)


def _energy_monitor(weights: WeightMap, upper: int, *, clamp: bool,
                    initial_level: int, lower: int) -> MonitorDfa:
    if upper < lower:
        raise ArenaError("energy upper bound below lower bound")
    if not lower <= initial_level <= upper:
        raise ArenaError("initial energy level outside bounds")
    levels = list(range(lower, upper + 1))
    sink = len(levels)
    delta = []
    for level in levels:
        row = []
        for c in range(len(weights.colors)):
            nxt = level + weights.weight(c)
            if clamp:
                nxt = min(nxt, upper)
            if nxt < lower or nxt > upper:
                row.append(sink)
            else:
                row.append(nxt - lower)
        delta.append(row)
    delta.append([sink] * len(weights.colors))
    return MonitorDfa(len(levels) + 1, initial_level - lower, [sink], delta,
                      weights.colors)


def compile_window(weights: WeightMap, window: int) -> MonitorDfa:
    """Violation monitor for the fixed-window mean-payoff objective at
    threshold 0.

    A position is *bad* when all of its partial sums over the next
    ``window`` steps stay negative; the monitor accepts as soon as some bad
    position completes.  A window closes (harmlessly) as soon as its running
    sum reaches 0 or more.  States track the running sums of the currently
    open windows, one slot per age below ``window``.
    """
    if window < 1:
        raise ArenaError("window length must be at least 1")
    lam = window
    wmax = weights.max_abs()
    floor = -lam * max(wmax, 1)

    def step(state, w):
        # state: tuple of length lam-1, slot k = running sum of the window
        # of age k+1 (None once closed). Returns the new state or None for
        # a completed violation.
        fresh = w if w < 0 else None
        if lam == 1:
            return None if w < 0 else ()
        new = [None] * (lam - 1)
        new[0] = max(fresh, floor) if fresh is not None else None
        for k in range(lam - 1):
            s = state[k]
            if s is None:
                val = None
            else:
                s2 = s + w
                if s2 >= 0:
                    val = None
                elif k + 2 == lam:
                    return None
                else:
                    val = max(s2, floor)
            if k + 1 <= lam - 2:
                new[k + 1] = val
        return tuple(new)

    ncolors = len(weights.colors)
    start = tuple([None] * (lam - 1))
    order = [start]
    seen = {start: 0}
    rows = []
    head = 0
    while head < len(order):
        st = order[head]
        head += 1
        row = []
        for c in range(ncolors):
            nxt = step(st, weights.weight(c))
            if nxt is None:
                row.append(-1)  # placeholder for the sink
            else:
                if nxt not in seen:
                    seen[nxt] = len(order)
                    order.append(nxt)
                row.append(seen[nxt])
        rows.append(row)
    sink = len(order)
    delta = [[sink if t == -1 else t for t in row] for row in rows]
    delta.append([sink] * ncolors)
    return MonitorDfa(len(order) + 1, 0, [sink], delta, weights.colors)


def compile_color_reach(bad: Iterable[int], colors: ColorRegistry) -> MonitorDfa:
    """Accepts every word containing a color from ``bad`` (safety violation)."""
    bad_set = frozenset(bad)
    for c in bad_set:
        if not 0 <= c < len(colors):
            raise ArenaError(f"unknown color index {c}")
    delta = [
        [1 if c in bad_set else 0 for c in range(len(colors))],
        [1] * len(colors),
    ]
    return MonitorDfa(2, 0, [1], delta, colors)


def compile_color_safety(bad: Iterable[int], colors: ColorRegistry) -> MonitorDfa:
    """Absorbing form of the reach monitor; same language."""
    return make_absorbing(compile_color_reach(bad, colors))
