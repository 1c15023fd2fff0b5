"""Moore-machine strategies, profiles, simulation and stitching.

A strategy reads the color history through a deterministic memory update
(total over *all* registered colors, so even histories that could never
happen in the arena leave the machine in a defined state) and picks a
successor from the memory state and the current owned vertex.

Strategies synthesized by the solver are compositions: per-region machines
combined by a dispatch over product vertices, wrapped at the top level with
a tracker that follows the monitor states.  Memory is evaluated lazily;
``size`` is the declared state count used for the memory-bound checks, not
the number of states a particular play happens to visit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from elgames.arena import P1, P2, Arena, ColorRegistry, ProductSpace
from elgames.conditions import Lasso
from elgames.errors import StrategyError


class MooreStrategy:
    """Interface: ``update`` total on colors, ``next_action`` on owned
    vertices of the arena the strategy plays on."""

    owner: int
    size: int
    initial: object
    registry: ColorRegistry

    def update(self, memory, color: int):
        raise NotImplementedError

    def next_action(self, memory, vertex: int) -> int:
        raise NotImplementedError

    def seed(self, monitor_states: tuple[int, ...]):
        """Memory to start from when play begins with monitors already at
        ``monitor_states``; plain strategies ignore the hint."""
        return self.initial

    def run_update(self, history: Iterable[int]):
        m = self.initial
        for c in history:
            m = self.update(m, c)
        return m


def moore_answer(strategy: MooreStrategy, history: Sequence[int], vertex: int) -> int:
    """The move after an arbitrary color history, realizable or not."""
    return strategy.next_action(strategy.run_update(history), vertex)


class TableStrategy(MooreStrategy):
    """Fully tabulated Moore machine (the serialization target)."""

    def __init__(self, owner: int, registry: ColorRegistry, size: int, initial,
                 update_table: Mapping, action_table: Mapping):
        self.owner = owner
        self.registry = registry
        self.size = size
        self.initial = initial
        self._update = dict(update_table)
        self._action = dict(action_table)

    def update(self, memory, color: int):
        try:
            return self._update[(memory, color)]
        except KeyError:
            raise StrategyError(f"no update for memory {memory} on color {color}") from None

    def next_action(self, memory, vertex: int) -> int:
        try:
            return self._action[(memory, vertex)]
        except KeyError:
            raise StrategyError(f"no action for vertex {vertex} (memory {memory})") from None

    def actions(self) -> dict:
        return dict(self._action)


class PositionalStrategy(MooreStrategy):
    """Memoryless strategy given by a choice table over owned vertices."""

    def __init__(self, owner: int, registry: ColorRegistry, choices: Mapping[int, int]):
        self.owner = owner
        self.registry = registry
        self.size = 1
        self.initial = 0
        self.choices = dict(choices)

    def update(self, memory, color: int):
        return 0

    def next_action(self, memory, vertex: int) -> int:
        try:
            return self.choices[vertex]
        except KeyError:
            raise StrategyError(f"no choice for vertex {vertex}") from None


class DispatchStrategy(MooreStrategy):
    """Region-dispatch composition over the vertices of one arena.

    Memory is the tuple of component memories, all advanced on every step;
    the action is delegated to the component owning the current vertex's
    region.
    """

    def __init__(self, owner: int, registry: ColorRegistry,
                 region: Mapping[int, int], components: Sequence[MooreStrategy]):
        self.owner = owner
        self.registry = registry
        self.region = dict(region)
        self.components = tuple(components)
        self.size = 1
        for c in self.components:
            self.size *= c.size
        self.initial = tuple(c.initial for c in self.components)

    def update(self, memory, color: int):
        return tuple(c.update(m, color) for c, m in zip(self.components, memory))

    def next_action(self, memory, vertex: int) -> int:
        try:
            slot = self.region[vertex]
        except KeyError:
            raise StrategyError(f"vertex {vertex} outside the dispatch domain") from None
        return self.components[slot].next_action(memory[slot], vertex)


class TrackedStrategy(MooreStrategy):
    """Base-arena wrapper around a product-arena strategy.

    Keeps the tuple of monitor states in memory, reconstructs the product
    vertex from (base vertex, tracked states) and projects the inner answer
    back to the base arena.
    """

    def __init__(self, space: ProductSpace, inner: MooreStrategy):
        self.space = space
        self.inner = inner
        self.owner = inner.owner
        self.registry = space.registry
        self.size = space.tracker_size() * inner.size
        self.initial = (space.initial_states, inner.initial)

    def seed(self, monitor_states: tuple[int, ...]):
        return (tuple(monitor_states), self.inner.initial)

    def update(self, memory, color: int):
        states, m = memory
        return (self.space.step_states(states, color), self.inner.update(m, color))

    def next_action(self, memory, vertex: int) -> int:
        states, m = memory
        pid = self.space.id_of(vertex, states)
        target = self.inner.next_action(m, pid)
        return self.space.base_of(target)


class OverrideStrategy(MooreStrategy):
    """Wrapper flipping selected actions; used for mutation testing."""

    def __init__(self, inner: MooreStrategy, overrides: Mapping[tuple, int]):
        self.inner = inner
        self.owner = inner.owner
        self.registry = inner.registry
        self.size = inner.size
        self.initial = inner.initial
        self.overrides = dict(overrides)

    def seed(self, monitor_states):
        return self.inner.seed(monitor_states)

    def update(self, memory, color: int):
        return self.inner.update(memory, color)

    def next_action(self, memory, vertex: int) -> int:
        key = (memory, vertex)
        if key in self.overrides:
            return self.overrides[key]
        return self.inner.next_action(memory, vertex)


@dataclass(frozen=True)
class StrategyProfile:
    p1: MooreStrategy
    p2: MooreStrategy

    def __post_init__(self):
        if self.p1.owner != P1 or self.p2.owner != P2:
            raise StrategyError("profile strategies must be owned by P1 and P2")

    def strategy_for(self, player: int) -> MooreStrategy:
        return self.p1 if player == P1 else self.p2

    def size(self) -> int:
        return self.p1.size + self.p2.size


def simulate_to_lasso(profile: StrategyProfile, arena: Arena, start: int,
                      prefix: Sequence[int] = (), max_steps: int | None = None) -> Lasso:
    """Deterministic play induced by the profile from ``start`` after the
    color history ``prefix``; returns its stem/cycle color decomposition.

    The configuration (vertex, both memories) repeats within the product of
    the state counts, so termination is by pigeonhole; ``max_steps`` can cap
    the search anyway.
    """
    m1 = profile.p1.run_update(prefix)
    m2 = profile.p2.run_update(prefix)
    v = start
    seen: dict = {}
    colors: list[int] = []
    while True:
        config = (v, m1, m2)
        if config in seen:
            k = seen[config]
            return Lasso(tuple(colors[:k]), tuple(colors[k:]))
        if max_steps is not None and len(colors) >= max_steps:
            raise StrategyError(f"no configuration repeat within {max_steps} steps")
        seen[config] = len(colors)
        c = arena.gamma[v]
        mover = profile.p1 if arena.owner(v) == P1 else profile.p2
        nxt = mover.next_action(m1 if arena.owner(v) == P1 else m2, v)
        m1 = profile.p1.update(m1, c)
        m2 = profile.p2.update(m2, c)
        colors.append(c)
        v = nxt


def stitch_regional(dispatch: Mapping[int, str],
                    region_strategies: Mapping[str, MooreStrategy],
                    tracker: ProductSpace) -> MooreStrategy:
    """Combine per-region strategies into one base-arena Moore machine.

    ``dispatch`` assigns a region tag to every product-vertex id of
    ``tracker``; the composite keeps the monitor states in memory, finds the
    current product vertex, and delegates to the strategy of its region.
    The composite size is the tracker size times the product of the region
    strategy sizes.
    """
    tags = sorted(region_strategies)
    if not tags:
        raise StrategyError("at least one region strategy required")
    owners = {region_strategies[t].owner for t in tags}
    if len(owners) != 1:
        raise StrategyError("region strategies must share one owner")
    slot = {t: i for i, t in enumerate(tags)}
    region = {pid: slot[tag] for pid, tag in dispatch.items()}
    inner = DispatchStrategy(owners.pop(), tracker.registry, region,
                             [region_strategies[t] for t in tags])
    return TrackedStrategy(tracker, inner)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def reachable_memory(strategy: MooreStrategy) -> list:
    """Memory states reachable from the initial one under all colors, in
    breadth-first discovery order (colors in ascending index order)."""
    order = [strategy.initial]
    seen = {_memkey(strategy.initial)}
    head = 0
    while head < len(order):
        m = order[head]
        head += 1
        for c in range(len(strategy.registry)):
            nxt = strategy.update(m, c)
            key = _memkey(nxt)
            if key not in seen:
                seen.add(key)
                order.append(nxt)
    return order


def _memkey(memory):
    return repr(memory)


def export_strategy(strategy: MooreStrategy, arena: Arena) -> str:
    """Line-oriented table: update rows for every reachable memory state and
    every color, action rows for every owned vertex."""
    states = reachable_memory(strategy)
    sid = {_memkey(m): i for i, m in enumerate(states)}
    owned = [v for v in arena.vertices if arena.owner(v) == strategy.owner]
    lines = [
        "elgames-strategy v1",
        f"owner {strategy.owner}",
        "colors " + " ".join(strategy.registry.names),
        f"memory {len(states)}",
        "initial 0",
    ]
    for i, m in enumerate(states):
        for c in range(len(strategy.registry)):
            j = sid[_memkey(strategy.update(m, c))]
            lines.append(f"update {i} {strategy.registry.name(c)} {j}")
    for i, m in enumerate(states):
        for v in owned:
            lines.append(f"action {i} {v} {strategy.next_action(m, v)}")
    return "\n".join(lines) + "\n"


def parse_strategy(text: str, registry: ColorRegistry) -> TableStrategy:
    owner = None
    size = None
    initial = None
    update_table: dict = {}
    action_table: dict = {}
    colors: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        head = parts[0]
        try:
            if head == "elgames-strategy":
                continue
            elif head == "owner":
                owner = int(parts[1])
            elif head == "colors":
                colors = parts[1:]
            elif head == "memory":
                size = int(parts[1])
            elif head == "initial":
                initial = int(parts[1])
            elif head == "update":
                m, cname, m2 = parts[1], parts[2], parts[3]
                update_table[(int(m), registry.index(cname))] = int(m2)
            elif head == "action":
                m, v, w = parts[1], parts[2], parts[3]
                action_table[(int(m), int(v))] = int(w)
            else:
                raise StrategyError(f"unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            raise StrategyError(f"bad strategy line {lineno}: {raw!r}") from exc
    if owner not in (P1, P2) or size is None or initial is None:
        raise StrategyError("strategy file missing owner/memory/initial")
    if colors is not None and tuple(colors) != registry.names:
        raise StrategyError("strategy color list does not match the game registry")
    return TableStrategy(owner, registry, size, initial, update_table, action_table)


def strategy_to_dot(strategy: MooreStrategy, name: str = "memory") -> str:
    """DOT dump of the memory-state graph (reachable part)."""
    states = reachable_memory(strategy)
    sid = {_memkey(m): i for i, m in enumerate(states)}
    lines = [f"digraph {name} {{"]
    for i in range(len(states)):
        shape = "doublecircle" if i == 0 else "circle"
        lines.append(f'  m{i} [shape={shape}, label="{i}"];')
    for i, m in enumerate(states):
        for c in range(len(strategy.registry)):
            j = sid[_memkey(strategy.update(m, c))]
            lines.append(f'  m{i} -> m{j} [label="{strategy.registry.name(c)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
