"""Colored two-player arenas and their structural operations.

An arena is a finite directed graph whose vertices are split between
Player 1 and Player 2, every vertex emits a color and has at least one
successor.  The two operations that matter downstream are restriction to a
vertex set and the product with a deterministic monitor; both preserve the
arena invariants and obey the algebraic laws exercised in the test suite
(idempotent restriction, associative products up to renaming, and
restriction commuting with products).

Everything here is immutable; vertex ids are non-negative integers and all
iteration is in ascending id order, so derived artifacts (DOT dumps, product
enumerations) are byte-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from elgames.errors import ArenaError, IncompleteDfaError, RestrictionError

P1 = 1
P2 = 2


class ColorRegistry:
    """The fixed universe of colors; a color is an index into ``names``."""

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if not names:
            raise ArenaError("a registry needs at least one color")
        if len(set(names)) != len(names):
            raise ArenaError("color labels must be unique")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, ColorRegistry) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"ColorRegistry({list(self.names)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ArenaError(f"unknown color {name!r}") from None

    def name(self, color: int) -> str:
        return self.names[color]

    def colors(self) -> range:
        return range(len(self.names))


class Arena:
    """A two-player colored arena.

    ``v1``/``v2`` partition the vertices, ``gamma`` maps every vertex to a
    color, and every vertex keeps at least one outgoing edge.  Successor
    lists are stored sorted.
    """

    def __init__(self, v1: Iterable[int], v2: Iterable[int],
                 edges: Iterable[tuple[int, int]], gamma: Mapping[int, int]):
        self.v1 = frozenset(v1)
        self.v2 = frozenset(v2)
        self.edges = frozenset((int(a), int(b)) for a, b in edges)
        self.gamma = dict(gamma)
        self.vertices = tuple(sorted(self.v1 | self.v2))
        succ: dict[int, list[int]] = {v: [] for v in self.vertices}
        for a, b in sorted(self.edges):
            if a in succ:
                succ[a].append(b)
        self._succ = {v: tuple(ws) for v, ws in succ.items()}

    def owner(self, v: int) -> int:
        if v in self.v1:
            return P1
        if v in self.v2:
            return P2
        raise ArenaError(f"vertex {v} not in arena")

    def succ(self, v: int) -> tuple[int, ...]:
        return self._succ[v]

    def __contains__(self, v: int) -> bool:
        return v in self.v1 or v in self.v2

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"Arena(|V|={len(self.vertices)}, |E|={len(self.edges)})"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    deadlocks: tuple[int, ...] = ()
    unknown_colors: tuple[int, ...] = ()
    ownership_overlap: tuple[int, ...] = ()
    dangling_edges: tuple[tuple[int, int], ...] = ()
    uncolored: tuple[int, ...] = ()

    def messages(self) -> list[str]:
        out = []
        if self.ownership_overlap:
            out.append(f"vertices owned by both players: {list(self.ownership_overlap)}")
        if self.dangling_edges:
            out.append(f"edges touching unknown vertices: {list(self.dangling_edges)}")
        if self.deadlocks:
            out.append(f"deadlock vertices (no successor): {list(self.deadlocks)}")
        if self.uncolored:
            out.append(f"vertices without a color: {list(self.uncolored)}")
        if self.unknown_colors:
            out.append(f"vertices with unregistered colors: {list(self.unknown_colors)}")
        return out


def validate_arena(arena: Arena, registry: ColorRegistry) -> ValidationReport:
    """Check all arena invariants against ``registry``; never raises."""
    overlap = tuple(sorted(arena.v1 & arena.v2))
    vertex_set = arena.v1 | arena.v2
    dangling = tuple(sorted(
        (a, b) for a, b in arena.edges if a not in vertex_set or b not in vertex_set))
    deadlocks = tuple(v for v in arena.vertices if not arena.succ(v))
    uncolored = tuple(v for v in arena.vertices if v not in arena.gamma)
    unknown = tuple(
        v for v in arena.vertices
        if v in arena.gamma and not (0 <= arena.gamma[v] < len(registry)))
    ok = not (overlap or dangling or deadlocks or uncolored or unknown)
    return ValidationReport(ok, deadlocks, unknown, overlap, dangling, uncolored)


def require_valid(arena: Arena, registry: ColorRegistry) -> None:
    report = validate_arena(arena, registry)
    if not report.ok:
        raise ArenaError("; ".join(report.messages()))


def restrict(arena: Arena, s: Iterable[int]) -> Arena:
    """Restriction to ``s``: keep vertices in ``s`` and edges inside ``s``.

    Requires every kept vertex to keep a successor; the first (smallest id)
    violating vertex is reported otherwise.
    """
    keep = frozenset(s)
    for v in sorted(keep):
        if v not in arena:
            raise ArenaError(f"restriction set mentions unknown vertex {v}")
    for v in sorted(keep):
        if not any(w in keep for w in arena.succ(v)):
            raise RestrictionError(v)
    return Arena(
        arena.v1 & keep,
        arena.v2 & keep,
        ((a, b) for a, b in arena.edges if a in keep and b in keep),
        {v: c for v, c in arena.gamma.items() if v in keep},
    )


@dataclass(frozen=True)
class ProductVertex:
    """A vertex of a product arena: base vertex plus one state per monitor."""
    base: int
    states: tuple[int, ...]


class ProductResult:
    """Product arena together with the id <-> ProductVertex correspondence."""

    def __init__(self, arena: Arena, pairs: Sequence[ProductVertex]):
        self.arena = arena
        self.pairs = tuple(pairs)
        self.index = {pv: i for i, pv in enumerate(self.pairs)}

    def vertex(self, i: int) -> ProductVertex:
        return self.pairs[i]

    def id_of(self, pv: ProductVertex) -> int:
        return self.index[pv]

    def base_of(self, i: int) -> int:
        return self.pairs[i].base


def product_arena(arena: Arena, dfa, *, full: bool = False) -> ProductResult:
    """Product of an arena with one complete monitor.

    Product vertices are (v, q); an edge ((v, q), (v', q')) exists iff
    (v, v') is an arena edge and q' is the monitor step on the color of the
    *source* vertex v.  Color and owner are inherited from v.  By default
    only pairs reachable from {(v, q0) : v in V} are materialized; ``full``
    materializes every pair (needed when every history matters).
    """
    _require_complete(dfa)
    return _product_multi(arena, [dfa], full=full)


def product_arena_multi(arena: Arena, dfas, *, full: bool = False) -> ProductResult:
    """Product with several monitors at once (states become tuples)."""
    for dfa in dfas:
        _require_complete(dfa)
    return _product_multi(arena, list(dfas), full=full)


def _require_complete(dfa) -> None:
    for q in range(dfa.num_states):
        for c in range(len(dfa.colors)):
            if dfa.step(q, c) is None:
                raise IncompleteDfaError(f"monitor lacks transition ({q}, color {c})")


def _product_multi(arena: Arena, dfas, *, full: bool) -> ProductResult:
    def step(states: tuple[int, ...], color: int) -> tuple[int, ...]:
        return tuple(d.step(q, color) for d, q in zip(dfas, states))

    initial = tuple(d.initial for d in dfas)
    if full:
        import itertools
        state_space = itertools.product(*(range(d.num_states) for d in dfas))
        pairs = [ProductVertex(v, tuple(qs))
                 for qs in state_space for v in arena.vertices]
    else:
        seen = {ProductVertex(v, initial) for v in arena.vertices}
        frontier = sorted(seen, key=lambda pv: (pv.base, pv.states))
        while frontier:
            nxt = []
            for pv in frontier:
                qs = step(pv.states, arena.gamma[pv.base])
                for w in arena.succ(pv.base):
                    cand = ProductVertex(w, qs)
                    if cand not in seen:
                        seen.add(cand)
                        nxt.append(cand)
            frontier = sorted(nxt, key=lambda pv: (pv.base, pv.states))
        pairs = list(seen)

    pairs.sort(key=lambda pv: (pv.base, pv.states))
    index = {pv: i for i, pv in enumerate(pairs)}
    v1, v2, edges, gamma = set(), set(), set(), {}
    for i, pv in enumerate(pairs):
        color = arena.gamma[pv.base]
        gamma[i] = color
        (v1 if arena.owner(pv.base) == P1 else v2).add(i)
        qs = step(pv.states, color)
        for w in arena.succ(pv.base):
            tgt = index.get(ProductVertex(w, qs))
            if tgt is not None:
                edges.add((i, tgt))
    prod = Arena(v1, v2, edges, gamma)
    return ProductResult(prod, pairs)


class ProductSpace:
    """Fully materialized product of an arena with a stack of monitors.

    This is the "tracker" used by the main solving construction: it can
    reconstruct the product vertex from a base vertex plus the tuple of
    monitor states, and it can advance that tuple on a color (totally, so
    hypothetical histories are covered).
    """

    def __init__(self, base: Arena, registry: ColorRegistry, monitors):
        self.base = base
        self.registry = registry
        self.monitors = tuple(monitors)
        prod = product_arena_multi(base, self.monitors, full=True) if self.monitors \
            else _product_multi(base, [], full=True)
        self.arena = prod.arena
        self.pairs = prod.pairs
        self._index = prod.index

    @property
    def initial_states(self) -> tuple[int, ...]:
        return tuple(d.initial for d in self.monitors)

    def step_states(self, states: tuple[int, ...], color: int) -> tuple[int, ...]:
        return tuple(d.step(q, color) for d, q in zip(self.monitors, states))

    def id_of(self, base_vertex: int, states: tuple[int, ...]) -> int:
        return self._index[ProductVertex(base_vertex, states)]

    def vertex(self, i: int) -> ProductVertex:
        return self.pairs[i]

    def base_of(self, i: int) -> int:
        return self.pairs[i].base

    def tracker_size(self) -> int:
        size = 1
        for d in self.monitors:
            size *= d.num_states
        return size


def arena_csr(arena: Arena):
    """Dense CSR encoding consumed by the solver kernel.

    Returns ``(ids, indptr, indices, rev_indptr, rev_indices, owner)`` where
    ``ids`` maps dense position -> original vertex id.
    """
    ids = list(arena.vertices)
    pos = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, v in enumerate(ids):
        indptr[i + 1] = indptr[i] + len(arena.succ(v))
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    k = 0
    for v in ids:
        for w in arena.succ(v):
            indices[k] = pos[w]
            k += 1
    rev_lists: list[list[int]] = [[] for _ in range(n)]
    for i, v in enumerate(ids):
        for w in arena.succ(v):
            rev_lists[pos[w]].append(i)
    rev_indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        rev_indptr[i + 1] = rev_indptr[i] + len(rev_lists[i])
    rev_indices = np.empty(int(rev_indptr[-1]), dtype=np.int64)
    k = 0
    for i in range(n):
        for u in sorted(rev_lists[i]):
            rev_indices[k] = u
            k += 1
    owner = np.fromiter((0 if arena.owner(v) == P1 else 1 for v in ids),
                        dtype=np.uint8, count=n)
    return ids, indptr, indices, rev_indptr, rev_indices, owner


def canonical_form(arena: Arena, roots: Iterable[int]):
    """Canonical encoding for isomorphism checks.

    Renames vertices by breadth-first discovery from the sorted ``roots``
    (least root first, successors explored in ascending id order) and
    returns a comparable structure over the new names.  Two arenas that are
    isomorphic via a renaming compatible with their root lists yield equal
    forms.
    """
    order: dict[int, int] = {}
    queue = sorted(set(roots))
    for r in queue:
        if r not in order:
            order[r] = len(order)
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for w in arena.succ(v):
            if w not in order:
                order[w] = len(order)
                queue.append(w)
    verts = sorted(order, key=order.get)
    return (
        tuple((order[v], arena.owner(v), arena.gamma[v]) for v in verts),
        tuple(sorted((order[a], order[b]) for a, b in arena.edges
                     if a in order and b in order)),
    )


def to_dot(arena: Arena, registry: ColorRegistry, name: str = "arena") -> str:
    """DOT dump: P1 circles, P2 diamonds, labels ``id:color``."""
    lines = [f"digraph {name} {{"]
    for v in arena.vertices:
        shape = "circle" if arena.owner(v) == P1 else "diamond"
        label = f"{v}:{registry.name(arena.gamma[v])}"
        lines.append(f'  n{v} [shape={shape}, label="{label}"];')
    for a, b in sorted(arena.edges):
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
