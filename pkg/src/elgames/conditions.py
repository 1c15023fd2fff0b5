"""Winning-condition representations.

Three layers live here:

* a small propositional formula AST whose atoms are either ``Inf(color)``
  ("this color occurs infinitely often") or indexed variables,
* combined conditions: a formula over k Emerson-Lei atoms (variables
  ``W1..Wk``) and l prefix-avoidance atoms of regular languages (variables
  ``R1..Rl``, each backed by an absorbing violation monitor; ``Ri`` holds
  iff monitor i never accepts a prefix of the play),
* the multi-dimension bounded-energy Muller front-end, which compiles
  vertex-labeled instances down to a combined condition by recoloring each
  vertex with its own identity.

Ultimately periodic plays are represented as lassos (stem + cycle) and all
conditions can be evaluated on them exactly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from elgames.arena import Arena, ColorRegistry
from elgames.errors import ArenaError, FormulaError, RegistryMismatchError
from elgames.monitors import (MonitorDfa, WeightMap, compile_battery_energy,
                              compile_spillover_energy)


# ---------------------------------------------------------------------------
# Formula AST
# ---------------------------------------------------------------------------

class Formula:
    """Base class; concrete nodes are frozen dataclasses below."""

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Inf(Formula):
    color: int


@dataclass(frozen=True)
class Var(Formula):
    kind: str  # "W", "R" for combined conditions; "x", "y", "z" up front
    index: int  # 0-based


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


TRUE = Const(True)
FALSE = Const(False)


def evaluate(f: Formula, env: Callable[[Formula], bool]) -> bool:
    """Evaluate with ``env`` deciding every Inf/Var atom."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, (Inf, Var)):
        return env(f)
    if isinstance(f, Not):
        return not evaluate(f.child, env)
    if isinstance(f, And):
        return evaluate(f.left, env) and evaluate(f.right, env)
    if isinstance(f, Or):
        return evaluate(f.left, env) or evaluate(f.right, env)
    raise FormulaError(f"unknown formula node {f!r}")


def atoms(f: Formula):
    if isinstance(f, (Inf, Var)):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.child)
    elif isinstance(f, (And, Or)):
        yield from atoms(f.left)
        yield from atoms(f.right)


def colors_of(f: Formula) -> frozenset[int]:
    return frozenset(a.color for a in atoms(f) if isinstance(a, Inf))


def vars_of(f: Formula, kind: str) -> frozenset[int]:
    return frozenset(a.index for a in atoms(f) if isinstance(a, Var) and a.kind == kind)


def substitute(f: Formula, repl: Callable[[Formula], Formula | None]) -> Formula:
    """Rewrite atoms; ``repl`` returns None to keep an atom unchanged."""
    if isinstance(f, (Inf, Var)):
        out = repl(f)
        return f if out is None else out
    if isinstance(f, Not):
        return Not(substitute(f.child, repl))
    if isinstance(f, And):
        return And(substitute(f.left, repl), substitute(f.right, repl))
    if isinstance(f, Or):
        return Or(substitute(f.left, repl), substitute(f.right, repl))
    return f


def simplify(f: Formula) -> Formula:
    """Syntactic constant folding only; no normal forms."""
    if isinstance(f, Not):
        c = simplify(f.child)
        if isinstance(c, Const):
            return Const(not c.value)
        return Not(c)
    if isinstance(f, And):
        a, b = simplify(f.left), simplify(f.right)
        if isinstance(a, Const):
            return b if a.value else FALSE
        if isinstance(b, Const):
            return a if b.value else FALSE
        return And(a, b)
    if isinstance(f, Or):
        a, b = simplify(f.left), simplify(f.right)
        if isinstance(a, Const):
            return TRUE if a.value else b
        if isinstance(b, Const):
            return TRUE if b.value else a
        return Or(a, b)
    return f


def conjunction(parts: Iterable[Formula]) -> Formula:
    out: Formula | None = None
    for p in parts:
        out = p if out is None else And(out, p)
    return TRUE if out is None else out


def disjunction(parts: Iterable[Formula]) -> Formula:
    out: Formula | None = None
    for p in parts:
        out = p if out is None else Or(out, p)
    return FALSE if out is None else out


def format_formula(f: Formula, atom_str: Callable[[Formula], str]) -> str:
    """Render with precedence ``!`` > ``&`` > ``|``."""
    def go(g: Formula, parent: int) -> str:
        if isinstance(g, Const):
            return "true" if g.value else "false"
        if isinstance(g, (Inf, Var)):
            return atom_str(g)
        if isinstance(g, Not):
            return "!" + go(g.child, 3)
        if isinstance(g, And):
            # the parser associates left, so right operands need one more
            # level to round-trip the tree exactly
            s = go(g.left, 2) + " & " + go(g.right, 3)
            return f"({s})" if parent > 2 else s
        if isinstance(g, Or):
            s = go(g.left, 1) + " | " + go(g.right, 2)
            return f"({s})" if parent > 1 else s
        raise FormulaError(f"unknown formula node {g!r}")
    return go(f, 0)


def default_atom_str(registry: ColorRegistry | None = None) -> Callable[[Formula], str]:
    def fmt(a: Formula) -> str:
        if isinstance(a, Inf):
            if registry is not None:
                return f"Inf({registry.name(a.color)})"
            return f"Inf({a.color})"
        assert isinstance(a, Var)
        return f"{a.kind}{a.index + 1}"
    return fmt


_TOKEN = re.compile(r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<and>&)|(?P<or>\|)|"
                    r"(?P<not>!)|(?P<word>[A-Za-z_][A-Za-z0-9_*+-]*))")


def parse_formula(text: str, atom_parser: Callable[[str, "_Tokens"], Formula]) -> Formula:
    """Recursive-descent parser for the surface grammar.

    Operators ``!`` > ``&`` > ``|``, parentheses, constants ``true`` and
    ``false``; atoms are delegated to ``atom_parser`` (which may consume a
    parenthesized argument, as ``Inf(color)`` does).
    """
    toks = _Tokens(text)
    f = _parse_or(toks, atom_parser)
    if toks.peek() is not None:
        raise FormulaError(f"trailing input at {toks.rest()!r}")
    return f


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: tuple[str, str] | None = None

    def peek(self):
        if self._peeked is None:
            self._peeked = self._advance()
        return self._peeked

    def next(self):
        t = self.peek()
        self._peeked = None
        return t

    def rest(self) -> str:
        return self.text[self.pos:]

    def _advance(self):
        if self.pos >= len(self.text) or not self.text[self.pos:].strip():
            return None
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise FormulaError(f"cannot tokenize {self.text[self.pos:]!r}")
        self.pos = m.end()
        for kind in ("lpar", "rpar", "and", "or", "not", "word"):
            if m.group(kind):
                return (kind, m.group(kind))
        raise FormulaError("tokenizer error")

    def expect(self, kind: str):
        t = self.next()
        if t is None or t[0] != kind:
            raise FormulaError(f"expected {kind}, found {t}")
        return t


def _parse_or(toks, atom_parser) -> Formula:
    f = _parse_and(toks, atom_parser)
    while toks.peek() is not None and toks.peek()[0] == "or":
        toks.next()
        f = Or(f, _parse_and(toks, atom_parser))
    return f


def _parse_and(toks, atom_parser) -> Formula:
    f = _parse_not(toks, atom_parser)
    while toks.peek() is not None and toks.peek()[0] == "and":
        toks.next()
        f = And(f, _parse_not(toks, atom_parser))
    return f


def _parse_not(toks, atom_parser) -> Formula:
    t = toks.peek()
    if t is not None and t[0] == "not":
        toks.next()
        return Not(_parse_not(toks, atom_parser))
    return _parse_atom(toks, atom_parser)


def _parse_atom(toks, atom_parser) -> Formula:
    t = toks.next()
    if t is None:
        raise FormulaError("unexpected end of formula")
    kind, text = t
    if kind == "lpar":
        f = _parse_or(toks, atom_parser)
        toks.expect("rpar")
        return f
    if kind == "word":
        if text == "true":
            return TRUE
        if text == "false":
            return FALSE
        return atom_parser(text, toks)
    raise FormulaError(f"unexpected token {text!r}")


def var_atom_parser(counts: Mapping[str, int]) -> Callable[[str, _Tokens], Formula]:
    """Atoms ``W1..Wk``, ``R1..Rl`` (or x/y/z families) with 1-based indices."""
    def parse(word: str, toks: _Tokens) -> Formula:
        m = re.fullmatch(r"([A-Za-z]+)(\d+)", word)
        if not m or m.group(1) not in counts:
            raise FormulaError(f"unknown atom {word!r}")
        kind, idx = m.group(1), int(m.group(2)) - 1
        if not 0 <= idx < counts[kind]:
            raise FormulaError(f"variable {word} out of range (have {counts[kind]})")
        return Var(kind, idx)
    return parse


def inf_atom_parser(registry: ColorRegistry) -> Callable[[str, _Tokens], Formula]:
    """Atoms ``Inf(colorname)``."""
    def parse(word: str, toks: _Tokens) -> Formula:
        if word != "Inf":
            raise FormulaError(f"unknown atom {word!r} (expected Inf(color))")
        toks.expect("lpar")
        name = toks.expect("word")[1]
        toks.expect("rpar")
        return Inf(registry.index(name))
    return parse


# ---------------------------------------------------------------------------
# Emerson-Lei front-ends
# ---------------------------------------------------------------------------

def parity_to_el(priorities: Mapping[int, int], registry: ColorRegistry) -> Formula:
    """EL formula of a max-parity condition on colors.

    True exactly on plays whose maximal infinitely-occurring priority is
    even: a disjunction, over the even priorities in use, of "some color of
    this priority recurs and no color of any higher priority does".
    """
    for c in registry.colors():
        if c not in priorities:
            raise FormulaError(f"priority missing for color {registry.name(c)}")
        if priorities[c] < 0:
            raise FormulaError("priorities must be non-negative")
    used = sorted(set(priorities[c] for c in registry.colors()))
    parts = []
    for d in used:
        if d % 2 != 0:
            continue
        here = disjunction(Inf(c) for c in registry.colors() if priorities[c] == d)
        above = disjunction(Inf(c) for c in registry.colors() if priorities[c] > d)
        parts.append(And(here, Not(above)))
    return simplify(disjunction(parts))


def muller_to_el(families: Sequence[Iterable[int]], registry: ColorRegistry) -> Formula:
    """EL formula of a Muller condition: the set of colors seen infinitely
    often equals one of the given families."""
    parts = []
    for fam in families:
        fam_set = frozenset(fam)
        for c in fam_set:
            if not 0 <= c < len(registry):
                raise ArenaError(f"unknown color index {c}")
        inside = conjunction(Inf(c) for c in sorted(fam_set))
        outside = conjunction(Not(Inf(c)) for c in registry.colors() if c not in fam_set)
        parts.append(And(inside, outside))
    return simplify(disjunction(parts))


# ---------------------------------------------------------------------------
# Lassos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lasso:
    """Finite description of an ultimately periodic play: stem then cycle
    repeated forever. The cycle must be nonempty."""
    stem: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ArenaError("lasso cycle must be nonempty")

    def format(self, registry: ColorRegistry) -> str:
        stem = " ".join(registry.name(c) for c in self.stem)
        cycle = " ".join(registry.name(c) for c in self.cycle)
        return f"{stem} | {cycle}".strip()


def eval_el_lasso(f: Formula, lasso: Lasso) -> bool:
    """EL formulas are prefix-independent: only the cycle's color set counts."""
    infs = frozenset(lasso.cycle)

    def env(a: Formula) -> bool:
        if isinstance(a, Inf):
            return a.color in infs
        raise FormulaError("variable atom in a pure EL formula")
    return evaluate(f, env)


def monitor_avoids_lasso(dfa: MonitorDfa, lasso: Lasso) -> bool:
    """True iff the monitor never accepts any prefix of stem + cycle^omega.

    Decided by running the cycle until the state at a cycle boundary
    repeats (at most ``num_states`` iterations).
    """
    state = dfa.initial
    if state in dfa.final:
        return False
    for c in lasso.stem:
        state = dfa.step(state, c)
        if state in dfa.final:
            return False
    seen_boundaries = {state}
    while True:
        for c in lasso.cycle:
            state = dfa.step(state, c)
            if state in dfa.final:
                return False
        if state in seen_boundaries:
            return True
        seen_boundaries.add(state)


# ---------------------------------------------------------------------------
# Combined conditions
# ---------------------------------------------------------------------------

class CombinedCondition:
    """A formula over W1..Wk (EL atoms) and R1..Rl (regular atoms).

    ``Ri`` holds on a play iff monitor i, an absorbing violation
    recognizer, accepts no prefix of the play.
    """

    def __init__(self, el_atoms: Sequence[Formula], monitors: Sequence[MonitorDfa],
                 formula: Formula, registry: ColorRegistry):
        self.el_atoms = tuple(el_atoms)
        self.monitors = tuple(monitors)
        self.formula = formula
        self.registry = registry
        self._validate()

    @property
    def k(self) -> int:
        return len(self.el_atoms)

    @property
    def l(self) -> int:
        return len(self.monitors)

    def _validate(self) -> None:
        for dfa in self.monitors:
            if dfa.colors != self.registry:
                raise RegistryMismatchError("monitor registry differs from condition registry")
            if not dfa.is_absorbing():
                raise ArenaError("combined conditions require absorbing monitors")
        for a in atoms(self.formula):
            if isinstance(a, Inf):
                raise FormulaError("combined formula must use W/R variables, not Inf")
            assert isinstance(a, Var)
            if a.kind == "W":
                if not 0 <= a.index < self.k:
                    raise FormulaError(f"W{a.index + 1} out of range (k={self.k})")
            elif a.kind == "R":
                if not 0 <= a.index < self.l:
                    raise FormulaError(f"R{a.index + 1} out of range (l={self.l})")
            else:
                raise FormulaError(f"unexpected variable family {a.kind!r}")
        for g in self.el_atoms:
            for a in atoms(g):
                if not isinstance(a, Inf):
                    raise FormulaError("EL atoms must be pure Inf formulas")
                if not 0 <= a.color < len(self.registry):
                    raise ArenaError(f"unknown color index {a.color}")

    def format(self) -> str:
        return format_formula(self.formula, default_atom_str())

    def __repr__(self) -> str:
        return f"CombinedCondition(k={self.k}, l={self.l}, formula={self.format()})"


def eval_combined_lasso(cond: CombinedCondition, lasso: Lasso) -> bool:
    w_vals = [eval_el_lasso(g, lasso) for g in cond.el_atoms]
    r_vals = [monitor_avoids_lasso(d, lasso) for d in cond.monitors]

    def env(a: Formula) -> bool:
        assert isinstance(a, Var)
        return w_vals[a.index] if a.kind == "W" else r_vals[a.index]
    return evaluate(cond.formula, env)


def specialize_formula(cond: CombinedCondition, i: int, value: bool) -> CombinedCondition:
    """Substitute ``R(i+1) := value``, drop monitor i, reindex later R
    variables down by one, and constant-fold."""
    if not 0 <= i < cond.l:
        raise FormulaError(f"regular variable index {i} out of range")

    def repl(a: Formula) -> Formula | None:
        if isinstance(a, Var) and a.kind == "R":
            if a.index == i:
                return Const(value)
            if a.index > i:
                return Var("R", a.index - 1)
        return None

    new_formula = simplify(substitute(cond.formula, repl))
    monitors = cond.monitors[:i] + cond.monitors[i + 1:]
    return CombinedCondition(cond.el_atoms, monitors, new_formula, cond.registry)


def inline_el_atoms(cond: CombinedCondition) -> Formula:
    """Replace every W variable by its EL formula; requires l = 0 variables
    left in the formula."""
    if vars_of(cond.formula, "R"):
        raise FormulaError("cannot inline while regular variables remain")

    def repl(a: Formula) -> Formula | None:
        if isinstance(a, Var) and a.kind == "W":
            return cond.el_atoms[a.index]
        return None
    return simplify(substitute(cond.formula, repl))


# ---------------------------------------------------------------------------
# Multi-dimension bounded-energy Muller front-end
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MdbemSpec:
    """A game whose vertices carry weight vectors and whose condition is a
    proposition over Muller sets, battery-bounded and spill-over-bounded
    energy dimensions.

    ``formula`` uses variable families x (Muller sets), y (battery
    dimensions) and z (spill-over dimensions), all 1-based on the surface.
    """
    arena: Arena
    weights: tuple[tuple[int, ...], ...]  # indexed by position in arena.vertices
    muller_sets: tuple[frozenset[int], ...]  # vertex sets
    n_battery: int
    m_spillover: int
    bounds: tuple[int, ...]
    formula: Formula

    def dims(self) -> int:
        return self.n_battery + self.m_spillover


def compile_mdbem(spec: MdbemSpec, *, initial_levels: Sequence[int] | None = None):
    """Lower a multi-dimension bounded-energy Muller game to a combined
    condition over a recolored arena.

    Every vertex is recolored by its own identity, so Muller sets over
    vertices become color sets; each energy dimension becomes a violation
    monitor over those colors.  Returns ``(arena, registry, condition)``.
    """
    dims = spec.dims()
    verts = spec.arena.vertices
    if len(spec.weights) != len(verts):
        raise ArenaError("one weight vector per vertex required")
    for vec in spec.weights:
        if len(vec) != dims:
            raise ArenaError(f"weight vectors must have length {dims}")
    if len(spec.bounds) != dims:
        raise ArenaError(f"bounds must have length {dims}")
    if any(b < 0 for b in spec.bounds):
        raise ArenaError("bounds must be non-negative")
    if initial_levels is None:
        initial_levels = [0] * dims
    if len(initial_levels) != dims:
        raise ArenaError(f"initial levels must have length {dims}")

    registry = ColorRegistry([f"v{v}" for v in verts])
    pos = {v: i for i, v in enumerate(verts)}
    arena = Arena(spec.arena.v1, spec.arena.v2, spec.arena.edges,
                  {v: pos[v] for v in verts})

    for u in spec.muller_sets:
        for v in u:
            if v not in pos:
                raise ArenaError(f"Muller set mentions unknown vertex {v}")
    el_atoms = [muller_to_el([frozenset(pos[v] for v in u)], registry)
                for u in spec.muller_sets]

    monitors = []
    for d in range(dims):
        wm = WeightMap(tuple(spec.weights[i][d] for i in range(len(verts))), registry)
        if d < spec.n_battery:
            monitors.append(compile_battery_energy(
                wm, spec.bounds[d], initial_level=initial_levels[d]))
        else:
            monitors.append(compile_spillover_energy(
                wm, spec.bounds[d], initial_level=initial_levels[d]))

    def repl(a: Formula) -> Formula | None:
        if not isinstance(a, Var):
            return None
        if a.kind == "x":
            if not 0 <= a.index < len(spec.muller_sets):
                raise FormulaError(f"x{a.index + 1} out of range")
            return Var("W", a.index)
        if a.kind == "y":
            if not 0 <= a.index < spec.n_battery:
                raise FormulaError(f"y{a.index + 1} out of range")
            return Var("R", a.index)
        if a.kind == "z":
            if not 0 <= a.index < spec.m_spillover:
                raise FormulaError(f"z{a.index + 1} out of range")
            return Var("R", spec.n_battery + a.index)
        raise FormulaError(f"unexpected variable family {a.kind!r}")

    formula = substitute(spec.formula, repl)
    cond = CombinedCondition(el_atoms, monitors, formula, registry)
    return arena, registry, cond
