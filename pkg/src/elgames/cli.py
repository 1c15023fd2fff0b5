"""Command-line surface.

Subcommands: ``solve``, ``oracle-check``, ``verify``, ``bound``,
``compile``, ``simulate``.  Game files are JSON (schema documented in the
README); strategies use the line-oriented table format of
``elgames.strategies``.

Exit codes: 0 success / pass, 1 semantic failure (verification failed or
oracle mismatch), 2 validation error, 3 parse or flag error.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys
from dataclasses import dataclass

from elgames.arena import (P1, P2, Arena, ColorRegistry, to_dot,
                           validate_arena)
from elgames.combiner import (SolveResult, conj_fast_path, detect_fast_path,
                              disj_fast_path, memory_bound, solve_combined,
                              switching_bound)
from elgames.conditions import (CombinedCondition, MdbemSpec,
                                compile_mdbem, inf_atom_parser, parse_formula,
                                var_atom_parser)
from elgames.errors import ElgamesError, FormulaError, GameFileError
from elgames.monitors import (MonitorDfa, WeightMap, compile_battery_energy,
                              compile_color_safety, compile_spillover_energy,
                              compile_window, make_absorbing)
from elgames.oracle import oracle_solve, verify_strategy
from elgames.randgen import random_instance
from elgames.strategies import (StrategyProfile, export_strategy,
                                parse_strategy, simulate_to_lasso,
                                strategy_to_dot)

EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_VALIDATION = 2
EXIT_PARSE = 3


# ---------------------------------------------------------------------------
# Game files
# ---------------------------------------------------------------------------

@dataclass
class GameFile:
    arena: Arena
    registry: ColorRegistry
    condition: CombinedCondition
    base_names: dict[int, str]  # pretty names for vertices (mdbem recoloring)


def _parse_monitor_entry(entry, registry: ColorRegistry,
                         weights: WeightMap | None) -> MonitorDfa:
    if isinstance(entry, str):
        return _parse_monitor_directive(entry, registry, weights)
    if not isinstance(entry, dict):
        raise GameFileError(f"monitor entry must be a directive string or an object: {entry!r}")
    try:
        num_states = int(entry["states"])
        initial = int(entry["initial"])
        final = [int(f) for f in entry["final"]]
        rows = entry["delta"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFileError(f"bad inline monitor: {exc}") from exc
    table = [[None] * len(registry) for _ in range(num_states)]
    for row in rows:
        if len(row) != 3:
            raise GameFileError(f"monitor row must be [state, color, state]: {row!r}")
        q, cname, q2 = int(row[0]), str(row[1]), int(row[2])
        table[q][registry.index(cname)] = q2
    for q, r in enumerate(table):
        for c, t in enumerate(r):
            if t is None:
                raise GameFileError(
                    f"monitor missing transition from state {q} on color "
                    f"{registry.name(c)}")
    dfa = MonitorDfa(num_states, initial, final, table, registry)
    return make_absorbing(dfa)


_DIRECTIVE = re.compile(
    r"^(battery|spillover)\s+b=(\d+)$|^window\s+l=(\d+)$|^safety\s+colors=([\w,]*)$")


def _parse_monitor_directive(text: str, registry: ColorRegistry,
                             weights: WeightMap | None) -> MonitorDfa:
    m = _DIRECTIVE.match(text.strip())
    if not m:
        raise GameFileError(f"unknown monitor directive {text!r}")
    if m.group(1):
        if weights is None:
            raise GameFileError(f"directive {text!r} needs a condition-level weights map")
        bound = int(m.group(2))
        if m.group(1) == "battery":
            return compile_battery_energy(weights, bound)
        return compile_spillover_energy(weights, bound)
    if m.group(3) is not None:
        if weights is None:
            raise GameFileError(f"directive {text!r} needs a condition-level weights map")
        return compile_window(weights, int(m.group(3)))
    bad = [registry.index(name) for name in m.group(4).split(",") if name]
    return compile_color_safety(bad, registry)


def load_game(path: str) -> GameFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise GameFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GameFileError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GameFileError("top level must be an object")

    try:
        vertices = doc["vertices"]
        edge_rows = doc["edges"]
    except KeyError as exc:
        raise GameFileError(f"missing required key {exc}") from exc

    v1, v2 = set(), set()
    weight_rows: dict[int, tuple[int, ...]] = {}
    color_names: dict[int, str] = {}
    for row in vertices:
        try:
            vid = int(row["id"])
            owner = int(row["owner"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GameFileError(f"bad vertex entry {row!r}") from exc
        if owner == 1:
            v1.add(vid)
        elif owner == 2:
            v2.add(vid)
        else:
            raise GameFileError(f"vertex {vid}: owner must be 1 or 2")
        if "color" in row:
            color_names[vid] = str(row["color"])
        if "weights" in row:
            weight_rows[vid] = tuple(int(x) for x in row["weights"])
    edges = set()
    for row in edge_rows:
        if len(row) != 2:
            raise GameFileError(f"edge rows are pairs: {row!r}")
        edges.add((int(row[0]), int(row[1])))

    if "mdbem" in doc:
        return _load_mdbem(doc, v1, v2, edges, weight_rows)

    if "colors" not in doc or "condition" not in doc:
        raise GameFileError("game file needs 'colors' and 'condition' (or an 'mdbem' block)")
    registry = ColorRegistry([str(c) for c in doc["colors"]])
    gamma = {}
    for vid in v1 | v2:
        if vid not in color_names:
            raise GameFileError(f"vertex {vid} has no color")
        gamma[vid] = registry.index(color_names[vid])
    arena = Arena(v1, v2, edges, gamma)

    cblock = doc["condition"]
    if not isinstance(cblock, dict):
        raise GameFileError("'condition' must be an object")
    weights = None
    if "weights" in cblock:
        weights = WeightMap.from_dict(
            {str(k): int(v) for k, v in cblock["weights"].items()}, registry)
    el_atoms = []
    for text in cblock.get("el_atoms", []):
        try:
            el_atoms.append(parse_formula(str(text), inf_atom_parser(registry)))
        except FormulaError as exc:
            raise GameFileError(f"bad EL atom {text!r}: {exc}") from exc
    monitors = [_parse_monitor_entry(entry, registry, weights)
                for entry in cblock.get("monitors", [])]
    try:
        formula = parse_formula(
            str(cblock.get("formula", "true")),
            var_atom_parser({"W": len(el_atoms), "R": len(monitors)}))
    except FormulaError as exc:
        raise GameFileError(f"bad formula: {exc}") from exc
    cond = CombinedCondition(el_atoms, monitors, formula, registry)
    names = {v: str(v) for v in arena.vertices}
    return GameFile(arena, registry, cond, names)


def _load_mdbem(doc, v1, v2, edges, weight_rows) -> GameFile:
    block = doc["mdbem"]
    try:
        muller_sets = tuple(frozenset(int(v) for v in u) for u in block["muller_sets"])
        battery = [int(b) for b in block.get("battery_bounds", [])]
        spill = [int(b) for b in block.get("spillover_bounds", [])]
        formula_text = str(block["formula"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFileError(f"bad mdbem block: {exc}") from exc
    verts = sorted(v1 | v2)
    dims = len(battery) + len(spill)
    weights = []
    for v in verts:
        if v not in weight_rows:
            raise GameFileError(f"mdbem vertex {v} needs a weight vector")
        weights.append(weight_rows[v])
    base = Arena(v1, v2, edges, {v: 0 for v in verts})
    try:
        formula = parse_formula(formula_text, var_atom_parser(
            {"x": len(muller_sets), "y": len(battery), "z": len(spill)}))
    except FormulaError as exc:
        raise GameFileError(f"bad mdbem formula: {exc}") from exc
    spec = MdbemSpec(base, tuple(weights), muller_sets, len(battery),
                     len(spill), tuple(battery + spill), formula)
    arena, registry, cond = compile_mdbem(spec)
    names = {v: f"v{v}" for v in arena.vertices}
    return GameFile(arena, registry, cond, names)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _solve_with_mode(game: GameFile, fast_mode: str) -> SolveResult:
    if fast_mode == "auto":
        shape = detect_fast_path(game.condition)
        if shape == "conj":
            return conj_fast_path(game.arena, game.condition)
        if shape == "disj":
            return disj_fast_path(game.arena, game.condition)
    return solve_combined(game.arena, game.condition)


def cmd_solve(args) -> int:
    game = load_game(args.path)
    report = validate_arena(game.arena, game.registry)
    if not report.ok:
        for msg in report.messages():
            print(f"validation error: {msg}")
        return EXIT_VALIDATION
    result = _solve_with_mode(game, args.fast_path)
    for v in game.arena.vertices:
        player = result.winner_at(v)
        print(f"{game.base_names[v]} P{player}")
    if args.emit_winners:
        lines = _full_winner_lines(game, result)
        _write_or_print(args.out, "winners.txt", "\n".join(lines) + "\n")
    if args.emit_strategy:
        for player, strategy in ((1, result.profile.p1), (2, result.profile.p2)):
            if args.emit_strategy == "table":
                text = export_strategy(strategy, game.arena)
                _write_or_print(args.out, f"strategy-p{player}.txt", text)
            else:
                text = strategy_to_dot(strategy, name=f"p{player}")
                _write_or_print(args.out, f"strategy-p{player}.dot", text)
    return EXIT_OK


def _full_winner_lines(game: GameFile, result: SolveResult) -> list[str]:
    lines = []
    for pid in sorted(result.winner):
        pv = result.space.vertex(pid)
        states = ",".join(str(q) for q in pv.states)
        lines.append(f"{game.base_names[pv.base]} ({states}) P{result.winner[pid]}")
    return lines


def _write_or_print(out_dir, filename, text) -> None:
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, filename)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)


def cmd_oracle_check(args) -> int:
    if args.random is not None:
        rng = random.Random(args.seed)
        mismatches = 0
        for i in range(args.random):
            arena, cond = random_instance(rng)
            mismatches += _compare_tables(arena, cond, f"instance {i}")
        print(f"checked {args.random} random instances (seed {args.seed}): "
              f"{mismatches} mismatches")
        return EXIT_OK if mismatches == 0 else EXIT_SEMANTIC

    game = load_game(args.path)
    report = validate_arena(game.arena, game.registry)
    if not report.ok:
        for msg in report.messages():
            print(f"validation error: {msg}")
        return EXIT_VALIDATION
    mismatches = _compare_tables(game.arena, game.condition, args.path,
                                 names=game.base_names)
    if mismatches == 0:
        print("winner tables agree")
        return EXIT_OK
    return EXIT_SEMANTIC


def _compare_tables(arena, cond, label, names=None) -> int:
    table = solve_combined(arena, cond).winner_table()
    reference = oracle_solve(arena, cond)
    if os.environ.get("ELGAMES_INJECT_ORACLE_FAULT") == "1" and reference:
        first = sorted(reference, key=lambda pv: (pv.base, pv.states))[0]
        reference[first] = P1 if reference[first] == P2 else P2
    bad = 0
    for pv in sorted(table, key=lambda p: (p.base, p.states)):
        if table[pv] != reference[pv]:
            bad += 1
            name = names[pv.base] if names else str(pv.base)
            print(f"{label}: mismatch at {name} {pv.states}: "
                  f"solver P{table[pv]} oracle P{reference[pv]}")
    return bad


def cmd_verify(args) -> int:
    game = load_game(args.path)
    report = validate_arena(game.arena, game.registry)
    if not report.ok:
        for msg in report.messages():
            print(f"validation error: {msg}")
        return EXIT_VALIDATION
    try:
        with open(args.strategy, "r", encoding="utf-8") as fh:
            strategy = parse_strategy(fh.read(), game.registry)
    except OSError as exc:
        raise GameFileError(f"cannot read {args.strategy}: {exc}") from exc
    for _, v in strategy.actions():
        if v not in game.arena:
            print(f"validation error: strategy references unknown vertex {v}")
            return EXIT_VALIDATION
    owned = [v for v in game.arena.vertices
             if game.arena.owner(v) == args.player]
    for v in owned:
        try:
            target = strategy.next_action(strategy.initial, v)
        except ElgamesError:
            print(f"validation error: strategy gives no move at vertex {v}")
            return EXIT_VALIDATION
        if target not in game.arena.succ(v):
            print(f"validation error: strategy move {v} -> {target} is not an edge")
            return EXIT_VALIDATION

    result = solve_combined(game.arena, game.condition)
    space = result.space
    claimed = [space.vertex(space.id_of(v, space.initial_states))
               for v in game.arena.vertices
               if result.winner_at(v) == args.player]
    rep = verify_strategy(game.arena, game.condition, strategy, args.player,
                          claimed)
    print(f"checked {rep.checked} claimed vertices")
    if rep.ok:
        print("strategy verified")
        return EXIT_OK
    for failure in rep.failures:
        name = game.base_names[failure.vertex.base]
        print(f"FAIL at {name}: counterexample {failure.lasso.format(game.registry)}")
    return EXIT_SEMANTIC


def cmd_bound(args) -> int:
    if args.switching:
        if args.k is None or args.v is None:
            raise GameFileError("--switching needs --l, --k and --v")
        print(switching_bound(args.l, args.k, args.v))
        return EXIT_OK
    if args.n is None or args.m is None:
        raise GameFileError("bound needs --l, --n and --m")
    table = {}
    if args.base_table:
        for part in args.base_table.split(","):
            try:
                key, val = part.split(":")
                table[int(key)] = int(val)
            except ValueError as exc:
                raise GameFileError(f"bad --base-table entry {part!r}") from exc

    def base(n: int) -> int:
        return table.get(n, args.base_const)

    print(memory_bound(args.l, args.n, args.m, base))
    return EXIT_OK


def cmd_compile(args) -> int:
    registry = ColorRegistry([c for c in args.colors.split(",") if c])
    weights = None
    if args.weights:
        pairs = {}
        for part in args.weights.split(","):
            try:
                name, val = part.split(":")
                pairs[name] = int(val)
            except ValueError as exc:
                raise GameFileError(f"bad --weights entry {part!r}") from exc
        weights = WeightMap.from_dict(pairs, registry)
    dfa = _parse_monitor_directive(args.directive, registry, weights)
    print(f"monitor states={dfa.num_states} initial={dfa.initial} "
          f"final={','.join(str(f) for f in sorted(dfa.final))}")
    for q in range(dfa.num_states):
        for c in range(len(registry)):
            print(f"{q} {registry.name(c)} {dfa.step(q, c)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    game = load_game(args.path)
    report = validate_arena(game.arena, game.registry)
    if not report.ok:
        for msg in report.messages():
            print(f"validation error: {msg}")
        return EXIT_VALIDATION
    strategies = {}
    for path in (args.strategy1, args.strategy2):
        with open(path, "r", encoding="utf-8") as fh:
            s = parse_strategy(fh.read(), game.registry)
        strategies[s.owner] = s
    if set(strategies) != {P1, P2}:
        raise GameFileError("need one strategy per player")
    profile = StrategyProfile(strategies[P1], strategies[P2])
    start = args.start
    if start not in game.arena:
        print(f"validation error: unknown start vertex {start}")
        return EXIT_VALIDATION
    prefix = []
    if args.prefix:
        prefix = [game.registry.index(name)
                  for name in args.prefix.split(",") if name]
    lasso = simulate_to_lasso(profile, game.arena, start, prefix,
                              max_steps=args.steps)
    print(lasso.format(game.registry))
    return EXIT_OK


def cmd_dot(args) -> int:
    game = load_game(args.path)
    sys.stdout.write(to_dot(game.arena, game.registry))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise GameFileError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elgames",
                description="Solve games combining Emerson-Lei objectives "
                            "with regular safety constraints.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a game file")
    ps.add_argument("path")
    ps.add_argument("--fast-path", choices=["auto", "off"], default="auto")
    ps.add_argument("--emit-strategy", choices=["table", "dot"])
    ps.add_argument("--emit-winners", action="store_true",
                    help="also emit the full product winner table")
    ps.add_argument("--out", help="directory for emitted files (default: stdout)")
    ps.set_defaults(func=cmd_solve)

    po = sub.add_parser("oracle-check",
                        help="compare the solver against the monolithic oracle")
    po.add_argument("path", nargs="?")
    po.add_argument("--random", type=int, metavar="N",
                    help="check N random instances instead of a file")
    po.add_argument("--seed", type=int, default=0)
    po.set_defaults(func=cmd_oracle_check)

    pv = sub.add_parser("verify", help="verify a strategy file against a game")
    pv.add_argument("path")
    pv.add_argument("strategy")
    pv.add_argument("--player", type=int, choices=[1, 2], required=True)
    pv.set_defaults(func=cmd_verify)

    pb = sub.add_parser("bound", help="evaluate the closed-form memory bounds")
    pb.add_argument("--l", type=int, required=True)
    pb.add_argument("--n", type=int)
    pb.add_argument("--m", type=int)
    pb.add_argument("--base-const", type=int, default=1)
    pb.add_argument("--base-table", help="comma-separated n:size overrides")
    pb.add_argument("--switching", action="store_true",
                    help="evaluate the strategy-switching size instead")
    pb.add_argument("--k", type=int)
    pb.add_argument("--v", type=int)
    pb.set_defaults(func=cmd_bound)

    pc = sub.add_parser("compile", help="compile a monitor directive")
    pc.add_argument("directive",
                    help='e.g. "battery b=2", "window l=2", "safety colors=a"')
    pc.add_argument("--colors", required=True, help="comma-separated color names")
    pc.add_argument("--weights", help="comma-separated color:weight pairs")
    pc.set_defaults(func=cmd_compile)

    pm = sub.add_parser("simulate", help="simulate a strategy profile to a lasso")
    pm.add_argument("path")
    pm.add_argument("strategy1")
    pm.add_argument("strategy2")
    pm.add_argument("--start", type=int, required=True)
    pm.add_argument("--prefix", help="comma-separated color history")
    pm.add_argument("--steps", type=int, default=100000,
                    help="abort if no configuration repeats within this many steps")
    pm.set_defaults(func=cmd_simulate)

    pd = sub.add_parser("dot", help="print the arena in DOT format")
    pd.add_argument("path")
    pd.set_defaults(func=cmd_dot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except GameFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ElgamesError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
