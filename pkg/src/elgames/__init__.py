"""Games on colored graphs: Emerson-Lei objectives combined with regular
safety constraints, solved with finite-memory strategy synthesis."""

from elgames.arena import (Arena, ColorRegistry, P1, P2, ProductSpace,
                           ProductVertex, product_arena, restrict,
                           validate_arena)
from elgames.combiner import (RegionDecomposition, SolveResult,
                              conj_fast_path, disj_fast_path, memory_bound,
                              region_decompose, solve_combined,
                              switching_bound)
from elgames.conditions import (CombinedCondition, Lasso, MdbemSpec,
                                compile_mdbem, eval_combined_lasso,
                                eval_el_lasso, muller_to_el, parity_to_el,
                                specialize_formula)
from elgames.el_solver import (ElSolveResult, ParityGame, el_winners,
                               lar_expand, solve_el, zielonka)
from elgames.monitors import (MonitorDfa, WeightMap, compile_battery_energy,
                              compile_color_reach, compile_color_safety,
                              compile_spillover_energy, compile_window,
                              dfa_product, make_absorbing, run_dfa)
from elgames.oracle import (PredictabilityAutomaton, brute_force_positional,
                            extract_predictability, monolithic_reduce,
                            oracle_solve, verify_strategy)
from elgames.reachability import AttractorResult, attractor
from elgames.strategies import (MooreStrategy, StrategyProfile, moore_answer,
                                simulate_to_lasso, stitch_regional)

__version__ = "0.1.0"
