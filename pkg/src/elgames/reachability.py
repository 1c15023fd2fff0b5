"""Attractor computation with positional witness strategies.

The attractor of a target set for a player is the least set from which the
player can force a visit to the target.  It is computed as a backward
fixpoint (delegated to the solver kernel) and comes with ranks and a
positional witness: every player-owned attracted vertex outside the target
points to a successor of strictly smaller rank, and opponent-owned attracted
vertices have all successors attracted at smaller ranks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from elgames import _kernel
from elgames.arena import P1, Arena, arena_csr
from elgames.errors import ArenaError


@dataclass(frozen=True)
class AttractorResult:
    attracted: frozenset[int]
    rank: dict[int, int]
    witness: dict[int, int]

    def __contains__(self, v: int) -> bool:
        return v in self.attracted


def attractor(arena: Arena, target: Iterable[int], player: int) -> AttractorResult:
    """Attractor of ``target`` for ``player`` (1 or 2) with ranks and a
    positional witness; ties broken toward the smallest successor id."""
    target_set = frozenset(target)
    for v in target_set:
        if v not in arena:
            raise ArenaError(f"target vertex {v} not in arena")
    ids, indptr, indices, rev_indptr, rev_indices, owner = arena_csr(arena)
    pos = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    alive = np.ones(n, dtype=np.uint8)
    target_mask = np.zeros(n, dtype=np.uint8)
    for v in target_set:
        target_mask[pos[v]] = 1
    pl = 0 if player == P1 else 1
    attracted_mask, rank_arr, witness_arr = _kernel.attractor(
        indptr, indices, rev_indptr, rev_indices, owner, alive, target_mask, pl)
    attracted = frozenset(ids[i] for i in range(n) if attracted_mask[i])
    rank = {ids[i]: int(rank_arr[i]) for i in range(n) if rank_arr[i] >= 0}
    witness = {ids[i]: ids[int(witness_arr[i])]
               for i in range(n) if witness_arr[i] >= 0}
    return AttractorResult(attracted, rank, witness)
