"""Pure-Python solver kernel.

Operates on CSR-encoded game graphs:

* ``indptr``/``indices`` encode successor lists, ``rev_indptr``/``rev_indices``
  the predecessor lists.
* ``owner[v]`` is 0 or 1 (0 stands for Player 1).
* Winner/strategy conventions match the compiled kernel bit for bit; the
  import-time selection in ``elgames._kernel`` treats the two as
  interchangeable.

All tie-breaking is by smallest vertex id, so results are reproducible.
"""
from __future__ import annotations

import sys

import numpy as np

IMPLEMENTATION = "python"


def attractor(indptr, indices, rev_indptr, rev_indices, owner, alive, target, player):
    """Least set from which ``player`` forces a visit to ``target``.

    Returns ``(attracted, rank, witness)`` as numpy arrays.  ``rank`` is -1
    outside the attractor; ``witness[v]`` is the chosen successor for
    player-owned attracted vertices of positive rank (-1 elsewhere).
    """
    n = len(owner)
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    rev_indptr_l = rev_indptr.tolist()
    rev_indices_l = rev_indices.tolist()
    owner_l = owner.tolist()
    alive_l = alive.tolist()
    target_l = target.tolist()

    rank = [-1] * n
    queue = []
    for v in range(n):
        if alive_l[v] and target_l[v]:
            rank[v] = 0
            queue.append(v)
    # Opponent vertices fall only once every live successor is attracted.
    cnt = [0] * n
    for v in range(n):
        if alive_l[v] and owner_l[v] != player and not target_l[v]:
            c = 0
            for e in range(indptr_l[v], indptr_l[v + 1]):
                if alive_l[indices_l[e]]:
                    c += 1
            cnt[v] = c
    head = 0
    while head < len(queue):
        w = queue[head]
        head += 1
        rw = rank[w]
        for e in range(rev_indptr_l[w], rev_indptr_l[w + 1]):
            u = rev_indices_l[e]
            if not alive_l[u] or rank[u] >= 0:
                continue
            if owner_l[u] == player:
                rank[u] = rw + 1
                queue.append(u)
            else:
                cnt[u] -= 1
                if cnt[u] == 0:
                    rank[u] = rw + 1
                    queue.append(u)

    witness = [-1] * n
    for v in range(n):
        if alive_l[v] and rank[v] > 0 and owner_l[v] == player:
            best = -1
            for e in range(indptr_l[v], indptr_l[v + 1]):
                w = indices_l[e]
                if alive_l[w] and 0 <= rank[w] < rank[v] and (best == -1 or w < best):
                    best = w
            witness[v] = best

    attracted = np.fromiter((1 if rank[v] >= 0 else 0 for v in range(n)), dtype=np.uint8, count=n)
    return attracted, np.asarray(rank, dtype=np.int64), np.asarray(witness, dtype=np.int64)


def solve_parity(indptr, indices, rev_indptr, rev_indices, owner, priority):
    """Zielonka's recursive algorithm, max-parity, Player 1 favors even.

    Returns ``(winner, strategy)``: ``winner[v]`` in {0, 1} and
    ``strategy[v]`` the chosen successor where ``owner[v] == winner[v]``
    (otherwise -1).
    """
    n = len(owner)
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    owner_l = owner.tolist()
    priority_l = priority.tolist()

    winner = [0] * n
    strategy = [-1] * n

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 100))
    try:
        _zielonka(
            indptr, indices, rev_indptr, rev_indices,
            indptr_l, indices_l, owner, owner_l, priority_l,
            np.ones(n, dtype=np.uint8), winner, strategy,
        )
    finally:
        sys.setrecursionlimit(old_limit)
    return np.asarray(winner, dtype=np.uint8), np.asarray(strategy, dtype=np.int64)


def _zielonka(indptr, indices, rev_indptr, rev_indices,
              indptr_l, indices_l, owner, owner_l, priority_l,
              alive, winner, strategy):
    n = len(owner_l)
    alive_l = alive.tolist()
    verts = [v for v in range(n) if alive_l[v]]
    if not verts:
        return
    d = max(priority_l[v] for v in verts)
    i = 0 if d % 2 == 0 else 1

    target = np.zeros(n, dtype=np.uint8)
    for v in verts:
        if priority_l[v] == d:
            target[v] = 1
    att, rank, wit = attractor(indptr, indices, rev_indptr, rev_indices,
                               owner, alive, target, i)
    sub = alive & np.logical_not(att)
    _zielonka(indptr, indices, rev_indptr, rev_indices,
              indptr_l, indices_l, owner, owner_l, priority_l,
              sub.astype(np.uint8), winner, strategy)

    opp = 1 - i
    sub_l = sub.tolist()
    w_opp = [v for v in range(n) if sub_l[v] and winner[v] == opp]
    if not w_opp:
        att_l = att.tolist()
        rank_l = rank.tolist()
        wit_l = wit.tolist()
        for v in verts:
            winner[v] = i
            if att_l[v]:
                if owner_l[v] == i:
                    if rank_l[v] == 0:
                        strategy[v] = _smallest_alive_successor(
                            v, indptr_l, indices_l, alive_l)
                    else:
                        strategy[v] = wit_l[v]
                else:
                    strategy[v] = -1
        return

    opp_target = np.zeros(n, dtype=np.uint8)
    for v in w_opp:
        opp_target[v] = 1
    attb, rankb, witb = attractor(indptr, indices, rev_indptr, rev_indices,
                                  owner, alive, opp_target, opp)
    sub2 = alive & np.logical_not(attb)
    _zielonka(indptr, indices, rev_indptr, rev_indices,
              indptr_l, indices_l, owner, owner_l, priority_l,
              sub2.astype(np.uint8), winner, strategy)
    attb_l = attb.tolist()
    rankb_l = rankb.tolist()
    witb_l = witb.tolist()
    for v in verts:
        if attb_l[v]:
            winner[v] = opp
            if owner_l[v] == opp:
                if rankb_l[v] > 0:
                    strategy[v] = witb_l[v]
                # rank 0: keep the strategy assigned by the first recursion
            else:
                strategy[v] = -1


def _smallest_alive_successor(v, indptr_l, indices_l, alive_l):
    best = -1
    for e in range(indptr_l[v], indptr_l[v + 1]):
        w = indices_l[e]
        if alive_l[w] and (best == -1 or w < best):
            best = w
    return best
