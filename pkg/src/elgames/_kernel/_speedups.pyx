# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled solver kernel. Mirrors elgames._kernel.pure bit for bit."""

import numpy as np

IMPLEMENTATION = "compiled"


def attractor(indptr, indices, rev_indptr, rev_indices, owner, alive, target, player):
    cdef Py_ssize_t n = owner.shape[0]
    rank_arr = np.full(n, -1, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cnt_arr = np.zeros(n, dtype=np.int64)
    witness_arr = np.full(n, -1, dtype=np.int64)
    attracted_arr = np.zeros(n, dtype=np.uint8)

    cdef long long[:] indptr_v = indptr
    cdef long long[:] indices_v = indices
    cdef long long[:] rev_indptr_v = rev_indptr
    cdef long long[:] rev_indices_v = rev_indices
    cdef unsigned char[:] owner_v = owner
    cdef unsigned char[:] alive_v = alive
    cdef unsigned char[:] target_v = target
    cdef long long[:] rank = rank_arr
    cdef long long[:] queue = queue_arr
    cdef long long[:] cnt = cnt_arr
    cdef long long[:] witness = witness_arr
    cdef unsigned char[:] attracted = attracted_arr

    cdef int pl = player
    cdef Py_ssize_t v, e, head, tail, w, u, c, rw, best

    tail = 0
    for v in range(n):
        if alive_v[v] and target_v[v]:
            rank[v] = 0
            queue[tail] = v
            tail += 1
    for v in range(n):
        if alive_v[v] and owner_v[v] != pl and not target_v[v]:
            c = 0
            for e in range(indptr_v[v], indptr_v[v + 1]):
                if alive_v[indices_v[e]]:
                    c += 1
            cnt[v] = c
    head = 0
    while head < tail:
        w = queue[head]
        head += 1
        rw = rank[w]
        for e in range(rev_indptr_v[w], rev_indptr_v[w + 1]):
            u = rev_indices_v[e]
            if not alive_v[u] or rank[u] >= 0:
                continue
            if owner_v[u] == pl:
                rank[u] = rw + 1
                queue[tail] = u
                tail += 1
            else:
                cnt[u] -= 1
                if cnt[u] == 0:
                    rank[u] = rw + 1
                    queue[tail] = u
                    tail += 1

    for v in range(n):
        if alive_v[v] and rank[v] > 0 and owner_v[v] == pl:
            best = -1
            for e in range(indptr_v[v], indptr_v[v + 1]):
                w = indices_v[e]
                if alive_v[w] and 0 <= rank[w] and rank[w] < rank[v] and (best == -1 or w < best):
                    best = w
            witness[v] = best
        if rank[v] >= 0:
            attracted[v] = 1

    return attracted_arr, rank_arr, witness_arr


def solve_parity(indptr, indices, rev_indptr, rev_indices, owner, priority):
    cdef Py_ssize_t n = owner.shape[0]
    winner_arr = np.zeros(n, dtype=np.uint8)
    strategy_arr = np.full(n, -1, dtype=np.int64)
    alive = np.ones(n, dtype=np.uint8)
    _zielonka(indptr, indices, rev_indptr, rev_indices, owner, priority,
              alive, winner_arr, strategy_arr)
    return winner_arr, strategy_arr


cdef _zielonka(indptr, indices, rev_indptr, rev_indices, owner, priority,
               alive, winner_arr, strategy_arr):
    cdef Py_ssize_t n = owner.shape[0]
    cdef long long[:] indptr_v = indptr
    cdef long long[:] indices_v = indices
    cdef unsigned char[:] owner_v = owner
    cdef long long[:] priority_v = priority
    cdef unsigned char[:] alive_v = alive
    cdef unsigned char[:] winner = winner_arr
    cdef long long[:] strategy = strategy_arr

    cdef Py_ssize_t v, e, w, best
    cdef long long d = -1
    cdef int found = 0
    for v in range(n):
        if alive_v[v]:
            found = 1
            if priority_v[v] > d:
                d = priority_v[v]
    if not found:
        return

    cdef int i = 0 if d % 2 == 0 else 1
    cdef int opp = 1 - i

    target_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[:] target = target_arr
    for v in range(n):
        if alive_v[v] and priority_v[v] == d:
            target[v] = 1

    att_arr, rank_arr, wit_arr = attractor(
        indptr, indices, rev_indptr, rev_indices, owner, alive, target_arr, i)
    sub_arr = (alive.astype(np.bool_) & ~att_arr.astype(np.bool_)).astype(np.uint8)
    _zielonka(indptr, indices, rev_indptr, rev_indices, owner, priority,
              sub_arr, winner_arr, strategy_arr)

    cdef unsigned char[:] sub = sub_arr
    cdef unsigned char[:] att = att_arr
    cdef long long[:] rank = rank_arr
    cdef long long[:] wit = wit_arr

    cdef int any_opp = 0
    for v in range(n):
        if sub[v] and winner[v] == opp:
            any_opp = 1
            break

    if not any_opp:
        for v in range(n):
            if not alive_v[v]:
                continue
            winner[v] = i
            if att[v]:
                if owner_v[v] == i:
                    if rank[v] == 0:
                        best = -1
                        for e in range(indptr_v[v], indptr_v[v + 1]):
                            w = indices_v[e]
                            if alive_v[w] and (best == -1 or w < best):
                                best = w
                        strategy[v] = best
                    else:
                        strategy[v] = wit[v]
                else:
                    strategy[v] = -1
        return

    opp_target_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[:] opp_target = opp_target_arr
    for v in range(n):
        if sub[v] and winner[v] == opp:
            opp_target[v] = 1
    attb_arr, rankb_arr, witb_arr = attractor(
        indptr, indices, rev_indptr, rev_indices, owner, alive, opp_target_arr, opp)
    sub2_arr = (alive.astype(np.bool_) & ~attb_arr.astype(np.bool_)).astype(np.uint8)
    _zielonka(indptr, indices, rev_indptr, rev_indices, owner, priority,
              sub2_arr, winner_arr, strategy_arr)

    cdef unsigned char[:] attb = attb_arr
    cdef long long[:] rankb = rankb_arr
    cdef long long[:] witb = witb_arr
    for v in range(n):
        if alive_v[v] and attb[v]:
            winner[v] = opp
            if owner_v[v] == opp:
                if rankb[v] > 0:
                    strategy[v] = witb[v]
            else:
                strategy[v] = -1
