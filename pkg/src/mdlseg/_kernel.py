"""Compiled inner loops for the per-segment community search.

All arrays are little state machines over one segment: ``E[t, k, l]``
holds observed block edge counts (diagonal counted once), ``sizes[t, k]``
the counted community sizes, and ``D[t, i, k]`` the number of neighbors
of node ``i`` in community ``k`` at snapshot ``t``.  Costs are in bits.
Label-entropy terms are handled by the caller; these kernels only see the
per-block parameter + residual cost, which is what node moves change.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _tri(x):
    return x * (x - 1.0) * 0.5


@njit(cache=True, inline="always")
def _block_cost(e, n):
    # 0.5*log2(N) parameter cost plus N*H2(E/N) residual bits; empty
    # blocks (N <= 0) carry neither.
    if n <= 0.0:
        return 0.0
    p = e / n
    h = 0.0
    if 0.0 < p < 1.0:
        h = -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))
    return 0.5 * np.log2(n) + n * h


@njit(cache=True)
def build_block_arrays(labels, c, indptr, indices, offsets, counted):
    tn = indptr.shape[0]
    n = labels.shape[0]
    E = np.zeros((tn, c, c))
    sizes = np.zeros((tn, c))
    D = np.zeros((tn, n, c))
    for t in range(tn):
        for i in range(n):
            if counted[t, i]:
                sizes[t, labels[i]] += 1.0
        base = offsets[t]
        for i in range(n):
            li = labels[i]
            for ptr in range(indptr[t, i], indptr[t, i + 1]):
                j = indices[base + ptr]
                lj = labels[j]
                D[t, i, lj] += 1.0
                if j > i:
                    E[t, li, lj] += 1.0
                    if li != lj:
                        E[t, lj, li] += 1.0
    return E, sizes, D


@njit(cache=True)
def total_blocks_cost(E, sizes):
    tn, c = sizes.shape
    total = 0.0
    for t in range(tn):
        for k in range(c):
            nk = sizes[t, k]
            total += _block_cost(E[t, k, k], _tri(nk))
            for l in range(k + 1, c):
                total += _block_cost(E[t, k, l], nk * sizes[t, l])
    return total


@njit(cache=True)
def move_delta_blocks(E, sizes, D, counted, i, a, b):
    """Blocks-cost change if node i moves from slot a to slot b."""
    tn, c = sizes.shape
    delta = 0.0
    for t in range(tn):
        if not counted[t, i]:
            continue
        na = sizes[t, a]
        nb = sizes[t, b]
        da = D[t, i, a]
        db = D[t, i, b]
        naf = na - 1.0
        nbf = nb + 1.0
        old = (
            _block_cost(E[t, a, a], _tri(na))
            + _block_cost(E[t, b, b], _tri(nb))
            + _block_cost(E[t, a, b], na * nb)
        )
        new = (
            _block_cost(E[t, a, a] - da, _tri(naf))
            + _block_cost(E[t, b, b] + db, _tri(nbf))
            + _block_cost(E[t, a, b] - db + da, naf * nbf)
        )
        for k in range(c):
            if k == a or k == b:
                continue
            nk = sizes[t, k]
            dk = D[t, i, k]
            old += _block_cost(E[t, a, k], na * nk) + _block_cost(E[t, b, k], nb * nk)
            new += _block_cost(E[t, a, k] - dk, naf * nk) + _block_cost(E[t, b, k] + dk, nbf * nk)
        delta += new - old
    return delta


@njit(cache=True)
def apply_move(labels, E, sizes, D, counted, indptr, indices, offsets, i, a, b):
    labels[i] = b
    tn, c = sizes.shape
    for t in range(tn):
        if not counted[t, i]:
            continue
        da = D[t, i, a]
        db = D[t, i, b]
        E[t, a, a] -= da
        E[t, b, b] += db
        nab = E[t, a, b] - db + da
        E[t, a, b] = nab
        E[t, b, a] = nab
        for k in range(c):
            if k == a or k == b:
                continue
            dk = D[t, i, k]
            E[t, a, k] -= dk
            E[t, k, a] = E[t, a, k]
            E[t, b, k] += dk
            E[t, k, b] = E[t, b, k]
        sizes[t, a] -= 1.0
        sizes[t, b] += 1.0
        base = offsets[t]
        for ptr in range(indptr[t, i], indptr[t, i + 1]):
            j = indices[base + ptr]
            D[t, j, a] -= 1.0
            D[t, j, b] += 1.0


@njit(cache=True)
def sweep_pair(
    labels, E, sizes, D, counted, indptr, indices, offsets,
    members, order, ka, kb, slot_count, label_units, c_eff, tol,
):
    """One sweep over ``members`` flipping between slots ka and kb.

    A flip is kept only when it lowers the segment criterion by more than
    ``tol`` bits, including the label-cost jump when a community empties
    or refills.  Returns (switches, accumulated blocks delta, new c_eff).
    """
    nswitch = 0
    dblocks_total = 0.0
    for oi in range(order.shape[0]):
        i = members[order[oi]]
        a = labels[i]
        b = kb if a == ka else ka
        ce_new = c_eff
        if slot_count[a] == 1:
            ce_new -= 1
        if slot_count[b] == 0:
            ce_new += 1
        dlabel = 0.0
        if ce_new != c_eff:
            dlabel = label_units * (np.log2(float(ce_new)) - np.log2(float(c_eff)))
        dblocks = move_delta_blocks(E, sizes, D, counted, i, a, b)
        if dblocks + dlabel < -tol:
            apply_move(labels, E, sizes, D, counted, indptr, indices, offsets, i, a, b)
            slot_count[a] -= 1
            slot_count[b] += 1
            c_eff = ce_new
            dblocks_total += dblocks
            nswitch += 1
    return nswitch, dblocks_total, c_eff


@njit(cache=True)
def sweep_best_target(
    labels, E, sizes, D, counted, indptr, indices, offsets,
    order, slot_count, label_units, c_eff, tol, min_size,
):
    """One sweep moving each node to its best existing community.

    Used as a final polish so the output is a genuine single-switch local
    optimum across all communities, not just within the last bisection.
    A move may not strand the source community strictly between empty and
    ``min_size`` members.
    """
    nswitch = 0
    dblocks_total = 0.0
    c = sizes.shape[1]
    for oi in range(order.shape[0]):
        i = order[oi]
        a = labels[i]
        left = slot_count[a] - 1
        if 0 < left < min_size:
            continue
        best_b = -1
        best_total = -tol
        best_dblocks = 0.0
        best_ce = c_eff
        for b in range(c):
            if b == a or slot_count[b] == 0:
                continue
            ce_new = c_eff
            if slot_count[a] == 1:
                ce_new -= 1
            dlabel = 0.0
            if ce_new != c_eff:
                dlabel = label_units * (np.log2(float(ce_new)) - np.log2(float(c_eff)))
            dblocks = move_delta_blocks(E, sizes, D, counted, i, a, b)
            total = dblocks + dlabel
            if total < best_total:
                best_total = total
                best_b = b
                best_dblocks = dblocks
                best_ce = ce_new
        if best_b >= 0:
            apply_move(labels, E, sizes, D, counted, indptr, indices, offsets, i, a, best_b)
            slot_count[a] -= 1
            slot_count[best_b] += 1
            c_eff = best_ce
            dblocks_total += best_dblocks
            nswitch += 1
    return nswitch, dblocks_total, c_eff


@njit(cache=True)
def merge_delta_blocks(E, sizes, ka, kb):
    """Blocks-cost change if communities ka and kb merge into one."""
    tn, c = sizes.shape
    delta = 0.0
    for t in range(tn):
        na = sizes[t, ka]
        nb = sizes[t, kb]
        old = (
            _block_cost(E[t, ka, ka], _tri(na))
            + _block_cost(E[t, kb, kb], _tri(nb))
            + _block_cost(E[t, ka, kb], na * nb)
        )
        new = _block_cost(E[t, ka, ka] + E[t, kb, kb] + E[t, ka, kb], _tri(na + nb))
        for k in range(c):
            if k == ka or k == kb:
                continue
            nk = sizes[t, k]
            old += _block_cost(E[t, ka, k], na * nk) + _block_cost(E[t, kb, k], nb * nk)
            new += _block_cost(E[t, ka, k] + E[t, kb, k], (na + nb) * nk)
        delta += new - old
    return delta
