"""Numba kernels for regression-tree growth and traversal.

One depth-first/best-first builder serves both growth policies: per-node
greedy splits depend only on the node's own samples, so depth-capped
depth-first growth partitions identically to level-wise growth; best-first
order matters only under a leaf budget. Scans run feature-ascending then
bin-ascending, so gain ties keep the first candidate.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Gains below this relative guard are float dust from pure nodes.
GAIN_GUARD = 1e-12


@njit(cache=True)
def _segment_best(codes, y, idx, start, end, nb_per_f, msl, hcnt, hsum):
    """Best (gain, feature, bin, left_sum, left_cnt, total_sum) of a segment."""
    d = codes.shape[1]
    total = end - start
    st = 0.0
    for p in range(start, end):
        st += y[idx[p]]
    best_g = -1.0
    best_f = -1
    best_b = -1
    best_sl = 0.0
    best_cl = 0
    for f in range(d):
        nbf = nb_per_f[f]
        if nbf <= 1:
            continue
        for b in range(nbf):
            hcnt[b] = 0
            hsum[b] = 0.0
        for p in range(start, end):
            c = codes[idx[p], f]
            hcnt[c] += 1
            hsum[c] += y[idx[p]]
        cl = 0
        sl = 0.0
        for b in range(nbf - 1):
            cl += hcnt[b]
            sl += hsum[b]
            cr = total - cl
            if cl < msl or cr < msl:
                continue
            sr = st - sl
            g = sl * sl / cl + sr * sr / cr - st * st / total
            if g > best_g:
                best_g = g
                best_f = f
                best_b = b
                best_sl = sl
                best_cl = cl
    return best_g, best_f, best_b, best_sl, best_cl, st


@njit(cache=True)
def _partition(codes, idx, tmp, start, end, f, b):
    """Stable in-place partition: codes[., f] <= b first. Returns the cut."""
    k = start
    t = 0
    for p in range(start, end):
        s = idx[p]
        if codes[s, f] <= b:
            idx[k] = s
            k += 1
        else:
            tmp[t] = s
            t += 1
    for p in range(t):
        idx[k + p] = tmp[p]
    return k


@njit(cache=True)
def build_tree(codes, y, nb_per_f, max_depth, mss, msl, max_leaves, best_first):
    """Grow one tree; returns flat node arrays plus training predictions."""
    n, d = codes.shape
    if best_first:
        cap = 2 * min(max_leaves, n) + 1
    else:
        cap = 2 * n + 1
    feature = np.full(cap, -1, np.int32)
    thr_bin = np.zeros(cap, np.int32)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    value = np.zeros(cap, np.float64)
    node_start = np.zeros(cap, np.int64)
    node_end = np.zeros(cap, np.int64)
    node_depth = np.zeros(cap, np.int64)

    max_nb = 0
    for f in range(d):
        if nb_per_f[f] > max_nb:
            max_nb = nb_per_f[f]
    hcnt = np.zeros(max(max_nb, 1), np.int64)
    hsum = np.zeros(max(max_nb, 1), np.float64)
    idx = np.arange(n)
    tmp = np.empty(n, np.int64)
    train_pred = np.empty(n, np.float64)

    total0 = 0.0
    for i in range(n):
        total0 += y[i]
    value[0] = total0 / n
    node_start[0] = 0
    node_end[0] = n
    n_nodes = 1

    if best_first:
        # Open-node table: candidate splits awaiting expansion.
        open_id = np.empty(cap, np.int64)
        open_gain = np.empty(cap, np.float64)
        open_f = np.empty(cap, np.int64)
        open_b = np.empty(cap, np.int64)
        open_sl = np.empty(cap, np.float64)
        open_cl = np.empty(cap, np.int64)
        open_st = np.empty(cap, np.float64)
        n_open = 0

        g, f, b, sl, cl, st = _segment_best(codes, y, idx, 0, n, nb_per_f, msl, hcnt, hsum)
        if (
            n >= mss
            and max_depth > 0
            and g > GAIN_GUARD * max(1.0, st * st / n)
        ):
            open_id[0] = 0
            open_gain[0] = g
            open_f[0] = f
            open_b[0] = b
            open_sl[0] = sl
            open_cl[0] = cl
            open_st[0] = st
            n_open = 1
        n_leaves = 1
        while n_leaves < max_leaves and n_open > 0:
            # Highest gain wins; earlier (lower-id) node wins ties.
            pick = 0
            for o in range(1, n_open):
                if open_gain[o] > open_gain[pick]:
                    pick = o
            nid = open_id[pick]
            f = open_f[pick]
            b = open_b[pick]
            sl = open_sl[pick]
            cl = open_cl[pick]
            st = open_st[pick]
            n_open -= 1
            open_id[pick] = open_id[n_open]
            open_gain[pick] = open_gain[n_open]
            open_f[pick] = open_f[n_open]
            open_b[pick] = open_b[n_open]
            open_sl[pick] = open_sl[n_open]
            open_cl[pick] = open_cl[n_open]
            open_st[pick] = open_st[n_open]

            s0 = node_start[nid]
            e0 = node_end[nid]
            cut = _partition(codes, idx, tmp, s0, e0, f, b)
            lid = n_nodes
            rid = n_nodes + 1
            n_nodes += 2
            feature[nid] = f
            thr_bin[nid] = b
            left[nid] = lid
            right[nid] = rid
            value[lid] = sl / cl
            value[rid] = (st - sl) / (e0 - s0 - cl)
            node_start[lid] = s0
            node_end[lid] = cut
            node_start[rid] = cut
            node_end[rid] = e0
            node_depth[lid] = node_depth[nid] + 1
            node_depth[rid] = node_depth[nid] + 1
            n_leaves += 1

            for cid in (lid, rid):
                cs = node_start[cid]
                ce = node_end[cid]
                if ce - cs < mss or node_depth[cid] >= max_depth:
                    continue
                g, f2, b2, sl2, cl2, st2 = _segment_best(
                    codes, y, idx, cs, ce, nb_per_f, msl, hcnt, hsum
                )
                if g > GAIN_GUARD * max(1.0, st2 * st2 / (ce - cs)):
                    open_id[n_open] = cid
                    open_gain[n_open] = g
                    open_f[n_open] = f2
                    open_b[n_open] = b2
                    open_sl[n_open] = sl2
                    open_cl[n_open] = cl2
                    open_st[n_open] = st2
                    n_open += 1
    else:
        stack = np.empty(cap, np.int64)
        stack[0] = 0
        n_stack = 1
        while n_stack > 0:
            n_stack -= 1
            nid = stack[n_stack]
            s0 = node_start[nid]
            e0 = node_end[nid]
            count = e0 - s0
            if count < mss or node_depth[nid] >= max_depth:
                continue
            g, f, b, sl, cl, st = _segment_best(
                codes, y, idx, s0, e0, nb_per_f, msl, hcnt, hsum
            )
            if not g > GAIN_GUARD * max(1.0, st * st / count):
                continue
            cut = _partition(codes, idx, tmp, s0, e0, f, b)
            lid = n_nodes
            rid = n_nodes + 1
            n_nodes += 2
            feature[nid] = f
            thr_bin[nid] = b
            left[nid] = lid
            right[nid] = rid
            value[lid] = sl / cl
            value[rid] = (st - sl) / (count - cl)
            node_start[lid] = s0
            node_end[lid] = cut
            node_start[rid] = cut
            node_end[rid] = e0
            node_depth[lid] = node_depth[nid] + 1
            node_depth[rid] = node_depth[nid] + 1
            # Right first so the left child is processed next (lower ids go
            # deep-left, keeping numbering deterministic and intuitive).
            stack[n_stack] = rid
            stack[n_stack + 1] = lid
            n_stack += 2

    for nid in range(n_nodes):
        if feature[nid] < 0:
            v = value[nid]
            for p in range(node_start[nid], node_end[nid]):
                train_pred[idx[p]] = v

    return (
        feature[:n_nodes],
        thr_bin[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
        train_pred,
    )


@njit(cache=True)
def predict_real(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        nid = 0
        while feature[nid] >= 0:
            if X[i, feature[nid]] <= threshold[nid]:
                nid = left[nid]
            else:
                nid = right[nid]
        out[i] = value[nid]
    return out


@njit(cache=True)
def predict_binned(feature, thr_bin, left, right, value, codes):
    n = codes.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        nid = 0
        while feature[nid] >= 0:
            if codes[i, feature[nid]] <= thr_bin[nid]:
                nid = left[nid]
            else:
                nid = right[nid]
        out[i] = value[nid]
    return out
