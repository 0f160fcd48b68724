"""Pure-Python twin of the compiled tree kernels.

Consumes the same splitmix64 stream and evaluates splits with the same
double-precision expressions as ``_forest_core``, so both backends grow
bit-identical trees; this module is just slower.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix64_block(states: np.ndarray) -> np.ndarray:
    z = states
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    feature: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    label: np.ndarray,
    seed: int,
    max_depth: int,
    min_samples_split: int,
    m_features: int,
    bootstrap: bool,
) -> int:
    """Grow one tree into the preallocated node arrays; returns the node count."""
    n, n_feat = x.shape
    state = int(seed) & _MASK
    if bootstrap:
        # The stream is counter-based: draw t equals mix64(seed + t*gamma),
        # which lets the bootstrap block be vectorized.
        counters = np.arange(1, n + 1, dtype=np.uint64)
        states = np.uint64(state) + np.uint64(_GAMMA) * counters
        idx = (_mix64_block(states) % np.uint64(n)).astype(np.int64)
        state = (state + n * _GAMMA) & _MASK
    else:
        idx = np.arange(n, dtype=np.int64)

    feature[0] = left[0] = right[0] = label[0] = -1
    n_nodes = 1
    stack = [(0, 0, n, 0)]
    while stack:
        node, lo, hi, depth = stack.pop()
        node_idx = idx[lo:hi]
        yn = y[node_idx]
        size = hi - lo
        c1 = int(yn.sum())
        c0 = size - c1
        best = -1
        if c0 and c1 and size >= min_samples_split and depth < max_depth and n_feat > 0:
            perm = list(range(n_feat))
            for t in range(n_feat - 1, 0, -1):
                state = (state + _GAMMA) & _MASK
                j = _mix64(state) % (t + 1)
                perm[t], perm[j] = perm[j], perm[t]
            xn = x[node_idx]
            best_score = math.inf
            evaluated = 0
            for f in perm:
                xf = xn[:, f]
                rn = int(xf.sum())
                ln = size - rn
                if rn == 0 or ln == 0:
                    # constant inside this node: skip without counting it
                    # toward the per-node feature budget
                    continue
                r1 = int((xf & yn).sum())
                l1 = c1 - r1
                l0 = ln - l1
                r0 = rn - r1
                t1 = 2.0 * l0 * l1 / ln
                t2 = 2.0 * r0 * r1 / rn
                score = t1 + t2
                if score < best_score:
                    best_score = score
                    best = f
                evaluated += 1
                if evaluated >= m_features:
                    break
        if best < 0:
            label[node] = 1 if c1 > c0 else 0
        else:
            goes_left = x[node_idx, best] == 0
            left_idx = node_idx[goes_left]
            right_idx = node_idx[~goes_left]
            mid = lo + len(left_idx)
            idx[lo:mid] = left_idx
            idx[mid:hi] = right_idx
            lid = n_nodes
            rid = n_nodes + 1
            n_nodes += 2
            feature[lid] = left[lid] = right[lid] = label[lid] = -1
            feature[rid] = left[rid] = right[rid] = label[rid] = -1
            feature[node] = best
            left[node] = lid
            right[node] = rid
            stack.append((rid, mid, hi, depth + 1))
            stack.append((lid, lo, mid, depth + 1))
    return n_nodes


def predict_tree(
    feature: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    label: np.ndarray,
    x: np.ndarray,
    out: np.ndarray,
) -> None:
    """Route every row of ``x`` to a leaf, writing leaf labels into ``out``."""
    n = x.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = np.nonzero(label[node] < 0)[0]
    while active.size:
        nd = node[active]
        go_right = x[active, feature[nd]] != 0
        node[active] = np.where(go_right, right[nd], left[nd])
        active = active[label[node[active]] < 0]
    out[:] = label[node].astype(np.uint8)
