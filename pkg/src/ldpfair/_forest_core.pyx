# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernels: bootstrap, Gini split search, and traversal.

Twin of ``ldpfair._forest_py``: both consume the same splitmix64 stream and
use the same double-precision split score, so grown trees are bit-identical
across backends.
"""

from libc.stdlib cimport free, malloc
from libc.stdint cimport int32_t, uint8_t, uint64_t

cdef extern from "math.h":
    double INFINITY

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15UL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9UL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBUL
    return z ^ (z >> 31)


def grow_tree(const uint8_t[:, ::1] x, const uint8_t[::1] y,
              int32_t[::1] feature, int32_t[::1] left, int32_t[::1] right,
              int32_t[::1] label, unsigned long long seed, long long max_depth,
              long long min_samples_split, long long m_features, bint bootstrap):
    """Grow one tree into the preallocated node arrays; returns the node count."""
    cdef Py_ssize_t n = x.shape[0]
    cdef int n_feat = <int>x.shape[1]
    cdef uint64_t state = <uint64_t>seed
    cdef Py_ssize_t i, lo, hi, mid, a
    cdef int node, lid, rid, depth, sp, t, f, best, evaluated, n_nodes
    cdef int32_t swap
    cdef long long c0, c1, ln, rn, l0, l1, r0, r1, size
    cdef double t1, t2, score, best_score
    cdef uint8_t v

    cdef int32_t* idx = <int32_t*>malloc(n * sizeof(int32_t))
    cdef int32_t* tmp = <int32_t*>malloc(n * sizeof(int32_t))
    cdef int32_t* perm = <int32_t*>malloc((n_feat if n_feat > 0 else 1) * sizeof(int32_t))
    cdef int stack_cap = n_feat + 3
    cdef int32_t* stack = <int32_t*>malloc(4 * stack_cap * sizeof(int32_t))
    if idx == NULL or tmp == NULL or perm == NULL or stack == NULL:
        free(idx); free(tmp); free(perm); free(stack)
        raise MemoryError("tree buffers")

    with nogil:
        if bootstrap:
            for i in range(n):
                state += GAMMA
                idx[i] = <int32_t>(mix64(state) % <uint64_t>n)
        else:
            for i in range(n):
                idx[i] = <int32_t>i

        feature[0] = -1; left[0] = -1; right[0] = -1; label[0] = -1
        n_nodes = 1
        stack[0] = 0; stack[1] = 0; stack[2] = <int32_t>n; stack[3] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = stack[4 * sp]
            lo = stack[4 * sp + 1]
            hi = stack[4 * sp + 2]
            depth = stack[4 * sp + 3]
            size = hi - lo
            c1 = 0
            for i in range(lo, hi):
                c1 += y[idx[i]]
            c0 = size - c1
            best = -1
            if c0 != 0 and c1 != 0 and size >= min_samples_split and depth < max_depth and n_feat > 0:
                for t in range(n_feat):
                    perm[t] = t
                for t in range(n_feat - 1, 0, -1):
                    state += GAMMA
                    f = <int>(mix64(state) % <uint64_t>(t + 1))
                    swap = perm[t]; perm[t] = perm[f]; perm[f] = swap
                best_score = INFINITY
                evaluated = 0
                for t in range(n_feat):
                    f = perm[t]
                    rn = 0
                    r1 = 0
                    for i in range(lo, hi):
                        v = x[idx[i], f]
                        if v != 0:
                            rn += 1
                            r1 += y[idx[i]]
                    ln = size - rn
                    if rn == 0 or ln == 0:
                        continue
                    l1 = c1 - r1
                    l0 = ln - l1
                    r0 = rn - r1
                    t1 = 2.0 * <double>l0 * <double>l1 / <double>ln
                    t2 = 2.0 * <double>r0 * <double>r1 / <double>rn
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
                a = 0
                for i in range(lo, hi):
                    if x[idx[i], best] == 0:
                        tmp[a] = idx[i]
                        a += 1
                mid = lo + a
                for i in range(lo, hi):
                    if x[idx[i], best] != 0:
                        tmp[a] = idx[i]
                        a += 1
                for i in range(size):
                    idx[lo + i] = tmp[i]
                lid = n_nodes
                rid = n_nodes + 1
                n_nodes += 2
                feature[lid] = -1; left[lid] = -1; right[lid] = -1; label[lid] = -1
                feature[rid] = -1; left[rid] = -1; right[rid] = -1; label[rid] = -1
                feature[node] = best
                left[node] = lid
                right[node] = rid
                stack[4 * sp] = rid
                stack[4 * sp + 1] = <int32_t>mid
                stack[4 * sp + 2] = <int32_t>hi
                stack[4 * sp + 3] = depth + 1
                sp += 1
                stack[4 * sp] = lid
                stack[4 * sp + 1] = <int32_t>lo
                stack[4 * sp + 2] = <int32_t>mid
                stack[4 * sp + 3] = depth + 1
                sp += 1

    free(idx); free(tmp); free(perm); free(stack)
    return n_nodes


def predict_tree(const int32_t[::1] feature, const int32_t[::1] left,
                 const int32_t[::1] right, const int32_t[::1] label,
                 const uint8_t[:, ::1] x, uint8_t[::1] out):
    """Route every row of ``x`` to a leaf, writing leaf labels into ``out``."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef int node
    with nogil:
        for i in range(n):
            node = 0
            while label[node] < 0:
                if x[i, feature[node]] != 0:
                    node = right[node]
                else:
                    node = left[node]
            out[i] = <uint8_t>label[node]
