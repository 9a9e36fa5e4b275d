# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef Py_ssize_t _find(Py_ssize_t[::1] root, Py_ssize_t x) noexcept nogil:
    cdef Py_ssize_t r = x, nxt
    while root[r] != r:
        r = root[r]
    while root[x] != r:
        nxt = root[x]
        root[x] = r
        x = nxt
    return r


def decode_locus(genes):
    cdef const cnp.int64_t[::1] g = np.ascontiguousarray(genes, dtype=np.int64)
    cdef Py_ssize_t n = g.shape[0], i, a, b, k = 0
    cdef Py_ssize_t[::1] root = np.arange(n, dtype=np.intp)
    cdef cnp.int64_t[::1] comp = np.full(n, -1, dtype=np.int64)
    labels = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = labels
    for i in range(n):
        if g[i] < 0 or g[i] >= n:
            raise ValueError("gene out of range")
    with nogil:
        for i in range(n):
            a = _find(root, i)
            b = _find(root, <Py_ssize_t>g[i])
            if a != b:
                # smaller index becomes the representative
                if a < b:
                    root[b] = a
                else:
                    root[a] = b
        for i in range(n):
            a = _find(root, i)
            if comp[a] < 0:
                comp[a] = k
                k += 1
            out[i] = comp[a]
    return labels, int(k)


def connectivity_counts(labels, const cnp.int64_t[:, :] ranks, Py_ssize_t L):
    cdef const cnp.int64_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = lab.shape[0], i, j
    counts_arr = np.zeros(L, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    with nogil:
        for i in range(n):
            for j in range(L):
                if lab[ranks[i, j]] != lab[i]:
                    counts[j] += 1
    return counts_arr


def centroid_spread(points, labels, Py_ssize_t k):
    cdef const double[:, ::1] X = np.ascontiguousarray(points, dtype=np.float64)
    cdef const cnp.int64_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, j, c
    cdef double[:, ::1] s = np.zeros((k, d))
    cdef double[:, ::1] comp = np.zeros((k, d))
    cdef double[::1] cnt = np.zeros(k)
    cdef double y, t, diff, sq, dev = 0.0, sqsum = 0.0
    with nogil:
        # Kahan-Babuska summation for the per-cluster sums
        for i in range(n):
            c = lab[i]
            cnt[c] += 1.0
            for j in range(d):
                y = X[i, j]
                t = s[c, j] + y
                if abs(s[c, j]) >= abs(y):
                    comp[c, j] += (s[c, j] - t) + y
                else:
                    comp[c, j] += (y - t) + s[c, j]
                s[c, j] = t
        for c in range(k):
            for j in range(d):
                s[c, j] = (s[c, j] + comp[c, j]) / cnt[c]
        for i in range(n):
            c = lab[i]
            sq = 0.0
            for j in range(d):
                diff = X[i, j] - s[c, j]
                sq += diff * diff
            dev += sqrt(sq)
            sqsum += sq
    return dev, sqsum


def pareto_ranks(F):
    cdef const double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t m = f.shape[0], nobj = f.shape[1], p, q, o, front = 0, remaining
    cdef bint le, lt
    cdef cnp.int64_t[::1] count = np.zeros(m, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] dom = np.zeros((m, m), dtype=np.uint8)
    ranks = np.full(m, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] r = ranks
    cdef cnp.int64_t[::1] cur = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] nxt = np.empty(m, dtype=np.int64)
    cdef Py_ssize_t ncur = 0, nnext
    with nogil:
        for p in range(m):
            for q in range(m):
                if p == q:
                    continue
                le = True
                lt = False
                for o in range(nobj):
                    if f[p, o] > f[q, o]:
                        le = False
                        break
                    if f[p, o] < f[q, o]:
                        lt = True
                if le and lt:
                    dom[p, q] = 1
                    count[q] += 1
        for p in range(m):
            if count[p] == 0:
                cur[ncur] = p
                ncur += 1
        while ncur > 0:
            nnext = 0
            for p in range(ncur):
                r[cur[p]] = front
            for p in range(ncur):
                for q in range(m):
                    if dom[cur[p], q]:
                        count[q] -= 1
                        if count[q] == 0:
                            nxt[nnext] = q
                            nnext += 1
            for p in range(nnext):
                cur[p] = nxt[p]
            ncur = nnext
            front += 1
    return ranks


def prim_mst(points):
    cdef const double[:, ::1] X = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], it, v, u, j, best_v
    cdef cnp.int64_t nlo, nhi
    parent_arr = np.zeros(n, dtype=np.int64)
    weight_arr = np.zeros(n)
    cdef cnp.int64_t[::1] parent = parent_arr
    cdef double[::1] weight = weight_arr
    cdef double[::1] key = np.empty(n)
    cdef cnp.int64_t[::1] lo = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] hi = np.arange(n, dtype=np.int64)
    cdef cnp.uint8_t[::1] in_tree = np.zeros(n, dtype=np.uint8)
    cdef double best, dist, t
    with nogil:
        in_tree[0] = 1
        for v in range(n):
            dist = 0.0
            for j in range(d):
                t = X[v, j] - X[0, j]
                dist += t * t
            key[v] = sqrt(dist)
        u = 0
        for it in range(n - 1):
            best = INFINITY
            best_v = -1
            for v in range(n):
                if in_tree[v]:
                    continue
                if best_v < 0 or key[v] < best or (key[v] == best and (
                        lo[v] < lo[best_v] or (lo[v] == lo[best_v] and hi[v] < hi[best_v]))):
                    best = key[v]
                    best_v = v
            u = best_v
            in_tree[u] = 1
            weight[u] = key[u]
            for v in range(n):
                if in_tree[v]:
                    continue
                dist = 0.0
                for j in range(d):
                    t = X[v, j] - X[u, j]
                    dist += t * t
                dist = sqrt(dist)
                nlo = v if v < u else u
                nhi = u if v < u else v
                if dist < key[v] or (dist == key[v] and (
                        nlo < lo[v] or (nlo == lo[v] and nhi < hi[v]))):
                    key[v] = dist
                    parent[v] = u
                    lo[v] = nlo
                    hi[v] = nhi
    return parent_arr, weight_arr
