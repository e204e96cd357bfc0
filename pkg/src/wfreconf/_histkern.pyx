# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled history enumeration kernel; same contract as ``_histkern_py``.

Truth tables are split into 64-bit words so the inner loop is plain C.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free


cdef inline void _split(object table, int nwords, uint64_t *dst):
    cdef int w
    for w in range(nwords):
        dst[w] = <uint64_t>((table >> (64 * w)) & 0xFFFFFFFFFFFFFFFF)


def consistent_subsets(int n, int nbits, list specs, long long universe_mask):
    cdef int nwords = (nbits + 63) // 64
    cdef int nspecs = len(specs)
    cdef int s, j, k, w, total_arcs = 0
    cdef uint64_t tail
    cdef uint64_t *vert
    cdef uint64_t *neg
    cdef int *arc_src
    cdef int *arc_start
    cdef long long *forced
    cdef uint64_t *acc
    cdef long long h, hh, limit
    cdef bint alive

    for spec in specs:
        total_arcs += len(spec[1])

    vert = <uint64_t *>malloc(max(1, nspecs * n * nwords) * sizeof(uint64_t))
    neg = <uint64_t *>malloc(max(1, total_arcs * nwords) * sizeof(uint64_t))
    arc_src = <int *>malloc(max(1, total_arcs) * sizeof(int))
    arc_start = <int *>malloc((nspecs * (n + 1) + 1) * sizeof(int))
    forced = <long long *>malloc(max(1, nspecs) * sizeof(long long))
    acc = <uint64_t *>malloc(nwords * sizeof(uint64_t))
    if not (vert and neg and arc_src and arc_start and forced and acc):
        raise MemoryError()

    full = (<object>1 << nbits) - 1
    tail = 0xFFFFFFFFFFFFFFFF if nbits % 64 == 0 else ((<uint64_t>1) << (nbits % 64)) - 1
    out = []
    try:
        k = 0
        for s in range(nspecs):
            vtables, arcs, fmask = specs[s]
            forced[s] = fmask
            for j in range(n):
                _split(vtables[j], nwords, vert + (s * n + j) * nwords)
            by_dst = [[] for _ in range(n)]
            for src, dst, table in arcs:
                by_dst[dst].append((src, table))
            for j in range(n):
                arc_start[s * (n + 1) + j] = k
                for src, table in by_dst[j]:
                    arc_src[k] = src
                    _split(~table & full, nwords, neg + k * nwords)
                    k += 1
            arc_start[s * (n + 1) + n] = k

        limit = (<long long>1) << n
        for h in range(limit):
            if h & ~universe_mask:
                continue
            for w in range(nwords):
                acc[w] = 0xFFFFFFFFFFFFFFFF
            acc[nwords - 1] = tail
            alive = True
            for s in range(nspecs):
                hh = h | forced[s]
                for j in range(n):
                    if not (hh >> j) & 1:
                        continue
                    alive = False
                    for w in range(nwords):
                        acc[w] &= vert[(s * n + j) * nwords + w]
                        if acc[w]:
                            alive = True
                    if not alive:
                        break
                    for k in range(arc_start[s * (n + 1) + j], arc_start[s * (n + 1) + j + 1]):
                        if (hh >> arc_src[k]) & 1:
                            continue
                        alive = False
                        for w in range(nwords):
                            acc[w] &= neg[k * nwords + w]
                            if acc[w]:
                                alive = True
                        if not alive:
                            break
                    if not alive:
                        break
                if not alive:
                    break
            if alive:
                out.append(h)
    finally:
        free(vert)
        free(neg)
        free(arc_src)
        free(arc_start)
        free(forced)
        free(acc)
    return out
