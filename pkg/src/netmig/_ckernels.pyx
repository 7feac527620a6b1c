# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled provisioning kernels; same contract as ``netmig._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

ctypedef cnp.int64_t idx_t


cdef void _pair_volumes(const unsigned char[:] pce, double d, double u, bint multipath,
                        idx_t p0, idx_t p1, const idx_t[:] node_ptr, const idx_t[:] nodes,
                        double[:] vol) noexcept nogil:
    cdef idx_t q, e, n_full = 0, n_surv, rank, pick
    cdef bint full
    for q in range(p0, p1):
        full = True
        for e in range(node_ptr[q], node_ptr[q + 1]):
            if pce[nodes[e]] == 0:
                full = False
                break
        vol[q] = 1.0 if full else 0.0
        if full:
            n_full += 1
    if n_full == 0:
        n_surv = p1 - p0
        for q in range(p0, p1):
            vol[q] = 1.0
    else:
        n_surv = n_full
    if multipath:
        for q in range(p0, p1):
            vol[q] = vol[q] * d / n_surv
    else:
        pick = <idx_t>floor(u * n_surv)
        if pick >= n_surv:
            pick = n_surv - 1
        rank = 0
        for q in range(p0, p1):
            if vol[q] > 0.0:
                vol[q] = d if rank == pick else 0.0
                rank += 1


cdef void _volumes(const unsigned char[:] pce, const double[:] demand, const double[:] choice,
                   bint multipath, const idx_t[:] pair_ids, const idx_t[:] pair_ptr,
                   const idx_t[:] node_ptr, const idx_t[:] nodes, double[:] vol) noexcept nogil:
    cdef idx_t k, gid
    for k in range(pair_ptr.shape[0] - 1):
        if pair_ptr[k + 1] == pair_ptr[k]:
            continue
        gid = pair_ids[k]
        _pair_volumes(pce, demand[gid], choice[gid], multipath,
                      pair_ptr[k], pair_ptr[k + 1], node_ptr, nodes, vol)


def path_volumes(const unsigned char[:] pce, const double[:] demand, const double[:] choice,
                 bint multipath, const idx_t[:] pair_ids, const idx_t[:] pair_ptr,
                 const idx_t[:] node_ptr, const idx_t[:] nodes):
    vol = np.zeros(node_ptr.shape[0] - 1)
    cdef double[:] v = vol
    with nogil:
        _volumes(pce, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes, v)
    return vol


def island_loads(const double[:] vol, const idx_t[:] node_ptr, const idx_t[:] nodes, idx_t n):
    out = np.zeros(n)
    cdef double[:] o = out
    cdef idx_t q, e
    with nogil:
        for q in range(node_ptr.shape[0] - 1):
            if vol[q] != 0.0:
                for e in range(node_ptr[q], node_ptr[q + 1]):
                    o[nodes[e]] += vol[q]
    return out


cdef double _load_at(idx_t i, const unsigned char[:] pce, const double[:] demand,
                     const double[:] choice, bint multipath, const idx_t[:] pair_ids,
                     const idx_t[:] pair_ptr, const idx_t[:] node_ptr, const idx_t[:] nodes,
                     double[:] vol) noexcept nogil:
    cdef idx_t q, e
    cdef double total = 0.0
    _volumes(pce, demand, choice, multipath, pair_ids, pair_ptr, node_ptr, nodes, vol)
    for q in range(node_ptr.shape[0] - 1):
        if vol[q] != 0.0:
            for e in range(node_ptr[q], node_ptr[q + 1]):
                if nodes[e] == i:
                    total += vol[q]
                    break
    return total


def load_at(idx_t i, const unsigned char[:] pce, const double[:] demand, const double[:] choice,
            bint multipath, const idx_t[:] pair_ids, const idx_t[:] pair_ptr,
            const idx_t[:] node_ptr, const idx_t[:] nodes):
    cdef double[:] vol = np.zeros(node_ptr.shape[0] - 1)
    cdef double total
    with nogil:
        total = _load_at(i, pce, demand, choice, multipath, pair_ids, pair_ptr, node_ptr,
                         nodes, vol)
    return total


def load_at_batch(idx_t i, const unsigned char[:, :] pce_rows, const double[:] demand,
                  const double[:] choice, bint multipath, const idx_t[:] pair_ids,
                  const idx_t[:] pair_ptr, const idx_t[:] node_ptr, const idx_t[:] nodes):
    out = np.zeros(pce_rows.shape[0])
    cdef double[:] o = out
    cdef double[:] vol = np.zeros(node_ptr.shape[0] - 1)
    cdef idx_t s
    with nogil:
        for s in range(pce_rows.shape[0]):
            o[s] = _load_at(i, pce_rows[s], demand, choice, multipath, pair_ids, pair_ptr,
                            node_ptr, nodes, vol)
    return out
