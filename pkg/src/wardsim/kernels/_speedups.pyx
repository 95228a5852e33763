# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled daily contact/transmission kernel.

Bit-identical to kernels/reference.py: same splitmix64 chain, same draw
keys, same index arithmetic.  tests/test_kernels.py enforces the match.
"""

import numpy as np

from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t

DEF TWO53 = 9007199254740992.0


cdef inline uint64_t mix64(uint64_t x) noexcept nogil:
    x ^= x >> 30
    x *= 0xBF58476D1CE4E5B9ULL
    x ^= x >> 27
    x *= 0x94D049BB133111EBULL
    x ^= x >> 31
    return x


cdef inline double u01(uint64_t h) noexcept nogil:
    return (h >> 11) * (1.0 / TWO53)


cdef inline void try_expose(const int8_t* covid, uint8_t* exposed,
                            int64_t a, int64_t b, double p,
                            uint64_t h_trial) noexcept nogil:
    # covid states: 0=S, 2=I; trial keyed by the unordered pair
    cdef int64_t lo, hi, target
    cdef int8_t sa = covid[a]
    cdef int8_t sb = covid[b]
    if sa == 2 and sb == 0:
        target = b
    elif sa == 0 and sb == 2:
        target = a
    else:
        return
    lo = a if a < b else b
    hi = b if a < b else a
    if u01(mix64(mix64(h_trial ^ <uint64_t>lo) ^ <uint64_t>hi)) < p:
        exposed[target] = 1


def day_new_exposures(covid, active, home, visit_slot,
                      nbhd_indptr, nbhd_agents, slot_indptr, slot_agents,
                      nf_u, nf_v, wf_u, wf_v,
                      int k_nr, int k_wr, double p,
                      h_draw_nr, h_draw_wr,
                      h_trial_nr, h_trial_nf, h_trial_wr, h_trial_wf):
    """Fused contact generation + transmission; returns bool[n] exposures."""
    cdef const int8_t[::1] covid_v = np.ascontiguousarray(covid, dtype=np.int8)
    cdef const uint8_t[::1] active_v = np.ascontiguousarray(active, dtype=np.uint8)
    cdef const int32_t[::1] home_v = np.ascontiguousarray(home, dtype=np.int32)
    cdef const int32_t[::1] visit_v = np.ascontiguousarray(visit_slot, dtype=np.int32)
    cdef const int64_t[::1] nb_ptr = np.ascontiguousarray(nbhd_indptr, dtype=np.int64)
    cdef const int32_t[::1] nb_dat = np.ascontiguousarray(nbhd_agents, dtype=np.int32)
    cdef const int64_t[::1] sl_ptr = np.ascontiguousarray(slot_indptr, dtype=np.int64)
    cdef const int32_t[::1] sl_dat = np.ascontiguousarray(slot_agents, dtype=np.int32)
    cdef const int32_t[::1] nfu = np.ascontiguousarray(nf_u, dtype=np.int32)
    cdef const int32_t[::1] nfv = np.ascontiguousarray(nf_v, dtype=np.int32)
    cdef const int32_t[::1] wfu = np.ascontiguousarray(wf_u, dtype=np.int32)
    cdef const int32_t[::1] wfv = np.ascontiguousarray(wf_v, dtype=np.int32)

    cdef uint64_t hd_nr = h_draw_nr
    cdef uint64_t hd_wr = h_draw_wr
    cdef uint64_t ht_nr = h_trial_nr
    cdef uint64_t ht_nf = h_trial_nf
    cdef uint64_t ht_wr = h_trial_wr
    cdef uint64_t ht_wf = h_trial_wf

    cdef int64_t n = covid_v.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] out_v = out
    if p <= 0.0:
        return out.view(bool)

    cdef int64_t i, e, a, b, base, size, idx
    cdef int k
    cdef uint64_t h_agent, h
    cdef double u
    cdef const int8_t* cp = &covid_v[0] if n else NULL
    cdef uint8_t* ep = &out_v[0] if n else NULL

    with nogil:
        for e in range(nfu.shape[0]):
            a = nfu[e]
            b = nfv[e]
            if active_v[a] and active_v[b]:
                try_expose(cp, ep, a, b, p, ht_nf)
        for e in range(wfu.shape[0]):
            a = wfu[e]
            b = wfv[e]
            if active_v[a] and active_v[b]:
                try_expose(cp, ep, a, b, p, ht_wf)

        for i in range(n):
            if not active_v[i]:
                continue
            base = nb_ptr[home_v[i]]
            size = nb_ptr[home_v[i] + 1] - base
            if size > 0:
                h_agent = mix64(hd_nr ^ <uint64_t>i)
                for k in range(k_nr):
                    h = mix64(h_agent ^ <uint64_t>k)
                    u = u01(h)
                    idx = <int64_t>(u * size)
                    if idx >= size:
                        idx = size - 1
                    b = nb_dat[base + idx]
                    if b != i and active_v[b]:
                        try_expose(cp, ep, i, b, p, ht_nr)
            if visit_v[i] >= 0:
                base = sl_ptr[visit_v[i]]
                size = sl_ptr[visit_v[i] + 1] - base
                if size > 0:
                    h_agent = mix64(hd_wr ^ <uint64_t>i)
                    for k in range(k_wr):
                        h = mix64(h_agent ^ <uint64_t>k)
                        u = u01(h)
                        idx = <int64_t>(u * size)
                        if idx >= size:
                            idx = size - 1
                        b = sl_dat[base + idx]
                        if b != i and active_v[b]:
                            try_expose(cp, ep, i, b, p, ht_wr)

    return out.view(bool)


def mix64_check(x):
    """Scalar mix64 exposed for the cross-implementation RNG test."""
    cdef uint64_t v = x
    return mix64(v)
