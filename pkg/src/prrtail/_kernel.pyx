# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernel for the PRR stack machine.

Everything that depends on a size (pre-processing cost, discrete arm
values, piece bounds, the base of ``base - v``) is tabulated for every
size up to n* before the call, so the loop below only does integer work
and draws random numbers.  The generator must stay bit-identical with
``_pykernel.py``.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double next_unit(uint64_t key, uint64_t* counter) nogil:
    counter[0] += 1
    return <double>(mix64(key + counter[0] * GOLDEN) >> 11) * (1.0 / 9007199254740992.0)


def simulate_tables(int n_star, int c_p, long n_runs, uint64_t seed, long run_offset, long step_cap,
                    double[::1] br_cum, int[::1] br_kind, int[::1] br_r, int[::1] br_s1_minus,
                    double[:, ::1] cost, int64_t[:, ::1] base,
                    double[:, ::1] arm_cum, int[::1] arm_count,
                    int64_t[:, :, ::1] arm_lo, int64_t[:, :, ::1] arm_hi):
    """Return (costs, status); status 0 ok, 1 step cap, 2 size above n."""
    cdef long nb = br_cum.shape[0]
    out = np.zeros(n_runs, dtype=np.float64)
    status = np.zeros(n_runs, dtype=np.int32)
    cdef double[::1] out_v = out
    cdef int[::1] st_v = status
    stack_arr = np.zeros(n_star + 64, dtype=np.int64)
    cdef int64_t[::1] stack = stack_arr
    cdef long cap = stack.shape[0]
    cdef long run, steps, sp, k, j
    cdef uint64_t key, counter
    cdef int64_t n, v, i, s1, s2, lo, hi
    cdef double u, total
    cdef int kind, bad
    with nogil:
        for run in range(n_runs):
            key = mix64(seed ^ mix64(<uint64_t>(run + run_offset) * GOLDEN + 1))
            counter = 0
            total = 0.0
            steps = 0
            sp = 0
            stack[sp] = n_star
            sp += 1
            bad = 0
            while sp > 0:
                sp -= 1
                n = stack[sp]
                while n >= c_p:
                    steps += 1
                    if steps > step_cap:
                        bad = 1
                        break
                    u = next_unit(key, &counter)
                    k = 0
                    while k < nb - 1 and u >= br_cum[k]:
                        k += 1
                    total += cost[k, n]
                    kind = br_kind[k]
                    if kind == 0:
                        v = <int64_t>(next_unit(key, &counter) * n)
                    elif kind == 1:
                        i = <int64_t>(next_unit(key, &counter) * n)
                        v = i if i > n - 1 - i else n - 1 - i
                    else:
                        u = next_unit(key, &counter)
                        j = 0
                        while j < arm_count[k] - 1 and u >= arm_cum[k, j]:
                            j += 1
                        lo = arm_lo[k, j, n]
                        if kind == 2:
                            v = lo
                        else:
                            hi = arm_hi[k, j, n]
                            v = lo + <int64_t>(next_unit(key, &counter) * (hi - lo + 1))
                    if br_s1_minus[k]:
                        s1 = base[k, n] - v
                    else:
                        s1 = v
                    if s1 > n:
                        bad = 2
                        break
                    if br_r[k] == 2:
                        s2 = base[k, n] - v
                        if s2 > n:
                            bad = 2
                            break
                        if s2 >= c_p:
                            if sp >= cap:
                                bad = 2
                                break
                            stack[sp] = s2
                            sp += 1
                    n = s1
                if bad:
                    break
            out_v[run] = total
            st_v[run] = bad
    return out, status
