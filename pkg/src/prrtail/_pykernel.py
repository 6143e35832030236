"""Pure-Python twin of ``_kernel.pyx``; same tables, same random stream."""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class Stream:
    """Counter-based stream keyed by (seed, run)."""

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, run: int):
        self.key = mix64((seed & MASK) ^ mix64((run * GOLDEN + 1) & MASK))
        self.counter = 0

    def unit(self) -> float:
        self.counter += 1
        return (mix64((self.key + self.counter * GOLDEN) & MASK) >> 11) * INV53


def simulate_tables(n_star, c_p, n_runs, seed, run_offset, step_cap,
                    br_cum, br_kind, br_r, br_s1_minus, cost, base,
                    arm_cum, arm_count, arm_lo, arm_hi):
    nb = len(br_cum)
    out = np.zeros(n_runs)
    status = np.zeros(n_runs, dtype=np.int32)
    br_cum = br_cum.tolist()
    cost_l = cost.tolist()
    base_l = base.tolist()
    arm_cum_l = arm_cum.tolist()
    for run in range(n_runs):
        rng = Stream(seed, run + run_offset)
        total = 0.0
        steps = 0
        stack = [n_star]
        bad = 0
        while stack and not bad:
            n = stack.pop()
            while n >= c_p:
                steps += 1
                if steps > step_cap:
                    bad = 1
                    break
                u = rng.unit()
                k = 0
                while k < nb - 1 and u >= br_cum[k]:
                    k += 1
                total += cost_l[k][n]
                kind = br_kind[k]
                if kind == 0:
                    v = int(rng.unit() * n)
                elif kind == 1:
                    i = int(rng.unit() * n)
                    v = max(i, n - 1 - i)
                else:
                    u = rng.unit()
                    j = 0
                    cnt = arm_count[k]
                    while j < cnt - 1 and u >= arm_cum_l[k][j]:
                        j += 1
                    lo = int(arm_lo[k, j, n])
                    if kind == 2:
                        v = lo
                    else:
                        hi = int(arm_hi[k, j, n])
                        v = lo + int(rng.unit() * (hi - lo + 1))
                s1 = base_l[k][n] - v if br_s1_minus[k] else v
                if s1 > n:
                    bad = 2
                    break
                if br_r[k] == 2:
                    s2 = base_l[k][n] - v
                    if s2 > n:
                        bad = 2
                        break
                    if s2 >= c_p:
                        stack.append(s2)
                n = s1
        out[run] = total
        status[run] = bad
    return out, status
