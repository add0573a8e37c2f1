"""Fused PQa + maximum-norm kernel used by the scanner.

``max_norm`` is plain Python on arbitrary-size ints.  ``max_norm_numba``
is the same loop compiled with numba on int64; it is exact only while
every intermediate fits, which holds for D < NUMBA_D_LIMIT:
P, Q < 2 sqrt(D) and u^2 * N_{i+1} <= 8 D^(3/2) < 2^63.
"""
from __future__ import annotations

from math import isqrt

import numpy as np

from .cf_engine import PeriodLimitExceeded

NUMBA_D_LIMIT = 10 ** 11


def max_norm(D: int, max_period: int | None = None) -> tuple[int, int, int, int, int, int]:
    """(s, N, M, witness_i, witness_r, rank) for squarefree D.

    Witness ties go to the smallest odd i >= 1, then the smallest r; the
    row i = -1 only wins when nothing else attains M.
    """
    r = isqrt(D)
    if D & 3 == 1:
        P, Q = -1, 2
    else:
        P, Q = 0, 1
    Q0 = Q
    u0 = (P + r) // Q
    P = u0 * Q - P
    Q = (D - P * P) // Q
    P1, Q1 = P, Q
    per = []
    Ns = [1, Q1 // Q0]  # N_{-1}, N_0, ...
    limit = -1 if max_period is None else max_period
    while True:
        u = (P + r) // Q
        per.append(u)
        P = u * Q - P
        Q = (D - P * P) // Q
        if P == P1 and Q == Q1:
            break
        if len(per) == limit:
            raise PeriodLimitExceeded(D, limit)
        Ns.append(Q // Q0)
    s = len(per)
    # periodic continuation: N_{k+s} = N_k for k >= -1 (N_{s-1} = N_{-1} = 1)
    base = Ns[1:]
    Ns = [1] + base * 2 + base[:2]
    # rows i and i+s coincide when s is even
    top = s if s % 2 == 0 else 2 * s - 2
    best_M = -1
    wi = wr = 0
    for i in (*range(1, top, 2), -1):
        n0 = Ns[i + 1]
        n1 = Ns[i + 2]
        n2 = Ns[i + 3]
        u = per[(i + 1) % s]  # u_{i+2}
        T = (n2 + u * u * n1 - n0) // u
        if u & 1:
            k = u >> 1
            if T > u * n1:
                k += 1
        else:
            k = u >> 1
        m = n0 - k * k * n1 + k * T
        if m > best_M:
            best_M, wi, wr = m, i, k
    evens = sorted(set(Ns[1:2 * s + 1:2]))
    N = evens[0]
    rank = evens.index(Ns[wi + 2]) + 1
    return s, N, best_M, wi, wr, rank


_numba_impl = None


def _compile():
    import numba

    @numba.njit(cache=True)
    def kern(D, r, limit):
        if D % 4 == 1:
            P = -1
            Q = 2
        else:
            P = 0
            Q = 1
        Q0 = Q
        u0 = (P + r) // Q
        P = u0 * Q - P
        Q = (D - P * P) // Q
        P1 = P
        Q1 = Q
        cap = 64
        per = np.empty(cap, np.int64)
        Ns = np.empty(cap + 1, np.int64)
        Ns[0] = Q1 // Q0
        s = 0
        while True:
            u = (P + r) // Q
            if s == cap:
                cap *= 2
                per2 = np.empty(cap, np.int64)
                per2[:s] = per[:s]
                per = per2
                N2 = np.empty(cap + 1, np.int64)
                N2[:s + 1] = Ns[:s + 1]
                Ns = N2
            per[s] = u
            s += 1
            P = u * Q - P
            Q = (D - P * P) // Q
            if P == P1 and Q == Q1:
                break
            if s == limit:
                return -1, 0, 0, 0, 0, 0
            Ns[s] = Q // Q0
        # Ns[k] = N_k for k = 0..s-1; N_{-1} = 1 = N_{s-1}
        top = s if s % 2 == 0 else 2 * s - 2
        best_M = -1
        wi = 0
        wr = 0
        i = 1
        while True:
            if i >= top:
                i = -1
            n0 = Ns[i % s] if i >= 0 else 1
            n1 = Ns[(i + 1) % s]
            n2 = Ns[(i + 2) % s]
            u = per[(i + 1) % s]
            T = (n2 + u * u * n1 - n0) // u
            k = u >> 1
            if (u & 1) and T > u * n1:
                k += 1
            m = n0 - k * k * n1 + k * T
            if m > best_M:
                best_M = m
                wi = i
                wr = k
            if i == -1:
                break
            i += 2
        # negative norms: N_i for even i over two periods
        ev = np.empty(s, np.int64)
        c = 0
        for k2 in range(0, 2 * s, 2):
            ev[c] = Ns[k2 % s]
            c += 1
        ev = np.unique(ev[:c])
        target = Ns[(wi + 1) % s]
        rank = 0
        for t in range(ev.shape[0]):
            if ev[t] == target:
                rank = t + 1
                break
        return s, ev[0], best_M, wi, wr, rank

    return kern


def max_norm_numba(D: int, limit: int = -1) -> tuple[int, int, int, int, int, int]:
    global _numba_impl
    if D >= NUMBA_D_LIMIT:
        raise ValueError("D too large for the int64 kernel")
    if _numba_impl is None:
        _numba_impl = _compile()
    return tuple(int(v) for v in _numba_impl(D, isqrt(D), limit))
