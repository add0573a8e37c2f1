"""Periodic continued fraction of xi = sqrt(D) or (sqrt(D) - 1)/2.

The expansion is generated with the integer-only PQa recurrence

    u_i = floor((P_i + sqrt D) / Q_i)
    P_{i+1} = u_i Q_i - P_i
    Q_{i+1} = (D - P_{i+1}^2) / Q_i

starting from the seeds stored on the field context.  The complete quotient
c_i is (P_i + sqrt D) / Q_i exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .quad_core import FieldCtx, QuadElem, Surd

__all__ = [
    "CfExpansion",
    "ConvergentStream",
    "PeriodLimitExceeded",
    "expand",
    "complete_quotient",
    "convergents",
    "convergent_at",
]


class PeriodLimitExceeded(Exception):
    """The minimal period is longer than the caller allowed."""

    def __init__(self, D: int, limit: int):
        super().__init__(f"period of D={D} exceeds {limit}")
        self.D = D
        self.limit = limit


@dataclass(frozen=True)
class CfExpansion:
    ctx: FieldCtx
    u0: int
    period: tuple[int, ...]
    # pq_track[k] = (P_k, Q_k) for k = 0..s; entry 0 is the seed of xi
    pq_track: tuple[tuple[int, int], ...]

    @property
    def s(self) -> int:
        return len(self.period)

    def u(self, i: int) -> int:
        """Partial quotient u_i, any i >= 0."""
        if i == 0:
            return self.u0
        return self.period[(i - 1) % len(self.period)]

    def PQ(self, k: int) -> tuple[int, int]:
        """(P_k, Q_k) for any k >= 0, wrapping through the period."""
        if k <= len(self.period):
            return self.pq_track[k]
        return self.pq_track[(k - 1) % len(self.period) + 1]

    def Q(self, k: int) -> int:
        return self.PQ(k)[1]


def expand(ctx: FieldCtx, max_period: int | None = None) -> CfExpansion:
    """Minimal-period expansion of xi for the field ``ctx``.

    Raises ``PeriodLimitExceeded`` as soon as more than ``max_period``
    partial quotients have been produced without closing the cycle.
    """
    D = ctx.D
    r = ctx.isqrt_D
    P, Q = ctx.xi_P0, ctx.xi_Q0
    track = [(P, Q)]
    u0 = (P + r) // Q
    P = u0 * Q - P
    Q = (D - P * P) // Q
    start = (P, Q)
    track.append(start)
    period = []
    limit = max_period if max_period is not None else -1
    while True:
        u = (P + r) // Q
        period.append(u)
        P = u * Q - P
        Q = (D - P * P) // Q
        if (P, Q) == start:
            break
        if len(period) == limit:
            raise PeriodLimitExceeded(D, limit)
        track.append((P, Q))
    exp = CfExpansion(ctx, u0, tuple(period), tuple(track))
    _validate(exp)
    return exp


def _validate(exp: CfExpansion) -> None:
    per = exp.period
    terminal = 2 * exp.u0 + (1 if exp.ctx.cls == 1 else 0)
    if per[-1] != terminal:
        raise ArithmeticError(f"D={exp.ctx.D}: u_s={per[-1]}, expected {terminal}")
    body = per[:-1]
    if body != body[::-1]:
        raise ArithmeticError(f"D={exp.ctx.D}: period body is not a palindrome")
    # the last complete quotient of the period is u0 + 1/... shifted by xi
    if exp.pq_track[-1][1] != exp.ctx.xi_Q0:
        raise ArithmeticError(f"D={exp.ctx.D}: Q_s != Q_0")


def complete_quotient(exp: CfExpansion, i: int) -> Surd:
    """c_i = (P_i + sqrt D)/Q_i for i >= 1; larger i wrap by periodicity."""
    if i < 1:
        raise ValueError("complete quotients are indexed from 1")
    P, Q = exp.PQ(i)
    return Surd(P, Q, exp.ctx)


class ConvergentStream:
    """Iterates (i, p_i, q_i) for i = -1, 0, 1, ... without end."""

    def __init__(self, exp: CfExpansion):
        self.exp = exp
        self.i = -1
        self.prev = (0, 1)  # (p_{-2}, q_{-2})
        self.cur = (1, 0)  # (p_{-1}, q_{-1})

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        return self

    def __next__(self) -> tuple[int, int, int]:
        out = (self.i, *self.cur)
        self.i += 1
        u = self.exp.u(self.i)
        (p0, q0), (p1, q1) = self.prev, self.cur
        self.prev, self.cur = self.cur, (u * p1 + p0, u * q1 + q0)
        # p_i q_{i-1} - p_{i-1} q_i = (-1)^(i-1)
        det = self.cur[0] * q1 - p1 * self.cur[1]
        assert det == (1 if (self.i - 1) % 2 == 0 else -1), "determinant identity broken"
        return out


def convergents(exp: CfExpansion) -> ConvergentStream:
    return ConvergentStream(exp)


def convergent_at(exp: CfExpansion, i: int) -> tuple[int, int]:
    """(p_i, q_i) for a single index i >= -1."""
    if i < -1:
        raise ValueError("convergents start at i = -1")
    p0, q0, p1, q1 = 0, 1, 1, 0
    for k in range(i + 1):
        u = exp.u(k)
        p0, q0, p1, q1 = p1, q1, u * p1 + p0, u * q1 + q0
    return p1, q1


def delta_elem(exp: CfExpansion, p: int, q: int) -> QuadElem:
    """p + q*delta as a field element."""
    return QuadElem.from_basis(p, q, exp.ctx)
