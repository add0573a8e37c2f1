"""Norms of indecomposable integers and the upper bounds they are tested against.

Conventions: delta_i = p_i + q_i*delta with p_i/q_i the convergents of xi,
N_i = |N(delta_i)| and delta_{i,r} = delta_i + r*delta_{i+1}.  For i >= -1 the
absolute norm is read straight off the PQa track: N_i = Q_{i+1} / Q_0, and
the sign of N(delta_i) is (-1)^(i+1).

The hot path (``analyze``) works only with these small integers; the
big convergents p_i, q_i are materialised on demand for the cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import isqrt

import numpy as np

from .cf_engine import CfExpansion, convergent_at, expand
from .quad_core import FieldCtx, QuadElem, QuadNumber, field, norm, sign_surd

__all__ = [
    "NormProfile",
    "MaxRecord",
    "AnalysisRecord",
    "RangeError",
    "NoResidueRoot",
    "TheoremViolation",
    "semiconvergent",
    "semiconvergent_norm",
    "semiconvergent_norm_direct",
    "t_sum",
    "argmax_r",
    "argmax_r_sweep",
    "norm_profile",
    "global_max",
    "compute_a",
    "bounds",
    "r_of_D",
    "format_r",
    "analyze",
    "analyze_expansion",
]


class RangeError(ValueError):
    pass


class NoResidueRoot(ArithmeticError):
    pass


class TheoremViolation(AssertionError):
    """M reached the proven upper bound; the arithmetic is broken somewhere."""


# -- norm profile -----------------------------------------------------------

@dataclass(frozen=True)
class NormProfile:
    exp: CfExpansion
    # values[k] = N_{k-1}, k = 0 .. 2s+1, so that N_{-1} .. N_{2s} are covered
    values: tuple[int, ...]
    unit_norm_sign: int

    def N(self, i: int) -> int:
        """|N(delta_i)| for i >= -1, using periodicity past the table."""
        if i + 1 < len(self.values):
            return self.values[i + 1]
        s = self.exp.s
        return self.values[(i + 1 - 1) % s + 1]

    def signed(self, i: int) -> int:
        return self.N(i) if i % 2 else -self.N(i)

    @property
    def min_negative(self) -> int:
        """N = min{N_i : i even}."""
        s = self.exp.s
        return min(self.N(i) for i in range(0, 2 * s, 2))

    def negative_norms(self) -> list[int]:
        """Distinct N_i, i even, ascending (so the largest negative norm first)."""
        s = self.exp.s
        return sorted({self.N(i) for i in range(0, 2 * s, 2)})


def _abs_norms(exp: CfExpansion, upto: int) -> list[int]:
    """[N_{-1}, N_0, ..., N_upto] from the Q track."""
    Q0 = exp.ctx.xi_Q0
    out = []
    for k in range(upto + 2):
        q = exp.Q(k)
        if q % Q0:
            raise ArithmeticError(f"D={exp.ctx.D}: Q_{k}={q} not divisible by {Q0}")
        out.append(q // Q0)
    return out


def norm_profile(exp: CfExpansion) -> NormProfile:
    vals = _abs_norms(exp, 2 * exp.s)
    # fundamental unit is delta_{s-1}
    unit_sign = 1 if (exp.s - 1) % 2 else -1
    return NormProfile(exp, tuple(vals), unit_sign)


# -- semiconvergents --------------------------------------------------------

def _check_ir(exp: CfExpansion, i: int, r: int) -> int:
    if i < -1 or i % 2 == 0:
        raise RangeError(f"i must be odd and >= -1, got {i}")
    u = exp.u(i + 2)
    if not 0 <= r <= u:
        raise RangeError(f"r={r} outside [0, {u}]")
    return u


def semiconvergent(exp: CfExpansion, i: int, r: int) -> QuadElem:
    """delta_{i,r} = delta_i + r*delta_{i+1} as an exact field element."""
    _check_ir(exp, i, r)
    p0, q0 = convergent_at(exp, i)
    p1, q1 = convergent_at(exp, i + 1)
    return QuadElem.from_basis(p0 + r * p1, q0 + r * q1, exp.ctx)


def t_sum(Ni: int, Ni1: int, Ni2: int, u: int) -> int:
    """T^(a)_{i+1} + T^(b)_{i+1} = (N_{i+2} + u^2 N_{i+1} - N_i) / u."""
    num = Ni2 + u * u * Ni1 - Ni
    t, rem = divmod(num, u)
    if rem:
        raise ArithmeticError("T-sum is not an integer")
    return t


def _semi_norm(Ni: int, Ni1: int, T: int, r: int) -> int:
    return Ni - r * r * Ni1 + r * T


def semiconvergent_norm_direct(exp: CfExpansion, i: int, r: int) -> int:
    return norm(semiconvergent(exp, i, r))


def semiconvergent_norm(exp: CfExpansion, i: int, r: int,
                        profile: NormProfile | None = None) -> int:
    """N(delta_{i,r}) from the norm recurrence, cross-checked by direct expansion."""
    u = _check_ir(exp, i, r)
    prof = profile or norm_profile(exp)
    val = _semi_norm(prof.N(i), prof.N(i + 1),
                     t_sum(prof.N(i), prof.N(i + 1), prof.N(i + 2), u), r)
    direct = semiconvergent_norm_direct(exp, i, r)
    if val != direct:
        raise ArithmeticError(f"norm recurrence {val} != direct norm {direct}")
    return val


def _argmax_fast(Ni: int, Ni1: int, Ni2: int, u: int) -> tuple[int, int]:
    T = t_sum(Ni, Ni1, Ni2, u)
    if u % 2 == 0:
        r = u // 2
        return r, _semi_norm(Ni, Ni1, T, r)
    r = (u - 1) // 2
    lo = _semi_norm(Ni, Ni1, T, r)
    hi = _semi_norm(Ni, Ni1, T, r + 1)
    return (r + 1, hi) if hi > lo else (r, lo)


def argmax_r(exp: CfExpansion, i: int, profile: NormProfile | None = None,
             verify: bool = False) -> tuple[int, int]:
    """(r0, M_i): the maximising r (smallest on ties) and the maximum norm."""
    u = _check_ir(exp, i, 0)
    prof = profile or norm_profile(exp)
    res = _argmax_fast(prof.N(i), prof.N(i + 1), prof.N(i + 2), u)
    if verify:
        swept = argmax_r_sweep(exp, i, prof)
        if swept != res:
            raise ArithmeticError(f"fast argmax {res} disagrees with sweep {swept}")
    return res


def argmax_r_sweep(exp: CfExpansion, i: int, profile: NormProfile | None = None) -> tuple[int, int]:
    u = _check_ir(exp, i, 0)
    prof = profile or norm_profile(exp)
    Ni, Ni1 = prof.N(i), prof.N(i + 1)
    T = t_sum(Ni, Ni1, prof.N(i + 2), u)
    best = (0, _semi_norm(Ni, Ni1, T, 0))
    for r in range(1, u + 1):
        v = _semi_norm(Ni, Ni1, T, r)
        if v > best[1]:
            best = (r, v)
    return best


# -- global maximum -----------------------------------------------------------

@dataclass(frozen=True)
class MaxRecord:
    M: int
    witness_i: int
    witness_r: int
    rank_of_witness: int


def _scan_max(u_of, N, s: int) -> tuple[int, int, int]:
    """Max over odd i in [-1, 2s-2]; N[k] = N_{k-1}.

    Ties go to the smallest i >= 1, then the smallest r.  The row i = -1
    (delta_{-1} = 1) is visited last: for even s it repeats row s-1, so it
    is reported only when no positive index attains the maximum.
    """
    best_M, best_i, best_r = -1, 0, 0
    for i in (*range(1, 2 * s - 1, 2), -1):
        Ni, Ni1, Ni2 = N[i + 1], N[i + 2], N[i + 3]
        u = u_of(i + 2)
        r, m = _argmax_fast(Ni, Ni1, Ni2, u)
        if m > best_M:
            best_M, best_i, best_r = m, i, r
    return best_M, best_i, best_r


def _rank(N, s: int, j: int) -> int:
    distinct = sorted({N[k + 1] for k in range(0, 2 * s, 2)})
    return distinct.index(N[j + 2]) + 1


def global_max(exp: CfExpansion, profile: NormProfile | None = None) -> MaxRecord:
    prof = profile or norm_profile(exp)
    M, i, r = _scan_max(exp.u, prof.values, exp.s)
    return MaxRecord(M, i, r, _rank(prof.values, exp.s, i))


# -- residue root and bounds ---------------------------------------------------

def _smallest_sqrt_mod(D: int, m: int) -> int | None:
    if m == 1:
        return 0
    target = D % m
    half = m // 2
    if m <= 256:
        for a in range(half + 1):
            if a * a % m == target:
                return a
        return None
    if m < 1 << 26:
        a = np.arange(half + 1, dtype=np.int64)
        hits = np.flatnonzero(a * a % m == target)
        return int(hits[0]) if hits.size else None
    from sympy.ntheory import sqrt_mod

    roots = sqrt_mod(target, m, all_roots=True)
    return min(roots) if roots else None


def compute_a(D: int, N: int, cls: int, stated: bool = False) -> int:
    """Smallest a >= 0 with a^2 = D mod N (classes 2, 3) or mod 4N (class 1).

    ``stated=True`` uses modulus N for class 1 too, as in the original
    formulation of the conjecture.
    """
    if N < 1:
        raise ValueError("N must be positive")
    m = 4 * N if (cls == 1 and not stated) else N
    a = _smallest_sqrt_mod(D, m)
    if a is None:
        raise NoResidueRoot(f"no square root of {D} modulo {m}")
    return a


def _jk(D: int, cls: int, N: int, a: int) -> Fraction:
    return Fraction(D - a * a, 4 * N if cls == 1 else N)


@dataclass(frozen=True)
class Bounds:
    ub_jk: Fraction
    ub_conj_mp: QuadNumber
    ub_thm_mp: QuadNumber

    def __iter__(self):
        return iter((self.ub_jk, self.ub_conj_mp, self.ub_thm_mp))


def bounds(D: int, cls: int, N: int, a: int) -> Bounds:
    """(D-a^2)/(4N or N), plus sqrt(D)/8 (/4) and sqrt(D) (2 sqrt(D)) tails."""
    jk = _jk(D, cls, N, a)
    p, q = jk.numerator, jk.denominator
    if cls == 1:
        conj = QuadNumber(8 * p, q, 8 * q, D)
        thm = QuadNumber(p, q, q, D)
    else:
        conj = QuadNumber(4 * p, q, 4 * q, D)
        thm = QuadNumber(p, 2 * q, q, D)
    return Bounds(jk, conj, thm)


def format_r(X: Fraction, D: int, places: int = 6) -> str:
    """X / sqrt(D) rounded to nearest at ``places`` decimals, exactly."""
    if X == 0:
        return "0." + "0" * places
    neg = X < 0
    X = abs(X)
    p, q = X.numerator, X.denominator
    scale = 10 ** places
    # k = floor(2*scale*X/sqrt D) = isqrt(floor(4 scale^2 p^2 / (q^2 D)))
    k = isqrt((4 * scale * scale * p * p) // (q * q * D))
    n = (k + 1) // 2  # value is irrational, so no ties
    whole, frac = divmod(n, scale)
    return f"{'-' if neg else ''}{whole}.{frac:0{places}d}"


# -- the record -------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisRecord:
    D: int
    cls: int
    s: int
    N: int
    a: int
    M: int
    witness_i: int
    witness_r: int
    rank_of_witness: int
    ub_jk_stated: Fraction
    ub_jk_corrected: Fraction
    is_counterexample_stated: bool
    is_counterexample_corrected: bool
    r_of_D: str
    unit_norm_sign: int
    a_stated: int = dc_field(default=0, compare=False)

    @property
    def ub_conj_mp(self) -> QuadNumber:
        return bounds(self.D, self.cls, self.N, self.a).ub_conj_mp

    @property
    def ub_thm_mp(self) -> QuadNumber:
        return bounds(self.D, self.cls, self.N, self.a).ub_thm_mp

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "cls": self.cls,
            "s": self.s,
            "N": self.N,
            "a": self.a,
            "M": self.M,
            "i": self.witness_i,
            "r": self.witness_r,
            "rank": self.rank_of_witness,
            "ub_jk_stated": _num_out(self.ub_jk_stated),
            "ub_jk_corrected": _num_out(self.ub_jk_corrected),
            "counterexample_stated": self.is_counterexample_stated,
            "counterexample_corrected": self.is_counterexample_corrected,
            "r_of_D": self.r_of_D,
            "unit_norm": self.unit_norm_sign,
        }


JSON_KEYS = ("D", "cls", "s", "N", "a", "M", "i", "r", "rank", "ub_jk_stated",
             "ub_jk_corrected", "counterexample_stated", "counterexample_corrected",
             "r_of_D", "unit_norm")


def _num_out(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_num(v) -> Fraction:
    """Inverse of the JSON encoding of bounds (int or "p/q")."""
    return Fraction(v)


def r_of_D(record: AnalysisRecord, stated: bool = False) -> str:
    """(M - UB_JK)/sqrt(D) to six places; ``stated`` uses the original bound."""
    ub = record.ub_jk_stated if stated else record.ub_jk_corrected
    return format_r(record.M - ub, record.D)


def _build_record(D: int, cls: int, s: int, N: int, M: int, wi: int, wr: int,
                  rank: int, unit_sign: int) -> AnalysisRecord:
    a = compute_a(D, N, cls)
    a_st = compute_a(D, N, cls, stated=True) if cls == 1 else a
    ub = _jk(D, cls, N, a)
    ub_st = _jk(D, cls, N, a_st)
    b = bounds(D, cls, N, a)
    thm = b.ub_thm_mp
    # M < thm  <=>  sign(thm - M) > 0
    if sign_surd(thm.a - M * thm.den, thm.b, D) <= 0:
        raise TheoremViolation(f"D={D}: M={M} violates the proven bound")
    return AnalysisRecord(
        D=D, cls=cls, s=s, N=N, a=a, M=M, witness_i=wi, witness_r=wr,
        rank_of_witness=rank, ub_jk_stated=ub_st, ub_jk_corrected=ub,
        is_counterexample_stated=M > ub_st, is_counterexample_corrected=M > ub,
        r_of_D=format_r(M - ub, D), unit_norm_sign=unit_sign, a_stated=a_st,
    )


def analyze_expansion(exp: CfExpansion) -> AnalysisRecord:
    prof = norm_profile(exp)
    s = exp.s
    mx = global_max(exp, prof)
    return _build_record(exp.ctx.D, exp.ctx.cls, s, prof.min_negative, mx.M,
                         mx.witness_i, mx.witness_r, mx.rank_of_witness,
                         prof.unit_norm_sign)


def analyze_fast(D: int, max_period: int | None = None, use_numba: bool = False) -> AnalysisRecord:
    """Same record as ``analyze`` for a D already known to be squarefree.

    Skips the CfExpansion/NormProfile objects and runs the fused integer
    kernel.  Raises PeriodLimitExceeded.
    """
    from .cf_engine import PeriodLimitExceeded
    from . import kernel

    if use_numba and D < kernel.NUMBA_D_LIMIT:
        res = kernel.max_norm_numba(D, -1 if max_period is None else max_period)
        if res[0] < 0:
            raise PeriodLimitExceeded(D, max_period)
    else:
        res = kernel.max_norm(D, max_period)
    s, N, M, wi, wr, rank = res
    unit_sign = 1 if (s - 1) % 2 else -1
    return _build_record(D, 1 if D & 3 == 1 else D & 3, s, N, M, wi, wr, rank, unit_sign)


def analyze(D: int, max_period: int | None = None) -> AnalysisRecord:
    """Full per-D analysis.  D must be squarefree and > 1."""
    ctx: FieldCtx = field(D)
    return analyze_expansion(expand(ctx, max_period))
