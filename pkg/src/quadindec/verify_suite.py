"""Independent oracles for the indecomposable-norm engine.

Two kinds of check live here:

* lattice enumeration of indecomposable elements, which never looks at a
  continued fraction, compared with the semiconvergent construction;
* the identity/inequality battery, which re-derives every relation between
  convergents, complete quotients and norms in exact arithmetic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from math import isqrt

from gmpy2 import mpz

from .cf_engine import CfExpansion, expand
from .indec_engine import (
    analyze_expansion,
    argmax_r,
    argmax_r_sweep,
    bounds,
    global_max,
    norm_profile,
    t_sum,
)
from .quad_core import FieldCtx, QuadElem, QuadNumber, field, norm

__all__ = [
    "GuardrailExceeded",
    "OracleReport",
    "brute_force_indecomposables",
    "sail_indecomposables",
    "semiconvergent_window",
    "oracle_compare",
    "run_identity_battery",
    "rank_check",
]

ORACLE_D_LIMIT = 10 ** 4


class GuardrailExceeded(ValueError):
    pass


@dataclass
class OracleReport:
    D: int
    checks: list[tuple[str, bool, dict | None]] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[tuple[str, bool, dict | None]]:
        return [c for c in self.checks if not c[1]]

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "ok": self.ok,
            "checks": [{"name": n, "pass": p, "witness": w} for n, p, w in self.checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# -- lattice oracles ----------------------------------------------------------

def _canon(e: QuadElem) -> tuple[int, int, int]:
    """Representative up to conjugation: nonnegative sqrt(D) coefficient."""
    return (e.x, abs(e.y), e.den)


def _totally_positive_points(ctx: FieldCtx, trace_bound: int):
    """All totally positive (x, y, den) with trace <= trace_bound, by trace."""
    D = ctx.D
    den = ctx.den
    out = []
    # trace = 2x/den; total positivity: x > |y| sqrt(D)
    xmax = trace_bound * den // 2
    for x in range(1, xmax + 1):
        ymax = isqrt((x * x - 1) // D) if x * x > D else 0
        for y in range(-ymax, ymax + 1):
            if x * x <= D * y * y:
                continue
            if den == 2 and (x - y) % 2:
                continue
            out.append(QuadElem(x, y, den, ctx))
    out.sort(key=lambda e: (e.trace(), e.y))
    return out


def _tp(a: int, b: int, D: int) -> bool:
    # a + b sqrt D and a - b sqrt D both > 0
    return a > 0 and a * a > D * b * b


def brute_force_indecomposables(ctx: FieldCtx, trace_bound: int) -> set[tuple[int, int, int]]:
    """Literal enumeration: every totally positive integer of trace <= bound,
    tested against every smaller indecomposable.

    Quadratic in the number of lattice points; meant for small windows.
    Returned as canonical (x, y >= 0, den) triples of (x + y sqrt D)/den.
    """
    if ctx.D > ORACLE_D_LIMIT:
        raise GuardrailExceeded(f"D={ctx.D} exceeds {ORACLE_D_LIMIT}")
    D = ctx.D
    found: list[QuadElem] = []
    for alpha in _totally_positive_points(ctx, trace_bound):
        # alpha - beta with a common denominator of 2
        ax, ay = 2 * alpha.x // alpha.den, 2 * alpha.y // alpha.den
        for beta in found:
            bx, by = 2 * beta.x // beta.den, 2 * beta.y // beta.den
            if _tp(ax - bx, ay - by, D):
                break
        else:
            found.append(alpha)
    return {_canon(e) for e in found}


@dataclass(frozen=True)
class SailResult:
    elements: set[tuple[int, int, int]]
    unit: tuple[int, int, int]
    trace_bound: int
    max_norm: int


def sail_indecomposables(ctx: FieldCtx, trace_bound: int | None = None) -> SailResult:
    """Indecomposables with conjugate in (0, 1), found without continued fractions.

    Subtracting 1 shows any indecomposable alpha != 1 has min(alpha, alpha') < 1.
    Taking the representative with y > 0 there is exactly one candidate
    alpha_y for each y, and alpha_y decomposes iff alpha_y - alpha_z is totally
    positive for some z < y, i.e. iff alpha_z' < alpha_y'.  So the
    indecomposables are the strict running minima of alpha_y'.

    The scan locates the totally positive fundamental unit as the first
    record of norm 1; with no ``trace_bound`` it runs to twice that unit's
    trace.
    """
    if ctx.D > ORACLE_D_LIMIT:
        raise GuardrailExceeded(f"D={ctx.D} exceeds {ORACLE_D_LIMIT}")
    D = ctx.D
    den = ctx.den
    d2 = den * den
    elems = {(1, 0, 1)}
    unit = None
    best_norm = 1
    mx = my = None  # current minimum of alpha_y' (as x - y sqrt D)
    bound = trace_bound
    y = 0
    while True:
        y += 1
        x = isqrt(D * y * y) + 1
        if den == 2 and (x - y) % 2:
            x += 1
        # trace = 2x / den
        if bound is not None and 2 * x > bound * den:
            break
        if mx is None:
            is_record = True
        else:
            dx = x - mx
            # x - y sqrt D < mx - my sqrt D  <=>  dx < (y - my) sqrt D
            is_record = dx <= 0 or dx * dx < D * (y - my) * (y - my)
        if not is_record:
            continue
        mx, my = x, y
        n = (x * x - D * y * y) // d2
        e = QuadElem(x, y, den, ctx)
        elems.add((e.x, e.y, e.den))
        best_norm = max(best_norm, n)
        if unit is None and n == 1:
            unit = (e.x, e.y, e.den)
            if bound is None:
                bound = 2 * (2 * x // den)
    return SailResult(elems, unit, bound, best_norm)


def semiconvergent_window(exp: CfExpansion, trace_bound: int) -> set[tuple[int, int, int]]:
    """{1} and every delta_{i,r} (i odd >= -1) of trace <= trace_bound."""
    ctx = exp.ctx
    out = {(1, 0, 1)}
    p0, q0, p1, q1 = 1, 0, exp.u0, 1  # delta_{-1}, delta_0
    i = -1
    while True:
        u = exp.u(i + 2)
        grew = False
        for r in range(u + 1):
            e = QuadElem.from_basis(p0 + r * p1, q0 + r * q1, ctx)
            if e.trace() <= trace_bound:
                out.add(_canon(e))
                grew = True
        if not grew:
            break
        # advance two steps: (delta_{i+2}, delta_{i+3})
        pa, qa = p0 + u * p1, q0 + u * q1
        u3 = exp.u(i + 3)
        pb, qb = p1 + u3 * pa, q1 + u3 * qa
        p0, q0, p1, q1 = pa, qa, pb, qb
        i += 2
    return out


def oracle_compare(D: int, trace_bound: int | None = None) -> OracleReport:
    """Lattice oracle vs semiconvergent list (set equality and max norm)."""
    ctx = field(D)
    rep = OracleReport(D)
    sail = sail_indecomposables(ctx, trace_bound)
    exp = expand(ctx)
    semis = semiconvergent_window(exp, sail.trace_bound)
    same = sail.elements == semis
    rep.checks.append(("oracle_set_equality", same, None if same else {
        "D": D, "trace_bound": sail.trace_bound,
        "only_lattice": sorted(sail.elements - semis)[:5],
        "only_semiconvergent": sorted(semis - sail.elements)[:5],
    }))
    M = global_max(exp).M
    rep.checks.append(("oracle_max_norm", M == sail.max_norm,
                       None if M == sail.max_norm else {"D": D, "engine": M, "oracle": sail.max_norm}))
    return rep


# -- identity battery -----------------------------------------------------------

class _Battery:
    def __init__(self, D: int):
        self.report = OracleReport(D)
        self._fail: dict[str, dict] = {}
        self._seen: list[str] = []

    def check(self, name: str, cond: bool, **witness) -> None:
        if name not in self._seen:
            self._seen.append(name)
        if not cond and name not in self._fail:
            self._fail[name] = {"D": self.report.D, **witness}

    def finish(self) -> OracleReport:
        for name in self._seen:
            w = self._fail.get(name)
            self.report.checks.append((name, w is None, w))
        return self.report


def run_identity_battery(D: int, max_period: int | None = None) -> OracleReport:
    """Every exact relation among convergents, complete quotients and norms,
    over two full periods.  Failures become report entries, never exceptions.
    """
    ctx = field(D)
    exp = expand(ctx, max_period)
    prof = norm_profile(exp)
    s = exp.s
    bat = _Battery(D)
    D_ = D
    Q0 = ctx.xi_Q0
    sqd = ctx.sqrt_delta()
    delta = ctx.delta()
    xi = ctx.xi()
    tr = ctx.delta_trace
    nd = ctx.delta_norm
    assert nd.denominator == 1
    nd = int(nd)

    def c(k: int) -> QuadNumber:
        P, Q = exp.PQ(k)
        return QuadNumber(P, 1, Q, D_)

    # convergents p_i, q_i for i = -1 .. 2s+1
    # mpz: the convergents reach tens of thousands of digits for long periods
    conv = {-2: (mpz(0), mpz(1)), -1: (mpz(1), mpz(0))}
    for i in range(0, 2 * s + 2):
        u = exp.u(i)
        conv[i] = (u * conv[i - 1][0] + conv[i - 2][0], u * conv[i - 1][1] + conv[i - 2][1])

    def delta_i(i: int) -> QuadElem:
        return QuadElem.from_basis(*conv[i], ctx)

    @lru_cache(maxsize=None)
    def T_a(i: int) -> int:
        (p, q), (pm, qm) = conv[i], conv[i - 1]
        return p * pm + p * qm * tr + q * qm * nd

    @lru_cache(maxsize=None)
    def T_b(i: int) -> int:
        (p, q), (pm, qm) = conv[i], conv[i - 1]
        return p * pm + pm * q * tr + q * qm * nd

    # determinant identity and Q-track norm identity
    for i in range(-1, 2 * s + 1):
        if i >= 0:
            (p, q), (pm, qm) = conv[i], conv[i - 1]
            bat.check("determinant", p * qm - pm * q == (1 if (i - 1) % 2 == 0 else -1), i=i)
        n_direct = norm(delta_i(i))
        Qn = exp.Q(i + 1)
        sgn = 1 if (i + 1) % 2 == 0 else -1
        bat.check("q_track_norm", n_direct * Q0 == sgn * Qn, i=i)
        bat.check("norm_profile", n_direct == prof.signed(i), i=i)

    # 0 < Q_k < 2 sqrt(D)
    for k in range(0, s + 1):
        Qk = exp.Q(k)
        bat.check("q_bound", Qk > 0 and (QuadNumber(0, 2, 1, D_) - Qk).sign() > 0, k=k)

    for i in range(0, 2 * s):
        Ni = prof.N(i)
        n_signed = prof.signed(i)
        sg = 1 if (i + 1) % 2 == 0 else -1
        c1 = c(i + 1)
        # Lemma on T^(a), T^(b): both components of the difference vanish
        rhs_a = delta * sg - c1 * n_signed
        bat.check("tiab_a", (rhs_a - T_a(i)).is_zero(), i=i)
        rhs_b = xi * sg - c1 * n_signed
        bat.check("tiab_b", (rhs_b - T_b(i)).is_zero(), i=i)
        # norm recurrence: N_i c^2 - sqrt(Delta) c + N_{i-1} = 0
        rel = c1 * c1 * Ni - sqd * c1 + prof.N(i - 1)
        bat.check("ni_rel", rel.is_zero(), i=i)
        # T^(a)_{i+1} = u_{i+1} N(delta_i) + T^(b)_i
        bat.check("t_step", T_a(i + 1) == exp.u(i + 1) * n_signed + T_b(i), i=i)
        # upper/lower bounds on N_i
        c0 = c(i)
        c2 = c(i + 2)
        bat.check("upper_half", (sqd / 2 - QuadNumber.of(Ni, D_) / c2).sign() > 0, i=i)
        bat.check("bnd2_upper", (sqd / c1 - Ni).sign() > 0, i=i)
        low = sqd / c1 * (1 - 1 / (c0 * c1))
        bat.check("bnd2_lower", (QuadNumber.of(Ni, D_) - low).sign() > 0, i=i)
        bat.check("lb3", (QuadNumber.of(Ni, D_) - sqd / (c1 + 1)).sign() > 0, i=i)

    for i in range(-1, 2 * s - 1, 2):
        u = exp.u(i + 2)
        Ni, Ni1, Ni2 = prof.N(i), prof.N(i + 1), prof.N(i + 2)
        T = t_sum(Ni, Ni1, Ni2, u)
        bat.check("t_sum_definition", T == T_a(i + 1) + T_b(i + 1), i=i)
        (p0, q0), (p1, q1) = conv[i], conv[i + 1]

        def direct(r: int) -> int:
            return norm(QuadElem.from_basis(p0 + r * p1, q0 + r * q1, ctx))

        for r in sorted({0, 1, u // 2, (u + 1) // 2, u}):
            bat.check("ndir", direct(r) == Ni - r * r * Ni1 + r * T, i=i, r=r)
        fast = argmax_r(exp, i, prof)
        sweep = argmax_r_sweep(exp, i, prof)
        bat.check("prop_r", fast == sweep, i=i)
        Mi = fast[1]
        if u % 2 == 0:
            bat.check("mi_a", 4 * Mi == u * u * Ni1 + 2 * (Ni2 + Ni), i=i)
            bat.check("mi_a_direct", direct(u // 2) == Mi, i=i)
        else:
            lo, hi = direct((u - 1) // 2), direct((u + 1) // 2)
            bat.check("mi_b_minus", 4 * u * lo == 2 * (u + 1) * Ni + u * (u * u - 1) * Ni1 + 2 * (u - 1) * Ni2, i=i)
            bat.check("mi_b_plus", 4 * u * hi == 2 * (u - 1) * Ni + u * (u * u - 1) * Ni1 + 2 * (u + 1) * Ni2, i=i)
            bat.check("mi_b_max", max(lo, hi) == Mi, i=i)
        x = QuadNumber.of(4 * Mi, D_) / sqd
        c2 = c(i + 2)
        bat.check("power_series_lower", (x - (c2 - 2)).sign() > 0, i=i)
        bat.check("power_series_upper", ((c2 + 1) - x).sign() > 0, i=i)

    rec = analyze_expansion(exp)
    M, N = rec.M, rec.N
    if ctx.cls == 1:
        jk_num, jk_den = D - 1, 4 * N
    else:
        jk_num, jk_den = D, N
    bat.check("theorem_jk", M * jk_den <= jk_num, M=M, N=N)
    thm = bounds(D, ctx.cls, N, rec.a).ub_thm_mp
    bat.check("theorem_mp", (thm - M).sign() > 0, M=M, N=N, a=rec.a)
    if prof.unit_norm_sign == -1:
        bat.check("unit_norm_equality", M * jk_den == jk_num, M=M, N=N)
    return bat.finish()


def rank_check(D: int, expected_j: int, expected_rank: int) -> bool:
    mx = global_max(expand(field(D)))
    return mx.witness_i == expected_j and mx.rank_of_witness == expected_rank
