"""Parametric counterexample families and their verification.

Each family is described by polynomials that are linear in m with
coefficients polynomial in n:  P(m, n) = A(n)*m + B(n).  D itself is the
product of two such factors.  Coefficient lists are ascending in n.

The displayed predictions are kept verbatim in ``PRINTED``.  Where the
engine disagrees with a display on every instance, a replacement fitted
from engine output lives in ``corrections.json`` and takes precedence.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable

from .indec_engine import AnalysisRecord, analyze, compute_a, _jk
from .kernel import max_norm
from .quad_core import is_squarefree

__all__ = [
    "DomainError",
    "FamilyInstance",
    "Check",
    "FAMILIES",
    "PRINTED",
    "corrections",
    "instantiate",
    "verify_instance",
    "fit_linear_in_m",
    "r_bound",
    "SIZE_GUARD",
]

Poly = tuple[int, ...]
LinM = tuple[Poly, Poly]

SIZE_GUARD = 10 ** 40


class DomainError(ValueError):
    pass


def peval(p: Iterable[int], n: int) -> int:
    acc = 0
    for c in reversed(tuple(p)):
        acc = acc * n + c
    return acc


def lin(p: LinM, m: int, n: int) -> int:
    return peval(p[0], n) * m + peval(p[1], n)


def _psq(p: Poly, k: int = 1) -> Poly:
    out = [0] * (2 * len(p) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(p):
            out[i + j] += k * a * b
    return tuple(out)


def _padd(p: Poly, q: Poly) -> Poly:
    L = max(len(p), len(q))
    return tuple((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(L))


def _pneg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def _pmul(p: Poly, q: Poly) -> Poly:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


# -- the displayed predictions ----------------------------------------------

_D3_X = (429, 672, 256)
_D3_Y = (203, 328, 128)
_D2_X = (151, 184, 56)
_D2_Y = (276, 352, 112)
_D1_X = (69, 144, 64)
_D1_Y = (29, 68, 32)

_d3_M = ((181892, 573216, 669952, 344064, 65536), (3282, 8172, 6688, 1792))
_d3_UB = ((142832, 443408, 511680, 260096, 49152), (2577, 6296, 5072, 1344))

PRINTED: dict[str, dict[str, LinM]] = {
    "d3": {
        "f1": (_psq(_D3_X, 2), (6641, 16414, 13376, 3584)),
        "f2": (_psq(_D3_Y, 2), (1487, 3822, 3232, 896)),
        "u0": (_pmul(_pmul(_D3_X, _D3_Y), (2,)), (3142, 7922, 6576, 1792)),
        "N": (_psq(_D3_Y, 4), (2974, 7644, 6464, 1792)),
        "M": _d3_M,
        "gap": (_padd(_d3_M[0], _pneg(_d3_UB[0])), _padd(_d3_M[1], _pneg(_d3_UB[1]))),
    },
    "d2": {
        "f1": (_psq(_D2_X), (-60832, -102576, -52960, -5376, 1568)),
        "f2": (_psq(_D2_Y), (-203234, -365792, -202592, -23296, 6272)),
        "u0": (_pmul(_D2_X, _D2_Y), (-111190, -193808, -103640, -11200, 3136)),
        # displayed without any m term
        "M": ((0,), _padd(_psq(_D2_X), (-121664, -205152, -105920, -10752, 3136))),
        "gap": ((3477, 9672, 10027, 4592, 784), (-18553, -37678, -23545, -3248, 784)),
    },
    "d1star": {
        "f1": (_psq(_D1_X, 2), (685, 2398, 2656, 896)),
        "f2": (_psq(_D1_Y, 2), (121, 486, 608, 224)),
        "u0": (_pmul(_D1_X, _D1_Y), (143, 541, 636, 224)),
        "M": ((2206, 9576, 14624, 9216, 2048), (159, 582, 664, 224)),
        "gap": ((246, 1612, 3080, 2176, 512), (18, 104, 152, 56)),
    },
}


@dataclass(frozen=True)
class Family:
    name: str
    cls: int
    period: int
    min_m: int
    min_n: int
    # index j of the maximising row; the bound r(D) < c0 - 1/(c1 n)
    r_bound: tuple[Fraction, int]
    pattern: Callable[[int, int], list[int]]
    # N (or N/2 for d3) prime makes the residue root the generic one
    generic_div: int


FAMILIES: dict[str, Family] = {
    "d3": Family("d3", 3, 14, 0, 0, (Fraction(1, 4), 64),
                 lambda n, u0: [2, 8 * n + 10, 1, 4 * n + 3, 1, 1, 1, 1, 1, 4 * n + 3, 1,
                                8 * n + 10, 2, 2 * u0], 2),
    "d2": Family("d2", 2, 18, 1, 1, (Fraction(1, 4), 7),
                 lambda n, u0: [1, n, 1, 1, 1, 1, 1, 7 * n + 10, 2, 7 * n + 10, 1, 1, 1, 1, 1,
                                n, 1, 2 * u0], 1),
    "d1star": Family("d1star", 1, 14, 1, 1, (Fraction(1, 8), 64),
                     lambda n, u0: [2, 4 * n + 4, 1, 2 * n, 1, 1, 1, 1, 1, 2 * n, 1, 4 * n + 4,
                                    2, 2 * u0 + 1], 1),
}


@lru_cache(maxsize=1)
def corrections() -> dict:
    """The shipped CORRECTIONS table."""
    with resources.files(__package__).joinpath("corrections.json").open() as fh:
        return json.load(fh)


def polynomial(family: str, quantity: str) -> tuple[LinM | None, str]:
    """Polynomial used for prediction and where it came from."""
    fam = corrections().get(family, {})
    if quantity in fam:
        c = fam[quantity]
        return (tuple(c["m"]), tuple(c["1"])), c["source"]
    p = PRINTED[family].get(quantity)
    return p, "printed" if p is not None else "none"


# -- instances --------------------------------------------------------------

@dataclass
class Check:
    passed: bool | None  # None: not applicable / not run
    expected: object = None
    got: object = None

    def to_json(self) -> dict:
        out: dict = {"passed": self.passed}
        if self.passed is False or self.expected is not None:
            out["expected"] = _js(self.expected)
            out["got"] = _js(self.got)
        return out


def _js(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, list):
        return [_js(x) for x in v]
    return v


@dataclass
class FamilyInstance:
    family: str
    m: int
    n: int
    D: int
    u0: int
    predicted_pattern: list[int]
    predicted_N: int | None
    predicted_M: int | None
    predicted_gap: int | None
    sources: dict[str, str] = field(default_factory=dict)
    verification: dict[str, Check] = field(default_factory=dict)
    record: AnalysisRecord | None = None

    @property
    def squarefree(self) -> bool | None:
        c = self.verification.get("squarefree")
        return None if c is None else c.passed

    @property
    def ok(self) -> bool:
        """All applicable checks passed (squarefree instances only)."""
        if not self.verification or self.squarefree is False:
            return False
        return not self.failures()

    def failures(self) -> list[str]:
        """Failed checks; squarefreeness is report-only and never listed."""
        return [k for k, c in self.verification.items()
                if c.passed is False and k != "squarefree"]

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "m": self.m,
            "n": self.n,
            "D": str(self.D),
            "u0": str(self.u0),
            "pattern": [str(x) for x in self.predicted_pattern],
            "N": None if self.predicted_N is None else str(self.predicted_N),
            "M": None if self.predicted_M is None else str(self.predicted_M),
            "gap": None if self.predicted_gap is None else str(self.predicted_gap),
            "sources": self.sources,
            "verification": {k: c.to_json() for k, c in self.verification.items()},
        }


def instantiate(family: str, m: int, n: int) -> FamilyInstance:
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    fam = FAMILIES[family]
    if m < fam.min_m or n < fam.min_n:
        raise DomainError(f"{family} needs m >= {fam.min_m} and n >= {fam.min_n}, got ({m}, {n})")
    pr = PRINTED[family]
    f1, f2 = lin(pr["f1"], m, n), lin(pr["f2"], m, n)
    u0 = lin(pr["u0"], m, n)
    if f1 <= 1 or f2 <= 1 or u0 < 1:
        raise DomainError(f"{family}({m}, {n}) leaves the family's range: factors {f1}, {f2}, u0 {u0}")
    D = f1 * f2
    if D % 4 not in (fam.cls, 0):
        raise AssertionError(f"{family}({m}, {n}) has D = {D % 4} mod 4")
    lo, hi = (2 * u0 + 1, 2 * u0 + 3) if fam.cls == 1 else (u0, u0 + 1)
    if not lo * lo < D < hi * hi:
        raise AssertionError(f"u0 = {u0} is not the leading quotient for {family}({m}, {n})")
    preds: dict[str, int | None] = {}
    sources = {}
    for q in ("N", "M", "gap"):
        p, src = polynomial(family, q)
        preds[q] = None if p is None else lin(p, m, n)
        sources[q] = src
    return FamilyInstance(family, m, n, D, u0, fam.pattern(n, u0), preds["N"], preds["M"],
                          preds["gap"], sources)


def r_bound(family: str, n: int) -> Fraction | None:
    c0, k = FAMILIES[family].r_bound
    if n < 1:
        return None
    return c0 - Fraction(1, k * n)


def _r_below(gap: Fraction, D: int, bound: Fraction) -> bool:
    """gap/sqrt(D) < bound, exactly."""
    if gap <= 0:
        return bound > 0
    if bound <= 0:
        return False
    # gap^2 < bound^2 D, cleared of denominators
    return gap * gap < bound * bound * D


def _generic_root(inst: FamilyInstance, rec: AnalysisRecord) -> bool:
    from sympy import isprime

    k = FAMILIES[inst.family].generic_div
    return rec.N % k == 0 and isprime(rec.N // k)


def verify_instance(inst: FamilyInstance, size_guard: int = SIZE_GUARD) -> FamilyInstance:
    """Run the engine on ``inst.D`` and fill ``inst.verification``.

    Non-squarefree instances only get the squarefree entry.  The gap
    identity is only asserted where N (N/2 for d3) is prime, which is when
    the smallest residue root takes its generic value.
    """
    if inst.D >= size_guard:
        raise DomainError(f"D = {inst.D} exceeds the size guard {size_guard}")
    fam = FAMILIES[inst.family]
    v: dict[str, Check] = {}
    inst.verification = v
    sf = is_squarefree(inst.D)
    v["squarefree"] = Check(sf)
    if not sf:
        return inst
    rec = analyze(inst.D)
    inst.record = rec
    from .cf_engine import expand
    from .quad_core import field

    exp = expand(field(inst.D, check=False))
    v["u0"] = Check(exp.u0 == inst.u0, inst.u0, exp.u0)
    v["period"] = Check(exp.s == fam.period, fam.period, exp.s)
    v["pattern"] = Check(list(exp.period) == inst.predicted_pattern,
                         inst.predicted_pattern, list(exp.period))
    if inst.predicted_N is not None:
        v["N"] = Check(rec.N == inst.predicted_N, inst.predicted_N, rec.N)
    if inst.predicted_M is not None:
        v["M"] = Check(rec.M == inst.predicted_M, inst.predicted_M, rec.M)
    v["counterexample"] = Check(rec.is_counterexample_corrected, True, rec.is_counterexample_corrected)
    gap = rec.M - rec.ub_jk_corrected
    if inst.predicted_gap is not None:
        if _generic_root(inst, rec):
            v["gap"] = Check(gap == inst.predicted_gap, inst.predicted_gap, gap)
        else:
            v["gap"] = Check(None, inst.predicted_gap, gap)
    b = r_bound(inst.family, inst.n)
    if b is None:
        v["r_bound"] = Check(None)
    else:
        v["r_bound"] = Check(_r_below(gap, inst.D, b), f"< {b}", rec.r_of_D)
    return inst


# -- fitting corrections ----------------------------------------------------

def engine_values(D: int) -> dict[str, int | Fraction]:
    """N, M and M - UB for any non-square D (squarefreeness not needed)."""
    cls = 1 if D % 4 == 1 else D % 4
    s, N, M, wi, wr, rank = max_norm(D, None)
    a = compute_a(D, N, cls)
    return {"N": N, "M": M, "gap": M - _jk(D, cls, N, a), "s": s}


def _lagrange(points: list[tuple[int, Fraction]]) -> list[Fraction]:
    """Coefficients (ascending) of the interpolating polynomial."""
    coeffs = [Fraction(0)] * len(points)
    for i, (xi, yi) in enumerate(points):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xj * basis[k + 1]
            denom *= xi - xj
        for k, c in enumerate(basis):
            coeffs[k] += yi * c / denom
    return coeffs


def _as_int_poly(c: list[Fraction]) -> Poly:
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
    if any(x.denominator != 1 for x in c):
        raise ArithmeticError(f"non-integral fit {c}")
    return tuple(int(x) for x in c)


def fit_linear_in_m(family: str, quantity: str, ms: tuple[int, int] | dict[int, tuple[int, int]],
                    ns: Iterable[int], accept: Callable[[dict], bool] | None = None) -> LinM:
    """Fit A(n)*m + B(n) to engine values of ``quantity``.

    For each n the two m values give slope and intercept; those are then
    interpolated in n.  Use one more n than the expected degree so a bad
    fit shows up as a non-vanishing top coefficient.
    """
    pr = PRINTED[family]
    A, B = [], []
    for n in ns:
        pair = ms[n] if isinstance(ms, dict) else ms
        vals = []
        for m in pair:
            D = lin(pr["f1"], m, n) * lin(pr["f2"], m, n)
            ev = engine_values(D)
            if accept is not None and not accept(ev):
                raise DomainError(f"{family}({m}, {n}) rejected by the filter")
            vals.append(Fraction(ev[quantity]))
        slope = (vals[1] - vals[0]) / (pair[1] - pair[0])
        A.append((n, slope))
        B.append((n, vals[0] - slope * pair[0]))
    return _as_int_poly(_lagrange(A)), _as_int_poly(_lagrange(B))
