"""Exact arithmetic in real quadratic fields Q(sqrt(D)).

Nothing in this module touches floating point.  Orderings between
irrational quantities are decided by isolating the sqrt(D) term and
comparing squares of integers.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

__all__ = [
    "FieldCtx",
    "QuadElem",
    "QuadNumber",
    "Surd",
    "NotSquarefree",
    "field",
    "conjugate",
    "norm",
    "surd_floor",
    "surd_cmp",
    "sign_surd",
    "is_squarefree",
    "exact_isqrt",
]


class NotSquarefree(ValueError):
    pass


def exact_isqrt(n: int) -> int:
    """floor(sqrt(n)) with the certificate r*r <= n < (r+1)**2 checked."""
    r = isqrt(n)
    if not (r * r <= n < (r + 1) * (r + 1)):
        raise ArithmeticError(f"isqrt certificate failed for {n}")
    return r


def is_squarefree(n: int) -> bool:
    """Trial-division reference test; the scanner sieves instead.

    Only primes up to n^(1/3) are tried: what remains afterwards has at most
    two prime factors, so it is squarefree unless it is a perfect square.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n % 4 == 0:
        return False
    if n % 2 == 0:
        n //= 2
    p = 3
    while p * p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
        p += 2
    r = isqrt(n)
    return n == 1 or r * r != n


@dataclass(frozen=True, slots=True)
class FieldCtx:
    D: int
    cls: int
    Delta: int
    delta_trace: int
    delta_norm: Fraction
    xi_P0: int
    xi_Q0: int
    isqrt_D: int

    @property
    def den(self) -> int:
        """Denominator needed for integers of the ring: 2 when D = 1 mod 4."""
        return 2 if self.cls == 1 else 1

    def sqrt_delta(self) -> "QuadNumber":
        """sqrt(Delta) as an element: sqrt(D) for class 1, 2*sqrt(D) otherwise."""
        return QuadNumber(0, 1 if self.cls == 1 else 2, 1, self.D)

    def delta(self) -> "QuadNumber":
        if self.cls == 1:
            return QuadNumber(1, 1, 2, self.D)
        return QuadNumber(0, 1, 1, self.D)

    def xi(self) -> "QuadNumber":
        if self.cls == 1:
            return QuadNumber(-1, 1, 2, self.D)
        return QuadNumber(0, 1, 1, self.D)


@lru_cache(maxsize=4096)
def field(D: int, check: bool = True) -> FieldCtx:
    """Build the context for Q(sqrt(D)).

    ``check=False`` skips the squarefree test for callers (the scanner) that
    have already sieved.
    """
    if D <= 1:
        raise ValueError(f"D must exceed 1, got {D}")
    r = isqrt(D)
    if r * r == D:
        raise NotSquarefree(f"{D} is not squarefree (perfect square)")
    if check and not is_squarefree(D):
        raise NotSquarefree(f"{D} is not squarefree")
    cls = D % 4
    if cls == 0:
        raise NotSquarefree(f"{D} is not squarefree")
    if cls == 1:
        ctx = FieldCtx(D, 1, D, 1, Fraction(1 - D, 4), -1, 2, r)
    else:
        ctx = FieldCtx(D, cls, 4 * D, 0, Fraction(-D), 0, 1, r)
    assert (D - ctx.xi_P0 ** 2) % ctx.xi_Q0 == 0
    return ctx


@dataclass(frozen=True, slots=True)
class QuadElem:
    """The field element (x + y*sqrt(D)) / den with den in {1, 2}."""

    x: int
    y: int
    den: int
    ctx: FieldCtx

    def __post_init__(self):
        if self.den not in (1, 2):
            raise ValueError("den must be 1 or 2")
        if self.den == 2:
            if self.ctx.cls != 1:
                raise ValueError("den = 2 only occurs for D = 1 mod 4")
            if (self.x - self.y) % 2:
                raise ValueError("x and y must share parity when den = 2")
            if self.x % 2 == 0 and self.y % 2 == 0:
                object.__setattr__(self, "x", self.x // 2)
                object.__setattr__(self, "y", self.y // 2)
                object.__setattr__(self, "den", 1)

    @classmethod
    def from_basis(cls, p: int, q: int, ctx: FieldCtx) -> "QuadElem":
        """p + q*delta, with delta the standard integral generator."""
        if ctx.cls == 1:
            return cls(2 * p + q, q, 2, ctx)
        return cls(p, q, 1, ctx)

    def __add__(self, other: "QuadElem") -> "QuadElem":
        if self.den == other.den:
            return QuadElem(self.x + other.x, self.y + other.y, self.den, self.ctx)
        return QuadElem(2 * self.x // self.den + 2 * other.x // other.den,
                        2 * self.y // self.den + 2 * other.y // other.den, 2, self.ctx)

    def __mul__(self, other):
        if isinstance(other, int):
            return QuadElem(self.x * other, self.y * other, self.den, self.ctx)
        D = self.ctx.D
        x = self.x * other.x + D * self.y * other.y
        y = self.x * other.y + self.y * other.x
        d = self.den * other.den
        if d == 4:
            return QuadElem(x // 2, y // 2, 2, self.ctx)
        return QuadElem(x, y, d, self.ctx)

    __rmul__ = __mul__

    def trace(self) -> Fraction:
        return Fraction(2 * self.x, self.den)

    def as_number(self) -> "QuadNumber":
        return QuadNumber(self.x, self.y, self.den, self.ctx.D)

    def is_totally_positive(self) -> bool:
        n = self.as_number()
        return n.sign() > 0 and n.conjugate().sign() > 0

    def __str__(self) -> str:
        op = "-" if self.y < 0 else "+"
        body = f"{self.x}{op}{abs(self.y)}*sqrt({self.ctx.D})"
        return body if self.den == 1 else f"({body})/2"


def conjugate(e: QuadElem) -> QuadElem:
    return QuadElem(e.x, -e.y, e.den, e.ctx)


def norm(e: QuadElem) -> Fraction | int:
    """(x^2 - D y^2) / den^2; an int whenever the element is integral."""
    num = e.x * e.x - e.ctx.D * e.y * e.y
    d2 = e.den * e.den
    if num % d2 == 0:
        return num // d2
    return Fraction(num, d2)


def sign_surd(a: int, b: int, D: int) -> int:
    """Sign of the real number a + b*sqrt(D) (D > 0 not a square)."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with D b^2
    lhs = a * a
    rhs = D * b * b
    if a > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


class QuadNumber:
    """Exact (a + b*sqrt(D)) / den with integer a, b and den > 0.

    Used for the identity and inequality batteries, where quotients of
    complete quotients appear.  Not reduced eagerly.
    """

    __slots__ = ("a", "b", "den", "D")

    def __init__(self, a: int, b: int, den: int, D: int):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            a, b, den = -a, -b, -den
        self.a = a
        self.b = b
        self.den = den
        self.D = D

    @classmethod
    def of(cls, value, D: int) -> "QuadNumber":
        if isinstance(value, QuadNumber):
            return value
        if isinstance(value, Surd):
            return cls(value.P, 1, value.Q, value.ctx.D)
        if isinstance(value, QuadElem):
            return value.as_number()
        if isinstance(value, Fraction):
            return cls(value.numerator, 0, value.denominator, D)
        if isinstance(value, numbers.Integral):
            return cls(value, 0, 1, D)
        raise TypeError(f"cannot coerce {type(value).__name__}")

    def _co(self, other) -> "QuadNumber":
        o = QuadNumber.of(other, self.D)
        if o.D != self.D:
            raise ValueError("operands live in different fields")
        return o

    def __add__(self, other):
        o = self._co(other)
        if o.den == self.den:
            return QuadNumber(self.a + o.a, self.b + o.b, self.den, self.D)
        return QuadNumber(self.a * o.den + o.a * self.den,
                          self.b * o.den + o.b * self.den, self.den * o.den, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.den, self.D)

    def __sub__(self, other):
        return self + (-self._co(other))

    def __rsub__(self, other):
        return self._co(other) - self

    def __mul__(self, other):
        o = self._co(other)
        return QuadNumber(self.a * o.a + self.D * self.b * o.b,
                          self.a * o.b + self.b * o.a, self.den * o.den, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._co(other)
        # multiply through by the conjugate of the divisor
        n = o.a * o.a - self.D * o.b * o.b
        if n == 0:
            raise ZeroDivisionError("division by zero")
        a = (self.a * o.a - self.D * self.b * o.b) * o.den
        b = (self.b * o.a - self.a * o.b) * o.den
        return QuadNumber(a, b, self.den * n, self.D)

    def __rtruediv__(self, other):
        return self._co(other) / self

    def conjugate(self) -> "QuadNumber":
        return QuadNumber(self.a, -self.b, self.den, self.D)

    def sign(self) -> int:
        return sign_surd(self.a, self.b, self.D)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def rational_part(self) -> Fraction:
        return Fraction(self.a, self.den)

    def surd_part(self) -> Fraction:
        return Fraction(self.b, self.den)

    def floor(self) -> int:
        return _floor_surd(self.a, self.b, self.den, self.D)

    def cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __eq__(self, other):
        try:
            return (self - other).is_zero()
        except TypeError:
            return NotImplemented

    def __hash__(self):
        f, g = self.rational_part(), self.surd_part()
        return hash((f, g, self.D))

    def __repr__(self):
        return f"QuadNumber(({self.a} + {self.b}*sqrt({self.D}))/{self.den})"


@dataclass(frozen=True, slots=True)
class Surd:
    """The real number (P + sqrt(D)) / Q."""

    P: int
    Q: int
    ctx: FieldCtx

    def __post_init__(self):
        if self.Q == 0:
            raise ZeroDivisionError("Q must be nonzero")

    def as_number(self) -> QuadNumber:
        return QuadNumber(self.P, 1, self.Q, self.ctx.D)


def _floor_surd(a: int, b: int, den: int, D: int) -> int:
    # floor((a + b sqrt D)/den), den > 0
    if b == 0:
        return a // den
    if b > 0:
        t = isqrt(D * b * b)  # floor(b sqrt D)
        return (a + t) // den
    t = isqrt(D * b * b)  # floor(|b| sqrt D), irrational so ceil = t + 1
    return (a - t - 1) // den


def surd_floor(s: Surd) -> int:
    """floor((P + sqrt(D)) / Q), exact for either sign of Q."""
    r = s.ctx.isqrt_D
    if s.Q > 0:
        return (s.P + r) // s.Q
    # (P + sqrt D)/Q = (-P - sqrt D)/|Q|, and -sqrt(D) has floor -r-1
    return (-s.P - r - 1) // (-s.Q)


def surd_cmp(a, b, D: int | None = None) -> int:
    """Exact three-way comparison: -1, 0 or 1.

    Operands may be ``Surd``, ``QuadNumber``, ``QuadElem``, ``Fraction`` or
    ``int``; at least one must carry D unless ``D`` is given.
    """
    if D is None:
        for v in (a, b):
            if isinstance(v, (Surd, QuadElem)):
                D = v.ctx.D
                break
            if isinstance(v, QuadNumber):
                D = v.D
                break
        else:
            return (Fraction(a) > Fraction(b)) - (Fraction(a) < Fraction(b))
    return (QuadNumber.of(a, D) - QuadNumber.of(b, D)).sign()
