import itertools

import mpmath
import pytest

from quadindec.cf_engine import (
    PeriodLimitExceeded, complete_quotient, convergent_at, convergents, expand,
)
from quadindec.quad_core import field, surd_floor

PRINTED = {
    715461: [422, 2, 2, 1, 4, 2, 9, 2, 281, 2, 9, 2, 4, 1, 2, 2, 845],
    12441: [55, 3, 1, 2, 2, 3, 2, 2, 1, 3, 111],
    25982: [161, 5, 3, 1, 1, 4, 1, 1, 1, 2, 1, 1, 4, 1, 7, 1, 1, 1, 28, 1, 1, 1, 7, 1, 4,
            1, 1, 2, 1, 1, 1, 4, 1, 1, 3, 5, 322],
    46559: [215, 1, 3, 2, 4, 1, 1, 1, 2, 1, 1, 2, 215, 2, 1, 1, 2, 1, 1, 1, 4, 2, 3, 1, 430],
    172471024674149: [6566410, 1, 2, 2, 3, 1, 1, 2, 20, 1, 20, 2, 1, 1, 3, 2, 2, 1, 13132821],
}


def float_cf(D: int, terms: int) -> list[int]:
    """Partial quotients of xi from a 600-digit float expansion."""
    with mpmath.workdps(600):
        x = (mpmath.sqrt(D) - 1) / 2 if D % 4 == 1 else mpmath.sqrt(D)
        out = []
        for _ in range(terms):
            a = int(mpmath.floor(x))
            out.append(a)
            x = 1 / (x - a)
        return out


@pytest.mark.parametrize("D", sorted(PRINTED))
def test_printed_expansions(D):
    exp = expand(field(D))
    assert [exp.u0, *exp.period] == PRINTED[D]


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 13, 19, 21, 94, 199, 1021, 4093, 9973])
def test_expansion_matches_float_oracle(D):
    exp = expand(field(D))
    n = 2 * exp.s + 1
    assert [exp.u(i) for i in range(n)] == float_cf(D, n)


def test_small_cases():
    e = expand(field(19))
    assert (e.u0, e.period, e.s) == (4, (2, 1, 3, 1, 2, 8), 6)
    e = expand(field(5))
    assert (e.u0, e.period) == (0, (1,))
    e = expand(field(2))
    assert (e.u0, e.period) == (1, (2,))


def test_period_limit():
    with pytest.raises(PeriodLimitExceeded):
        expand(field(25982), max_period=10)
    assert expand(field(25982), max_period=36).s == 36


@pytest.mark.parametrize("D", [7, 13, 46559, 12441])
def test_complete_quotients_floor(D):
    exp = expand(field(D))
    for i in range(1, 2 * exp.s + 2):
        assert surd_floor(complete_quotient(exp, i)) == exp.u(i)


@pytest.mark.parametrize("D", [19, 13, 715461, 25982])
def test_convergents(D):
    exp = expand(field(D))
    stream = list(itertools.islice(convergents(exp), 2 * exp.s + 2))
    assert stream[0] == (-1, 1, 0)
    for i, p, q in stream[1:8]:
        assert convergent_at(exp, i) == (p, q)
    # p_i q_{i-1} - p_{i-1} q_i = (-1)^(i-1)
    for (_, p0, q0), (i, p1, q1) in zip(stream, stream[1:]):
        assert p1 * q0 - p0 * q1 == (-1) ** (i - 1)


def test_convergent_index_guard():
    with pytest.raises(ValueError):
        convergent_at(expand(field(7)), -2)
    with pytest.raises(ValueError):
        complete_quotient(expand(field(7)), 0)
