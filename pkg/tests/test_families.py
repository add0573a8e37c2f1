import json
from fractions import Fraction

import pytest
from sympy import isprime

from quadindec.cf_engine import expand
from quadindec.families import (
    FAMILIES, PRINTED, DomainError, _r_below, corrections, engine_values, fit_linear_in_m,
    instantiate, lin, polynomial, r_bound, verify_instance,
)
from quadindec.quad_core import field


def test_d3_origin():
    inst = instantiate("d3", 0, 0)
    assert inst.D == 6641 * 1487 == 9875167
    assert inst.u0 == 3142
    assert inst.u0 ** 2 < inst.D < (inst.u0 + 1) ** 2
    exp = expand(field(inst.D))
    assert list(exp.period) == [2, 10, 1, 3, 1, 1, 1, 1, 1, 3, 1, 10, 2, 6284] == inst.predicted_pattern


def test_d3_m1():
    assert instantiate("d3", 1, 0).D == (2 * 429 ** 2 + 6641) * (2 * 203 ** 2 + 1487)


def test_d1star_evaluation():
    m, n = 1, 1
    f1 = 2 * (64 * n * n + 144 * n + 69) ** 2 * m + 896 * n ** 3 + 2656 * n ** 2 + 2398 * n + 685
    f2 = 2 * (32 * n * n + 68 * n + 29) ** 2 * m + 224 * n ** 3 + 608 * n ** 2 + 486 * n + 121
    inst = instantiate("d1star", m, n)
    assert inst.D == f1 * f2
    assert inst.D % 4 == 1
    assert (2 * inst.u0 + 1) ** 2 < inst.D < (2 * inst.u0 + 3) ** 2


@pytest.mark.parametrize("fam,m,n", [("d2", 0, 1), ("d2", 1, 0), ("d1star", 1, 0), ("d3", -1, 0),
                                     ("d2", 1, 1), ("d7", 1, 1)])
def test_domain(fam, m, n):
    with pytest.raises(DomainError):
        instantiate(fam, m, n)


def test_congruence_classes():
    for fam, spec in FAMILIES.items():
        for m in range(spec.min_m, 4):
            for n in range(spec.min_n, 4):
                try:
                    D = instantiate(fam, m, n).D
                except DomainError:
                    continue
                assert D % 4 in (spec.cls, 0)


def test_non_squarefree_excluded():
    inst = verify_instance(instantiate("d3", 1, 1))
    assert inst.squarefree is False
    assert list(inst.verification) == ["squarefree"]
    assert not inst.ok and inst.failures() == []


@pytest.mark.parametrize("fam,m,n", [("d3", 0, 0), ("d3", 3, 3), ("d2", 1, 2), ("d2", 3, 3),
                                     ("d1star", 1, 1), ("d1star", 2, 3)])
def test_structural_predictions(fam, m, n):
    inst = verify_instance(instantiate(fam, m, n))
    v = inst.verification
    for key in ("u0", "period", "pattern", "N", "M", "counterexample"):
        assert v[key].passed, (key, v[key])
    assert inst.record.s == FAMILIES[fam].period


def test_gap_identity_where_root_is_generic():
    # d3(0,0): N/2 = 1487 is prime
    inst = verify_instance(instantiate("d3", 0, 0))
    assert inst.verification["gap"].passed
    # d2(3,3): N = 479 * 13759, the residue root is not the generic one
    inst = verify_instance(instantiate("d2", 3, 3))
    assert not isprime(inst.record.N)
    assert inst.verification["gap"].passed is None


def test_r_bound_check_is_exact():
    # gap/sqrt(D) < c  <=>  gap^2 < c^2 D
    assert _r_below(5, 401, r_bound("d1star", 1) * 3)
    assert not _r_below(11, 100, r_bound("d3", 1) * 4)
    assert r_bound("d3", 0) is None
    assert r_bound("d2", 1) == Fraction(3, 28)


def test_d1star_r_bound_holds():
    for m, n in [(1, 1), (1, 2), (1, 3), (2, 2), (3, 1)]:
        inst = verify_instance(instantiate("d1star", m, n))
        assert inst.verification["r_bound"].passed, (m, n)


def test_json_is_string_encoded():
    inst = verify_instance(instantiate("d3", 0, 0))
    js = json.loads(json.dumps(inst.to_json()))
    assert js["D"] == "9875167"
    assert js["verification"]["N"]["passed"] is True
    assert js["sources"]["N"] == "printed"


# -- corrections ---------------------------------------------------------

def test_corrections_table_shape():
    table = corrections()
    assert set(table) == {"d2", "d1star"}
    assert set(table["d2"]) == {"M", "gap", "N"}
    for fam in table.values():
        for entry in fam.values():
            assert entry["source"] == "interpolated"
    assert polynomial("d2", "M")[1] == "interpolated"
    assert polynomial("d3", "M")[1] == "printed"


def _printed_fails(fam, q, m, n):
    D = lin(PRINTED[fam]["f1"], m, n) * lin(PRINTED[fam]["f2"], m, n)
    return engine_values(D)[q] != lin(PRINTED[fam][q], m, n)


def test_printed_d2_M_and_gap_fail_everywhere_sampled():
    for m in (1, 3, 5, 7):
        for n in (2, 3, 4):
            assert _printed_fails("d2", "M", m, n)
    # gap: instances with prime N, where the residue root is generic
    for m, n in [(1, 2), (3, 1), (11, 2), (17, 3), (5, 4)]:
        assert _printed_fails("d2", "gap", m, n)


def _stored(fam, q):
    c = corrections()[fam][q]
    return tuple(c["m"]), tuple(c["1"])


@pytest.mark.parametrize("fam,q", [("d2", "M"), ("d2", "N"), ("d2", "gap"), ("d1star", "N")])
def test_corrections_refit(fam, q):
    fit = corrections()[fam][q]["fit"]
    ms = fit["m"]
    if isinstance(ms, dict):
        ms = {int(k): tuple(v) for k, v in ms.items()}
    else:
        ms = tuple(ms)
    assert fit_linear_in_m(fam, q, ms, fit["n"]) == _stored(fam, q)


def _engine_D(fam, m, n):
    return lin(PRINTED[fam]["f1"], m, n) * lin(PRINTED[fam]["f2"], m, n)


FRESH = {
    # none of these were used for fitting
    ("d2", "M"): [(7, 1), (9, 2), (13, 3), (1, 8), (11, 9), (15, 4)],
    ("d2", "N"): [(7, 1), (9, 2), (13, 3), (1, 8), (11, 9), (15, 4)],
    ("d2", "gap"): [(19, 1), (29, 2), (37, 3), (43, 4), (3, 9)],
    ("d1star", "N"): [(3, 1), (5, 2), (4, 3), (7, 7), (2, 8), (9, 4)],
}


@pytest.mark.parametrize("key", sorted(FRESH))
def test_corrections_on_fresh_instances(key):
    fam, q = key
    poly = _stored(fam, q)
    assert len(FRESH[key]) >= 5
    for m, n in FRESH[key]:
        ev = engine_values(_engine_D(fam, m, n))
        if q == "gap":
            assert isprime(ev["N"]), (m, n)
        assert ev[q] == lin(poly, m, n), (m, n)
