"""Ring axioms, evaluation homomorphism, and the symbolic Laurent table."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from todacensus.errors import StructuralError
from todacensus.polyring import WeightedPoly, weierstrass_laurent_symbolic

VARS = ("B", "D0", "D", "g2", "g3")
WEIGHTS = (2, 1, 3, 4, 6)


def _zero():
    return WeightedPoly.zero(VARS, WEIGHTS)


def _one():
    return WeightedPoly.const(VARS, WEIGHTS, 1)


def _mk(term_map):
    p = _zero()
    for exps, coeff in term_map.items():
        t = WeightedPoly.const(VARS, WEIGHTS, coeff)
        for name, e in zip(VARS, exps):
            if e:
                t = t * WeightedPoly.var(VARS, WEIGHTS, name) ** e
        p = p + t
    return p


exps_st = st.tuples(*(st.integers(0, 2) for _ in VARS))
coeff_st = st.fractions(min_value=-4, max_value=4, max_denominator=12)
poly_st = st.dictionaries(exps_st, coeff_st, max_size=5).map(_mk)
point_st = st.fixed_dictionaries(
    {v: st.fractions(min_value=-3, max_value=3, max_denominator=8) for v in VARS}
)


@settings(max_examples=60, deadline=None)
@given(poly_st, poly_st, poly_st)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + _zero() == a
    assert a * _one() == a
    assert a - a == _zero()
    assert -(-a) == a


@settings(max_examples=60, deadline=None)
@given(poly_st, poly_st, point_st)
def test_eval_is_a_homomorphism(a, b, pt):
    assert (a + b).eval(pt) == a.eval(pt) + b.eval(pt)
    assert (a * b).eval(pt) == a.eval(pt) * b.eval(pt)
    assert (a - b).eval(pt) == a.eval(pt) - b.eval(pt)


@settings(max_examples=30, deadline=None)
@given(poly_st)
def test_power_matches_repeated_product(a):
    assert a ** 0 == _one()
    assert a ** 1 == a
    assert a ** 3 == a * a * a


@settings(max_examples=40, deadline=None)
@given(poly_st)
def test_coefficient_decomposition(a):
    # p == sum_k coefficient(v, k) * v^k for each variable
    for name in ("B", "g2"):
        v = WeightedPoly.var(VARS, WEIGHTS, name)
        acc = _zero()
        for k in range(a.degree_in(name) + 1):
            acc = acc + a.coefficient(name, k) * v ** k
        assert acc == a


@settings(max_examples=40, deadline=None)
@given(poly_st)
def test_json_round_trip(a):
    assert WeightedPoly.from_json_dict(a.to_json_dict()) == a


def test_scale_and_substitute():
    p = _mk({(1, 1, 0, 0, 0): Fraction(3), (0, 0, 1, 0, 0): Fraction(1, 2)})
    assert p.scale(Fraction(2)) == p + p
    q = p.substitute_zero("D0")
    assert q == _mk({(0, 0, 1, 0, 0): Fraction(1, 2)})


def test_homogeneity_bookkeeping():
    p = _mk({(1, 2, 0, 0, 0): Fraction(1)})   # weight 2 + 2*1 = 4
    q = _mk({(0, 0, 0, 1, 0): Fraction(7)})   # weight 4
    assert (p + q).is_homogeneous(weight=4)
    r = p + _mk({(0, 0, 1, 0, 0): Fraction(1)})
    assert not r.is_homogeneous()
    assert sorted(r.weight_set()) == [3, 4]


def test_variable_name_validation():
    with pytest.raises(StructuralError):
        WeightedPoly.var(VARS, WEIGHTS, "nope")


# ---------------------------------------------------------------------------
# symbolic Laurent table for the lattice function

def _series_mul(a, b, nmax):
    out = {}
    for na, pa in a.items():
        for nb, pb in b.items():
            n = na + nb
            if n > nmax:
                continue
            out[n] = out.get(n, _gzero()) + pa * pb
    return out


def _gzero():
    return WeightedPoly.zero(("g2", "g3"), (4, 6))


def _gconst(c):
    return WeightedPoly.const(("g2", "g3"), (4, 6), c)


def _gvar(name):
    return WeightedPoly.var(("g2", "g3"), (4, 6), name)


def test_laurent_table_regression():
    b = weierstrass_laurent_symbolic(10)
    assert b[4] == _gvar("g2").scale(Fraction(1, 20))
    assert b[6] == _gvar("g3").scale(Fraction(1, 28))
    for j in (0, 1, 2, 3, 5, 7, 9):
        if j == 0:
            continue
        assert b[j].is_zero()
    # b_8 = g2^2 / 1200 (convolution of the two leading terms)
    assert b[8] == (_gvar("g2") * _gvar("g2")).scale(Fraction(1, 1200))


def test_laurent_table_weights():
    order = 16
    b = weierstrass_laurent_symbolic(order)
    for j in range(4, order + 1):
        if b[j].is_zero():
            continue
        assert b[j].is_homogeneous(weight=j)


def test_laurent_table_satisfies_cubic_identity():
    """Formal check: the table solves (P')^2 = 4 P^3 - g2 P - g3.

    This re-derives the defining property by direct series arithmetic in
    Q[g2, g3] rather than by reusing any recursion, so a transcription slip
    in the table generator cannot cancel out.
    """
    order = 14
    b = weierstrass_laurent_symbolic(order)
    nmax = order - 6
    # series exponents relative to u^0; P starts at u^-2
    P = {-2: _gconst(1)}
    dP = {-3: _gconst(-2)}
    for j in range(4, order + 1):
        if b[j].is_zero():
            continue
        P[j - 2] = b[j]
        dP[j - 3] = b[j].scale(j - 2)
    lhs = _series_mul(dP, dP, nmax)
    # carry the intermediate square two orders past nmax: its tail still
    # reaches nmax after pairing with the u^-2 head of the third factor
    P2 = _series_mul(P, P, nmax + 2)
    P3 = _series_mul(P2, P, nmax)
    resid = dict(lhs)
    for n, poly in P3.items():
        resid[n] = resid.get(n, _gzero()) - poly.scale(4)
    for n, poly in P.items():
        resid[n] = resid.get(n, _gzero()) + _gvar("g2") * poly
    resid[0] = resid.get(0, _gzero()) + _gvar("g3")
    for n in sorted(resid):
        if n > nmax:
            continue
        assert resid[n].is_zero(), "cubic identity fails at order %d" % n
