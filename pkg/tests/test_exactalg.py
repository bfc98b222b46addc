import math
import random
from fractions import Fraction

import pytest
from hypothesis import given

from conftest import jets, nonzero_scalars, scalars
from sokolskii.exactalg import (
    SQRT2,
    Jet,
    PoleAtOrigin,
    Scalar,
    UnsupportedShift,
    jet_compose_elem,
)

y1, y2, p1, p2 = Jet.gens()


# -- Scalar ------------------------------------------------------------------

def test_conjugate_product():
    assert (1 + SQRT2) * (1 - SQRT2) == Scalar(-1)


def test_sqrt2_entries_multiply_to_half():
    assert (SQRT2 / 4) * SQRT2 == Scalar(Fraction(1, 2))


def test_rational_inverse():
    assert Scalar(Fraction(3, 2)).invert() == Scalar(Fraction(2, 3))


def test_invert_zero_raises():
    with pytest.raises(ZeroDivisionError):
        Scalar(0).invert()
    with pytest.raises(ZeroDivisionError):
        Scalar(1) / Scalar(0)


def test_lowest_terms_and_structural_equality():
    a = Scalar(Fraction(2, 4), Fraction(-3, -6))
    assert a.rat == Fraction(1, 2) and a.root2 == Fraction(1, 2)
    assert a == Scalar(Fraction(1, 2), Fraction(1, 2))
    assert hash(a) == hash(Scalar(Fraction(1, 2), Fraction(1, 2)))


@pytest.mark.parametrize("text", ["0", "-13/32", "1/4*sqrt2", "-1/4*sqrt2", "3/2-7/5*sqrt2", "sqrt2", "-sqrt2", "1/10*sqrt2", "12*sqrt2"])
def test_parse_round_trip(text):
    s = Scalar.parse(text)
    assert Scalar.parse(str(s)) == s


def test_exact_sign():
    assert (SQRT2 - Fraction(141, 100)).sign() == 1
    assert (SQRT2 - Fraction(142, 100)).sign() == -1
    assert Scalar(0).sign() == 0
    assert (3 - 2 * SQRT2).sign() == 1


@given(scalars, scalars, scalars)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == Scalar(0)


@given(nonzero_scalars)
def test_inverse_axiom(a):
    assert a * a.invert() == Scalar(1)
    assert a.invert() == a.conjugate() / a.norm()


@given(scalars)
def test_float_agrees(a):
    assert math.isclose(float(a), float(a.rat) + float(a.root2) * math.sqrt(2), abs_tol=1e-12)


# -- Jet arithmetic ------------------------------------------------------------

def test_square_of_variable():
    assert y1 * y1 == Jet({(2, 0, 0, 0): Scalar(1)})


def test_product_truncated():
    assert (y1**3 * y1**2).is_zero()


def test_hand_expansion():
    lhs = (p1 * y2 - p2 * y1) ** 2
    rhs = p1 * p1 * y2 * y2 - 2 * p1 * p2 * y1 * y2 + p2 * p2 * y1 * y1
    assert lhs == rhs


def test_max_degree_mismatch():
    with pytest.raises(ValueError):
        Jet.var(0, 4) + Jet.var(0, 6)


def test_no_zero_or_high_degree_terms_stored():
    j = Jet({(1, 0, 0, 0): Scalar(0), (5, 0, 0, 0): Scalar(1), (0, 1, 0, 0): Scalar(2)})
    assert list(j.terms) == [(0, 1, 0, 0)]


@given(jets(), jets(), jets())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(jets())
def test_text_round_trip(a):
    assert Jet.from_text(a.to_text(header=True)) == a


def test_text_format():
    txt = (Jet.const(Fraction(1, 2)) * y1 * y1 + SQRT2 * p2).to_text()
    assert txt.splitlines() == ["1*sqrt2 * y1^0 y2^0 p1^0 p2^1", "1/2 * y1^2 y2^0 p1^0 p2^0"]


# -- elementary compositions ---------------------------------------------------

def test_sin_maclaurin():
    assert jet_compose_elem("sin", y1) == y1 - y1**3 / 6


def test_cos_maclaurin():
    assert jet_compose_elem("cos", y1) == 1 - y1**2 / 2 + y1**4 / 24


def test_recip_multiply_back():
    u = Jet.const(Fraction(1, 3)) + y1 * y1
    inv = jet_compose_elem("recip", u)
    assert u * inv == Jet.const(1)
    assert inv == 3 - 9 * y1**2 + 27 * y1**4


def test_recip_pole():
    with pytest.raises(PoleAtOrigin):
        jet_compose_elem("recip", y1 + y2)


def test_sin_shift():
    with pytest.raises(UnsupportedShift):
        jet_compose_elem("sin", 1 + y1)


@given(jets(min_degree=1), nonzero_scalars)
def test_recip_property(u, c):
    u = u + Jet.const(c)
    assert u * jet_compose_elem("recip", u) == Jet.const(1)


@given(jets(min_degree=1))
def test_pythagoras(u):
    s, c = jet_compose_elem("sin", u), jet_compose_elem("cos", u)
    assert s * s + c * c == Jet.const(1)


def test_numeric_cross_check():
    # degree-8 jets on [-0.1, 0.1]^4: the remainder of sin * cos is O(0.2^9)
    rng = random.Random(7)
    g = Jet.gens(8)
    s = jet_compose_elem("sin", g[0] + g[3])
    c = jet_compose_elem("cos", g[1] - g[2])
    expr = s * c
    for _ in range(100):
        pt = [rng.uniform(-0.1, 0.1) for _ in range(4)]
        want = math.sin(pt[0] + pt[3]) * math.cos(pt[1] - pt[2])
        assert math.isclose(expr(pt), want, rel_tol=1e-8, abs_tol=1e-12)


def test_recip_numeric_truncation_bound():
    g = Jet.gens(8)
    s = jet_compose_elem("sin", g[0])
    r = jet_compose_elem("recip", Jet.const(Fraction(1, 3), 8) + s * s)
    rng = random.Random(3)
    for _ in range(100):
        x = rng.uniform(-0.1, 0.1)
        want = 1 / (1 / 3 + math.sin(x) ** 2)
        # geometric remainder (3 x^2)^5 of the reciprocal series
        assert abs(r([x, 0, 0, 0]) - want) <= 3 * 2 * (3 * x * x) ** 5 + 1e-14


def test_divide_exact():
    a = (y1 + y2) * (y1 - p1)
    assert a.divide_exact(y1 + y2) == y1 - p1
    assert (a + p2).divide_exact(y1 + y2) is None


def test_substitute_and_diff():
    j = y1 * y1 * p2 + y2
    assert j.diff(0) == 2 * y1 * p2
    assert j.substitute([p2, y1, y2, y1]) == p2 * p2 * y1 + y1


def test_parse_multi_digit_surd():
    assert Scalar.parse("1/10*sqrt2") == SQRT2 / 10
    assert Scalar.parse("2-sqrt2") == 2 - SQRT2
    with pytest.raises(ValueError):
        Scalar.parse("1sqrt2")
