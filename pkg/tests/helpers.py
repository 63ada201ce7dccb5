import json
import math
from fractions import Fraction

from eqmirror.mf import PolyRing
from eqmirror.novikov import NovikovScalar, truncate
from hypothesis import strategies as st
from tests.constants import COEFFICIENT_TOLERANCE

exponentStrategy = st.fractions(
    min_value=Fraction(-3), max_value=Fraction(3), max_denominator=6
)
coefficientStrategy = st.sampled_from([1, -1, 2, -3, 0.5, 1j, -2j, 1 + 1j, 2 - 1j])
positiveExponentStrategy = st.fractions(
    min_value=Fraction(1, 6), max_value=Fraction(3), max_denominator=6
)


@st.composite
def scalar_strategy(draw, min_exponent=None, precision=Fraction(6), max_terms=4):
    exponents = st.fractions(
        min_value=Fraction(-2) if min_exponent is None else min_exponent,
        max_value=Fraction(4),
        max_denominator=6,
    )
    terms = draw(st.lists(st.tuples(exponents, coefficientStrategy), max_size=max_terms))
    return NovikovScalar(terms, precision=precision)


@st.composite
def admissible_lambda_strategy(draw):
    """c T^v with v in (0, 1) away from 1/2"""
    valuation = draw(
        st.fractions(min_value=Fraction(1, 12), max_value=Fraction(11, 12), max_denominator=12)
        .filter(lambda v: v != Fraction(1, 2))
    )
    coefficient = draw(st.sampled_from([1, -1, 2, 0.5, 1j, 1 + 1j]))
    return NovikovScalar.monomial(coefficient, valuation, precision=Fraction(6))


def assert_close(a, b, tolerance=COEFFICIENT_TOLERANCE):
    precision = min(a.precision, b.precision)
    (a, b) = (truncate(a, precision), truncate(b, precision))
    difference = a - b
    assert difference.is_negligible(tolerance), "{} != {}".format(a, b)


def coefficient_matches(scalar, oracle, tolerance=COEFFICIENT_TOLERANCE):
    for (exponent, expected) in oracle.items():
        assert abs(scalar.coefficient(exponent) - complex(expected)) < tolerance


def ring(*names):
    return PolyRing(names or ("x",))


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f)
    return str(path)


def factorial_scale(value, k):
    return value.scale(math.factorial(k))
