from eqmirror.mf import mf_verify
from eqmirror.novikov import INFINITY, NovikovScalar, truncate
from tests.constants import COEFFICIENT_TOLERANCE


def check_product(a, b, product):
    if a.is_zero or b.is_zero:
        assert product.is_zero
        return
    assert product.valuation == a.valuation + b.valuation
    assert abs(product.leading - a.leading * b.leading) < COEFFICIENT_TOLERANCE
    assert product.precision >= min(a.precision, b.precision)


def check_sum(a, b, total):
    assert total.valuation >= min(a.valuation, b.valuation)
    if a.valuation != b.valuation and min(a.valuation, b.valuation) < total.precision:
        assert total.valuation == min(a.valuation, b.valuation)
    assert total.precision == min(a.precision, b.precision)


def check_inverse(a, inverse):
    one = a * inverse
    expected = NovikovScalar.constant(1, precision=one.precision)
    assert (one - expected).is_negligible(COEFFICIENT_TOLERANCE)
    assert inverse.valuation == -a.valuation


def check_scalar_invariants(scalars):
    for a in scalars:
        assert a.precision != INFINITY
        assert all(e < a.precision for (e, _) in a.terms)
        assert list(a.terms) == sorted(a.terms, key=lambda t: t[0])
        assert truncate(a, a.precision) == a


def check_factorization_invariants(M, w):
    assert (M.w - w).is_zero
    check = mf_verify(M)
    assert check.passed, check.residual
    (r0, r1) = M.ranks
    assert r0 == r1
