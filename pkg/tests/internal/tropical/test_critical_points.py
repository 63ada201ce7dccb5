import math
from fractions import Fraction

import pytest
from eqmirror.errors import HypothesisViolation, InputError
from eqmirror.novikov import INFINITY, NovikovScalar
from eqmirror.tropical import (
    Fan,
    SupportFunctionData,
    admissible_lambda,
    hensel_lift_critical,
    initial_term,
    jacobian_count,
    jacobian_ring_dim,
    log_derivative,
    mirror_polynomial,
    separation_margin,
    tropical_critical_points,
)
from tests.constants import TROPICAL_COUNTS

QUARTER = [NovikovScalar.monomial(1, Fraction(1, 4))]


@pytest.mark.tropical
class TestMirrorPolynomial:
    def test_interval(self):
        f = mirror_polynomial(*Fan.preset("P1"))
        assert set(f) == {(1,), (-1,)}
        assert f[(-1,)].approx(NovikovScalar.monomial(1, 1))

    def test_perturbation(self):
        extra = {(2,): NovikovScalar.monomial(1, 2)}
        f = mirror_polynomial(*Fan.preset("P1"), perturbation=extra)
        assert f[(2,)].valuation == 2

    def test_coefficients(self):
        f = mirror_polynomial(*Fan.preset("P1"), coefficients=[2, 3])
        assert f[(1,)].leading == 2

    def test_log_derivative(self):
        f = mirror_polynomial(*Fan.preset("P2"))
        d = log_derivative(f, (1, 0))
        assert set(d) == {(1, 0), (-1, -1)}
        assert d[(-1, -1)].leading == -1


@pytest.mark.tropical
class TestInitialTerms:
    def test_balanced_point_is_tropical(self):
        f = mirror_polynomial(*Fan.preset("P1"))
        result = initial_term(f, (Fraction(1, 2),))
        assert result.in_tropical
        assert set(result.terms) == {(1,), (-1,)}

    def test_single_monomial(self):
        f = mirror_polynomial(*Fan.preset("P1"))
        result = initial_term(f, (Fraction(1, 4),))
        assert not result.in_tropical
        assert result.terms == {(1,): 1}

    def test_restricted_to_a_cone(self):
        (fan, phi) = Fan.preset("P1")
        f = mirror_polynomial(fan, phi)
        result = initial_term(f, (Fraction(1, 2),), tau=(0,), fan=fan)
        assert list(result.terms) == [(1,)]

    def test_empty_initial_form(self):
        assert initial_term({}, (0,)).in_tropical

    def test_cone_needs_fan(self):
        with pytest.raises(InputError, match="needs the fan"):
            initial_term({}, (0,), tau=(0,))


@pytest.mark.tropical
class TestTropicalPoints:
    def test_interval(self):
        points = tropical_critical_points(*Fan.preset("P1"), QUARTER)
        assert sorted(p.point for p in points) == [(Fraction(1, 4),), (Fraction(3, 4),)]
        assert all(p.valuations == [Fraction(1, 4)] for p in points)

    def test_points_are_interior(self):
        (fan, phi) = Fan.preset("P2")
        for p in tropical_critical_points(fan, phi, admissible_lambda(fan, phi)):
            assert all(
                sum(a * b for (a, b) in zip(p.point, fan.rays[i])) + phi[i] > 0
                for i in range(len(fan.rays))
            )

    @pytest.mark.parametrize(
        "lam", [NovikovScalar.monomial(1, Fraction(3, 4)), NovikovScalar.constant(1)]
    )
    def test_hypotheses(self, lam):
        with pytest.raises(HypothesisViolation, match="eps_P"):
            tropical_critical_points(*Fan.preset("P1"), [lam])

    def test_equal_lambdas_vanish_on_a_cone(self):
        # lambda_2 - lambda_1 is the first component on the cone of (0, 1) and (-1, -1)
        with pytest.raises(HypothesisViolation, match=r"σ = \[1, 2\]"):
            tropical_critical_points(*Fan.preset("P2"), [QUARTER[0], QUARTER[0]])

    def test_component_count(self):
        with pytest.raises(InputError, match="2 components"):
            tropical_critical_points(*Fan.preset("P2"), QUARTER)

    def test_margins(self):
        margins = separation_margin(*Fan.preset("P1"), QUARTER)
        assert margins == {(0,): Fraction(1, 4), (1,): Fraction(1, 4)}

    def test_margin_without_other_rays(self):
        assert separation_margin(*Fan.preset("C"), QUARTER) == {(0,): INFINITY}

    def test_admissible_lambda(self):
        lam = admissible_lambda(*Fan.preset("P2"))
        assert [v.valuation for v in lam] == [Fraction(1, 6), Fraction(1, 6)]
        assert lam[1].leading == pytest.approx(math.sqrt(2))


@pytest.mark.tropical
class TestHenselLift:
    @pytest.mark.parametrize(
        "cone,valuation,sign", [((0,), Fraction(1, 4), 1), ((1,), Fraction(3, 4), -1)]
    )
    def test_interval(self, cone, valuation, sign):
        lift = hensel_lift_critical(*Fan.preset("P1"), QUARTER, cone)
        (y,) = lift.point
        assert y.valuation == valuation
        assert y.leading == pytest.approx(sign)
        assert lift.nondegenerate
        assert lift.certificate.valuation == 0

    def test_critical_equation_holds(self):
        (fan, phi) = Fan.preset("P2")
        lam = admissible_lambda(fan, phi)
        f = mirror_polynomial(fan, phi)
        for p in tropical_critical_points(fan, phi, lam):
            lift = hensel_lift_critical(fan, phi, lam, p.cone)
            for k in range(fan.n):
                residual = NovikovScalar.zero() - lam[k]
                for (v, c) in log_derivative(f, [int(i == k) for i in range(fan.n)]).items():
                    term = c
                    for (coordinate, e) in zip(lift.point, v):
                        for _ in range(abs(e)):
                            term = term * coordinate if e > 0 else term / coordinate
                    residual = residual + term
                assert residual.is_negligible(1e-8)

    def test_tropical_leading_valuations(self):
        (fan, phi) = Fan.preset("P2")
        lam = admissible_lambda(fan, phi)
        for p in tropical_critical_points(fan, phi, lam):
            lift = hensel_lift_critical(fan, phi, lam, p.cone)
            assert tuple(y.valuation for y in lift.point) == p.point

    @pytest.mark.parametrize("name", ["P2", "P1xP1", "F1", "Bl0C2"])
    def test_lifts_every_cone_of_a_surface(self, name):
        (fan, phi) = Fan.preset(name)
        lam = admissible_lambda(fan, phi)
        for p in tropical_critical_points(fan, phi, lam):
            lift = hensel_lift_critical(fan, phi, lam, p.cone)
            assert lift.nondegenerate

    def test_not_a_cone(self):
        with pytest.raises(InputError, match="not a maximal cone"):
            hensel_lift_critical(*Fan.preset("P2"), admissible_lambda(*Fan.preset("P2")), (0,))


@pytest.mark.tropical
class TestJacobianCount:
    @pytest.mark.parametrize("name", sorted(TROPICAL_COUNTS))
    def test_count_matches_cones(self, name):
        result = jacobian_count(*Fan.preset(name))
        assert result.count == TROPICAL_COUNTS[name]
        assert result.equal

    @pytest.mark.parametrize("valuation", [Fraction(1, 4), Fraction(1, 5), Fraction(1, 12)])
    def test_independent_of_lambda(self, valuation):
        (fan, phi) = Fan.preset("P2")
        result = jacobian_count(fan, phi, admissible_lambda(fan, phi, valuation))
        assert result.count == 3

    def test_falls_back_to_admissible_values(self):
        (fan, phi) = Fan.preset("P1")
        result = jacobian_count(fan, phi, [NovikovScalar.constant(1)])
        assert result == (2, 2, True)

    @pytest.mark.parametrize("name", sorted(TROPICAL_COUNTS))
    def test_ring_dimension(self, name):
        assert jacobian_ring_dim(*Fan.preset(name)) == TROPICAL_COUNTS[name]

    def test_ring_dimension_sees_missing_cones(self):
        # y + T/y has two critical points, the fan keeps one of its two cones
        fan = Fan([[1], [-1]], [[0]])
        assert jacobian_ring_dim(fan, SupportFunctionData([0, 1])) == 2
        assert len(fan.maximal) == 1

    def test_equal_lambdas_fall_back(self):
        (fan, phi) = Fan.preset("P2")
        result = jacobian_count(fan, phi, [QUARTER[0], QUARTER[0]])
        assert result == (3, 3, True)
