from fractions import Fraction

import pytest
from eqmirror.errors import InputError
from eqmirror.novikov import INFINITY
from eqmirror.tropical import (
    PRESETS,
    Fan,
    SupportFunctionData,
    epsilon_P,
    polyhedron,
    validate,
)
from tests.constants import EPSILON


def checks(report):
    return sorted({failure["check"] for failure in report.failures})


@pytest.mark.tropical
class TestFan:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_are_valid(self, name):
        (fan, phi) = Fan.preset(name)
        report = validate(fan, phi)
        assert report.passed, report.failures
        assert fan.name == name

    def test_unknown_preset(self):
        with pytest.raises(InputError, match="unknown fan"):
            Fan.preset("P3")

    def test_ragged_rays(self):
        with pytest.raises(InputError, match="coordinates"):
            Fan([[1, 0], [1]], [[0, 1]])

    def test_missing_ray(self):
        with pytest.raises(InputError, match="missing ray"):
            Fan([[1]], [[1]])

    def test_faces(self):
        (fan, _) = Fan.preset("P2")
        assert fan.cones() == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]
        assert fan.spans_cone((0, 1))
        assert not fan.spans_cone((0, 1, 2))

    def test_dual_basis(self):
        (fan, _) = Fan.preset("P2")
        dual = fan.dual_basis((1, 2))
        for (i, f) in zip((1, 2), dual):
            for j in (1, 2):
                pairing = sum(a * b for (a, b) in zip(f, fan.rays[j]))
                assert pairing == (1 if i == j else 0)

    def test_json(self):
        (fan, phi) = Fan.preset("F1")
        obj = dict(fan.to_json(), phi=phi.to_json())
        (again, values) = Fan.from_json(obj)
        assert again.rays == fan.rays
        assert again.max_cones == fan.max_cones
        assert values.values == phi.values

    def test_declared_rank_must_match(self):
        with pytest.raises(InputError, match="declared rank"):
            Fan.from_json({"n": 2, "rays": [[1], [-1]], "max_cones": [[0], [1]], "phi": [0, 1]})

    def test_malformed(self):
        with pytest.raises(InputError, match="malformed fan"):
            Fan.from_json({"rays": [[1]]})

    def test_linear_extension(self):
        (fan, phi) = Fan.preset("P2")
        assert phi.linear_extension(fan, (1, 2)) == (-1, 0)


@pytest.mark.tropical
class TestValidate:
    def test_value_count(self):
        (fan, _) = Fan.preset("P1")
        assert checks(validate(fan, SupportFunctionData([0]))) == ["values"]

    def test_non_unimodular(self):
        fan = Fan([[1, 0], [1, 2]], [[0, 1]])
        assert checks(validate(fan, SupportFunctionData([0, 0]))) == ["unimodular"]

    @pytest.mark.parametrize("values", [[0, 0], [0, -1]])
    def test_not_strictly_convex(self, values):
        (fan, _) = Fan.preset("P1")
        report = validate(fan, SupportFunctionData(values))
        assert checks(report) == ["convexity"]

    def test_no_full_dimensional_cone(self):
        fan = Fan([[1, 0], [0, 1]], [[0], [1]])
        assert "support" in checks(validate(fan, SupportFunctionData([0, 0])))

    def test_invalid_fans_are_refused(self):
        (fan, _) = Fan.preset("P2")
        with pytest.raises(InputError, match="invalid fan: convexity"):
            epsilon_P(fan, SupportFunctionData([0, 0, 0]))


@pytest.mark.tropical
class TestPolyhedron:
    def test_interval(self):
        P = polyhedron(*Fan.preset("P1"))
        assert P.vertices == [(0,), (1,)]
        assert P.recession == []
        assert P.pointed
        assert P.interior((Fraction(1, 2),))
        assert P.contains((1,)) and not P.interior((1,))

    def test_triangle(self):
        P = polyhedron(*Fan.preset("P2"))
        assert P.vertices == [(0, 0), (0, 1), (1, 0)]

    def test_quadrant(self):
        P = polyhedron(*Fan.preset("C2"))
        assert P.vertices == [(0, 0)]
        assert P.recession == [(0, 1), (1, 0)]
        assert P.to_json()["pointed"]

    def test_half_line(self):
        P = polyhedron(*Fan.preset("C"))
        assert P.vertices == [(0,)]
        assert P.recession == [(1,)]


@pytest.mark.tropical
class TestEpsilon:
    @pytest.mark.parametrize("name", sorted(EPSILON))
    def test_thresholds(self, name):
        assert epsilon_P(*Fan.preset(name)) == EPSILON[name]

    @pytest.mark.parametrize("name", ["C", "C2"])
    def test_single_cone_has_no_threshold(self, name):
        assert epsilon_P(*Fan.preset(name)) == INFINITY

    def test_scaling_the_polyhedron(self):
        (fan, _) = Fan.preset("P1")
        assert epsilon_P(fan, SupportFunctionData([0, 3])) == Fraction(3, 2)
