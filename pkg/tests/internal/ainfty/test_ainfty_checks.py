from fractions import Fraction

import pytest
from eqmirror.ainfty import (
    ZERO_CLASS,
    BoundingCochainCandidate,
    GappedAInfty,
    GappedMonoid,
    algebra_from_json,
    check_ainfty,
    check_gdiff_compat,
    check_unitality,
    unshifted_view,
)
from eqmirror.errors import InputError
from eqmirror.mirror import E1, UNIT, Brane, ToricMirrorGeometry, model_algebra
from eqmirror.novikov import NovikovScalar
from hypothesis import given, settings, strategies as st


def ground_field(max_arity=3):
    """The unit alone, m_2(1, 1) = 1"""
    monoid = GappedMonoid.trivial(3)
    operations = {(k, ZERO_CLASS): {} for k in range(1, max_arity + 1)}
    operations[(2, ZERO_CLASS)] = {(0, 0): {0: 1}}
    return GappedAInfty([0], 0, monoid, operations, max_arity=max_arity)


def mirror_model(u=Fraction(1, 3)):
    geom = ToricMirrorGeometry.cp1()
    return model_algebra(geom, Brane(geom, u, 1), cutoff=3)


def passes_all(A):
    return all(
        report.passed
        for report in (check_ainfty(A, 0), check_unitality(A), check_gdiff_compat(A, 0))
    )


@st.composite
def mutation_strategy(draw):
    A = mirror_model()
    keys = sorted(A.operations, key=lambda key: (key[0], key[1][1], key[1][0]))
    (k, beta) = draw(st.sampled_from(keys))
    inputs = tuple(draw(st.lists(st.sampled_from([UNIT, E1]), min_size=k, max_size=k)))
    out = draw(st.sampled_from([UNIT, E1]))
    # m_{l,beta}(e1, .., e1) -> 1 are the disk counts; their values are not constrained
    if beta[0] == 2 and all(x == E1 for x in inputs) and out == UNIT:
        out = E1
    return (A, (k, beta), inputs, out)


@pytest.mark.ainfty
class TestMonoid:
    def test_enumeration_up_to_cutoff(self):
        monoid = GappedMonoid([(2, Fraction(1, 3)), (2, Fraction(2, 3))], Fraction(1))
        assert monoid.elements == [
            ZERO_CLASS,
            (2, Fraction(1, 3)),
            (2, Fraction(2, 3)),
            (4, Fraction(2, 3)),
            (4, Fraction(1)),
            (6, Fraction(1)),
        ]

    @pytest.mark.parametrize("generator", [(1, 1), (2, -1), (2, 0)])
    def test_bad_generators(self, generator):
        with pytest.raises(InputError):
            GappedMonoid([generator], 3)

    def test_splits(self):
        monoid = GappedMonoid([(2, 1)], 2)
        assert monoid.splits((4, Fraction(2))) == [
            (ZERO_CLASS, (4, Fraction(2))),
            ((2, Fraction(1)), (2, Fraction(1))),
            ((4, Fraction(2)), ZERO_CLASS),
        ]


@pytest.mark.ainfty
class TestChecks:
    def test_ground_field(self):
        A = ground_field()
        assert check_ainfty(A).passed
        assert check_unitality(A).passed

    def test_rescaled_unit_fails_unitality(self):
        A = ground_field()
        A.operations[(2, ZERO_CLASS)][(0, 0)][0] = 2
        assert check_ainfty(A).passed
        assert not check_unitality(A).passed

    def test_differential_squaring_to_nonzero_fails(self):
        A = ground_field()
        A.operations[(1, ZERO_CLASS)] = {(0,): {0: 1}}
        report = check_ainfty(A)
        assert not report.passed
        assert (1, ZERO_CLASS) in report.failures()

    def test_holes_are_refused(self):
        A = ground_field()
        del A.operations[(3, ZERO_CLASS)]
        with pytest.raises(InputError, match="missing tensors"):
            check_ainfty(A)

    def test_zero_energy_curvature_is_refused(self):
        with pytest.raises(InputError, match="must vanish"):
            GappedAInfty(
                [0], 0, GappedMonoid.trivial(3), {(0, ZERO_CLASS): {(): {0: 1}}}, max_arity=2
            )

    def test_mirror_model_is_exact(self):
        A = mirror_model()
        for report in (check_ainfty(A, 0), check_unitality(A), check_gdiff_compat(A, 0)):
            assert report.passed
            assert report.largest == 0
        assert check_gdiff_compat(A).agreement

    @settings(max_examples=10)
    @given(mutation=mutation_strategy())
    def test_single_entry_mutations_are_detected(self, mutation):
        (A, key, inputs, out) = mutation
        outs = A.operations[key].setdefault(inputs, {})
        outs[out] = outs.get(out, 0) + 1
        assert not passes_all(A)

    def test_json_round_trip(self):
        A = mirror_model()
        B = algebra_from_json(A.to_json())
        assert B.operations == A.operations
        assert B.monoid.elements == A.monoid.elements

    def test_malformed_json(self):
        with pytest.raises(InputError, match="malformed"):
            algebra_from_json({"degrees": [0]})

    def test_unshifted_signs(self):
        A = mirror_model()
        view = unshifted_view(A, 2)
        assert view[(E1, UNIT)] == {E1: 1}
        assert view[(UNIT, E1)] == {E1: 1}


@pytest.mark.ainfty
class TestBoundingCochainCandidate:
    def test_constants_from_interior(self):
        A = mirror_model()
        b = BoundingCochainCandidate({E1: NovikovScalar.monomial(1, 1)})
        (constant,) = b.validate(A)
        assert constant.approx(NovikovScalar.monomial(1, 1))

    def test_needs_positive_valuation(self):
        A = mirror_model()
        b = BoundingCochainCandidate({E1: NovikovScalar.constant(1)})
        with pytest.raises(InputError, match="Λ₊"):
            b.validate(A)

    def test_needs_degree_one(self):
        A = mirror_model()
        b = BoundingCochainCandidate({UNIT: NovikovScalar.monomial(1, 1)})
        with pytest.raises(InputError, match="degree 0"):
            b.validate(A)
