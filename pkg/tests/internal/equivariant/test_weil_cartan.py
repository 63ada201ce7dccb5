import pytest
from eqmirror.equivariant import (
    CARTAN,
    WEIL,
    GDiffSpace,
    LieAlgebraData,
    build_model,
    check_gdiff_axioms,
    cohomology,
    curvature_action,
    mathai_quillen,
    weil_algebra,
    weil_cohomology,
)
from eqmirror.errors import InputError, TruncationError


@pytest.mark.equivariant
class TestLieAlgebra:
    def test_so3_is_a_lie_algebra(self):
        report = LieAlgebraData.so3().validate()
        assert report.passed
        assert not LieAlgebraData.so3().is_abelian

    def test_two_dimensional_nonabelian(self):
        structure = [[[0, 1], [-1, 0]], [[0, 1], [-1, 0]]]
        algebra = LieAlgebraData(2, structure)
        assert algebra.validate().passed
        assert not algebra.is_abelian

    def test_asymmetric_bracket_is_reported(self):
        report = LieAlgebraData(1, [[[1]]]).validate()
        assert not report.passed
        assert report.residuals["antisymmetry"] == 2

    def test_shape_is_checked(self):
        with pytest.raises(InputError):
            LieAlgebraData(2, [[[0]]])


@pytest.mark.equivariant
class TestWeilAlgebra:
    @pytest.mark.parametrize("algebra", [LieAlgebraData.abelian(1), LieAlgebraData.so3()])
    def test_relations_hold_on_the_safe_range(self, algebra):
        W = weil_algebra(algebra, 2)
        assert W.check_relations().passed

    def test_weil_algebra_is_acyclic(self):
        W = weil_algebra(LieAlgebraData.abelian(1), 4)
        dims = weil_cohomology(W)
        assert dims[0] == 1
        assert all(d == 0 for (p, d) in dims.items() if p > 0)

    def test_truncation_must_be_positive(self):
        with pytest.raises(InputError):
            weil_algebra(LieAlgebraData.abelian(1), 0)


@pytest.mark.equivariant
class TestCartanModel:
    def test_presets_satisfy_the_axioms(self):
        for M in (
            GDiffSpace.circle_on_itself(),
            GDiffSpace.trivial_circle(),
            GDiffSpace.point(LieAlgebraData.abelian(1)),
        ):
            assert check_gdiff_axioms(M).passed

    def test_broken_cartan_formula(self):
        zero = [[0, 0], [0, 0]]
        M = GDiffSpace(
            ["1", "e1"],
            [0, 1],
            zero,
            [[[0, 1], [0, 0]]],
            [[[0, 0], [0, 1]]],
            LieAlgebraData.abelian(1),
        )
        report = check_gdiff_axioms(M)
        assert not report.passed
        assert report.residuals["cartan_formula"] == 1
        with pytest.raises(InputError):
            build_model(M)

    def test_point(self):
        C = build_model(GDiffSpace.point(LieAlgebraData.abelian(1)), D=4)
        assert cohomology(C) == {0: 1, 1: 0, 2: 1, 3: 0, 4: 1, 5: 0, 6: 1, 7: 0}

    def test_free_circle_action(self):
        C = build_model(GDiffSpace.circle_on_itself(), D=4)
        dims = cohomology(C)
        assert dims[0] == 1
        assert all(d == 0 for (p, d) in dims.items() if p > 0)

    def test_trivial_circle_action(self):
        C = build_model(GDiffSpace.trivial_circle(), D=3)
        assert all(d == 1 for d in cohomology(C).values())

    def test_weil_and_cartan_agree(self):
        M = GDiffSpace.circle_on_itself()
        weil = cohomology(build_model(M, D=3, model=WEIL))
        cartan = cohomology(build_model(M, D=3, model=CARTAN))
        assert weil == cartan

    def test_differential_is_linear_over_curvatures(self):
        C = build_model(GDiffSpace.circle_on_itself(), D=3)
        assert C.square_residual() == 0
        assert C.linearity_residual() == 0
        assert curvature_action(C, 0).shape == (C.space.dimension, C.space.dimension)

    def test_degrees_beyond_truncation(self):
        C = build_model(GDiffSpace.circle_on_itself(), D=2)
        with pytest.raises(TruncationError, match="increase D"):
            cohomology(C, max_degree=4)

    def test_mathai_quillen_intertwines(self):
        M = GDiffSpace.circle_on_itself()
        weil = build_model(M, D=4, model=WEIL)
        mq = mathai_quillen(M, D=4)
        assert mq.intertwining_residual(weil) == 0
        assert mq.lands_in_cartan(weil)

    def test_from_json(self):
        M = GDiffSpace.from_json(
            {"labels": ["1", "e1"], "degrees": [0, 1], "interior": [[[0, 1], [0, 0]]]}
        )
        assert M.dimension == 2
        assert check_gdiff_axioms(M).passed
        with pytest.raises(InputError):
            GDiffSpace.from_json({"degrees": [0]})
