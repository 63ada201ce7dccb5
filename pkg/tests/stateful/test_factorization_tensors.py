import pytest
from eqmirror.mf import (
    Polynomial,
    koszul_stabilization,
    residue_field_stabilization,
    tensor_product,
)
from hypothesis import settings, strategies as st
from hypothesis.stateful import RuleBasedStateMachine, initialize, invariant, rule
from tests.helpers import ring
from tests.stateful.invariants import check_factorization_invariants

R = ring("x", "y")
linearForms = st.sampled_from(["x", "y", "x + y", "x - 2*y", "3*x"])


class FactorizationTensorMachine(RuleBasedStateMachine):
    """Builds up factorizations by tensoring Koszul pieces, tracking the potential by hand"""

    @initialize()
    def start(self):
        self.w = R.parse("x^2")
        self.M = residue_field_stabilization(self.w)

    @rule(f=linearForms, g=linearForms)
    def tensor_koszul(self, f, g):
        (f, g) = (R.parse(f), R.parse(g))
        self.M = tensor_product(self.M, koszul_stabilization([f], [g]))
        self.w = self.w + f * g

    @rule(k=st.integers(0, 3))
    def tensor_with_unit_monomial(self, k):
        x = R.variable("x")
        piece = koszul_stabilization([Polynomial.constant(1, 2)], [x ** k])
        self.M = tensor_product(self.M, piece)
        self.w = self.w + x ** k

    @invariant()
    def factorizes_the_tracked_potential(self):
        if self.M.ranks[0] <= 32:
            check_factorization_invariants(self.M, self.w)


FactorizationTensorMachine.TestCase.settings = settings(
    max_examples=15, stateful_step_count=4, deadline=None
)
TestFactorizationTensors = pytest.mark.stateful(
    pytest.mark.mf(FactorizationTensorMachine.TestCase)
)
