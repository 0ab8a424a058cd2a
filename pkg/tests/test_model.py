from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ramanadual.fixtures import (example_1_1, example_4_1, example_4_1_dual_optimal,
                                 random_invertible)
from ramanadual.model import (NotFeasible, RescalingTransform, SdpInstance, SingularTransformError,
                              Slack, adjoint, apply_operator, check_dual_feasible, dual_objective,
                              primal_objective, rescale, slack_of)

from conftest import random_psd, random_sym

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def y_eps(eps: float) -> np.ndarray:
    return np.array([[eps, 1.0], [1.0, 1.0 / eps]])


def random_instance(rng, n: int, m: int) -> tuple[SdpInstance, np.ndarray]:
    """Instance with a known feasible point ``x0``."""
    A = tuple(random_sym(rng, n) for _ in range(m))
    x0 = rng.standard_normal(m)
    B = random_psd(rng, n, int(rng.integers(1, n + 1))) + np.tensordot(x0, np.stack(A), axes=1)
    return SdpInstance(A, B, rng.standard_normal(m), name="random"), x0


class TestInstance:
    def test_shapes(self):
        inst = example_4_1()
        assert (inst.n, inst.m) == (4, 3)
        assert inst.stacked().shape == (3, 4, 4)

    def test_immutable(self):
        inst = example_1_1()
        with pytest.raises(ValueError):
            inst.B[0, 0] = 2.0

    @pytest.mark.parametrize("A,B,c", [
        ((), np.eye(2), []),
        ((np.eye(2),), np.eye(2), [1.0, 2.0]),
        ((np.eye(3),), np.eye(2), [1.0]),
    ])
    def test_rejects_inconsistent(self, A, B, c):
        with pytest.raises(ValueError):
            SdpInstance(A, B, c)


class TestOperator:
    def test_example_1_1(self):
        assert np.array_equal(apply_operator(example_1_1(), [1.0]), SWAP)

    def test_zero(self):
        assert np.array_equal(apply_operator(example_4_1(), np.zeros(3)), np.zeros((4, 4)))

    def test_example_4_1_second_matrix(self):
        inst = example_4_1()
        assert np.array_equal(apply_operator(inst, [0.0, 1.0, 0.0]), inst.A[1])

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            apply_operator(example_1_1(), [1.0, 2.0])


class TestAdjoint:
    def test_example_1_1(self):
        assert np.array_equal(adjoint(example_1_1(), SWAP), [2.0])

    def test_zero(self):
        assert np.array_equal(adjoint(example_4_1(), np.zeros((4, 4))), np.zeros(3))

    def test_first_certificate_is_orthogonal(self):
        assert np.array_equal(adjoint(example_4_1(), np.diag([0.0, 0.0, 0.0, 1.0])), np.zeros(3))


class TestSlack:
    def test_example_1_1_at_zero(self):
        s = slack_of(example_1_1(), [0.0])
        assert isinstance(s, Slack)
        assert np.array_equal(s.S, np.diag([1.0, 0.0]))

    def test_example_1_1_infeasible(self):
        s = slack_of(example_1_1(), [0.5])
        assert isinstance(s, NotFeasible)
        assert not s
        S = example_1_1().B - 0.5 * SWAP
        assert s.witness @ S @ s.witness < 0

    def test_example_4_1_at_zero(self):
        assert np.array_equal(slack_of(example_4_1(), np.zeros(3)).S, np.diag([1.0, 1.0, 0.0, 0.0]))


class TestDualFeasible:
    def test_y_eps_feasible(self):
        rep = check_dual_feasible(example_1_1(), y_eps(1.0))
        assert rep
        assert rep.objective == 1.0

    def test_swap_not_psd(self):
        rep = check_dual_feasible(example_1_1(), SWAP)
        assert not rep
        assert rep.eq_residual == 0.0
        assert rep.cone_residual == pytest.approx(1.0)

    def test_example_4_1_optimal(self):
        rep = check_dual_feasible(example_4_1(), example_4_1_dual_optimal())
        assert rep
        assert rep.objective == 1.0

    def test_equality_violation(self):
        rep = check_dual_feasible(example_1_1(), np.eye(2))
        assert not rep
        assert rep.eq_residual == 2.0


class TestObjectives:
    def test_primal_example_1_1(self):
        assert primal_objective(example_1_1(), [0.0]) == 0.0

    def test_dual_example_4_1(self):
        assert dual_objective(example_4_1(), example_4_1_dual_optimal()) == 1.0

    def test_primal_zero(self, rng):
        inst, _ = random_instance(rng, 3, 2)
        assert primal_objective(inst, np.zeros(2)) == 0.0


class TestRescale:
    def test_identity(self):
        inst = example_4_1()
        assert rescale(inst, np.eye(4)).allclose(inst)

    def test_diagonal_example(self):
        out = rescale(example_1_1(), np.diag([1.0, 2.0]))
        assert np.array_equal(out.B, np.diag([1.0, 0.0]))
        assert np.array_equal(out.A[0], [[0.0, 2.0], [2.0, 0.0]])
        assert np.array_equal(out.c, [2.0])

    def test_round_trip(self, rng):
        inst, _ = random_instance(rng, 4, 3)
        T = RescalingTransform(random_invertible(rng, 4, 100.0))
        back = rescale(rescale(inst, T), T.inverse())
        assert back.allclose(inst, atol=1e-10)

    def test_singular(self):
        with pytest.raises(SingularTransformError):
            RescalingTransform(np.diag([1.0, 0.0]))

    def test_order_mismatch(self):
        with pytest.raises(ValueError):
            rescale(example_1_1(), np.eye(3))

    def test_composition(self, rng):
        T1, T2 = random_invertible(rng, 3, 10.0), random_invertible(rng, 3, 10.0)
        acc = RescalingTransform(T1, ("a",)).then(T2, "b")
        assert acc.factors == ("a", "b")
        inst, _ = random_instance(rng, 3, 2)
        assert rescale(inst, acc).allclose(rescale(rescale(inst, T1), T2), atol=1e-10, rtol=1e-10)


@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_slack_congruence(n, m, seed):
    rng = np.random.default_rng(seed)
    inst, x0 = random_instance(rng, n, m)
    T = random_invertible(rng, n, 100.0)
    S = slack_of(inst, x0, tol=1e-7)
    S2 = slack_of(rescale(inst, T), x0, tol=1e-7)
    assert isinstance(S, Slack) and isinstance(S2, Slack)
    assert np.allclose(S2.S, T.T @ S.S @ T, atol=1e-9 * (1.0 + np.linalg.norm(S2.S)))


@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_dual_feasibility_transported(n, m, seed):
    rng = np.random.default_rng(seed)
    A = tuple(random_sym(rng, n) for _ in range(m))
    Y = random_psd(rng, n)
    inst = SdpInstance(A, random_sym(rng, n), [float(np.sum(Ai * Y)) for Ai in A])
    Tm = random_invertible(rng, n, 100.0)
    T = RescalingTransform(Tm)
    rep = check_dual_feasible(inst, Y)
    rep2 = check_dual_feasible(rescale(inst, T), T.map_dual(Y), tol=1e-7)
    assert rep and rep2
    assert rep2.objective == pytest.approx(rep.objective, rel=1e-9, abs=1e-9)


@given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_adjoint_identity(n, m, seed):
    rng = np.random.default_rng(seed)
    inst = SdpInstance(tuple(random_sym(rng, n) for _ in range(m)), np.eye(n), np.zeros(m))
    x, Y = rng.standard_normal(m), random_sym(rng, n)
    lhs = float(np.sum(apply_operator(inst, x) * Y))
    rhs = float(x @ adjoint(inst, Y))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
