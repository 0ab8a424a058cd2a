from __future__ import annotations

import numpy as np
import pytest

from ramanadual.duals import (RamanaSolution, StrongDualPoint, build_classical_dual,
                              build_ramana_dual, build_strong_dual, classical_dual_value,
                              embed_classical_dual_point, extract_strong_dual_point,
                              face_consistent_instance, gap_analysis, lift_to_ramana,
                              ramana_num_constraints, ramana_num_vars, ramana_solution_from_x,
                              ramana_solution_to_x, rescale_ramana_solution, verify_ramana)
from ramanadual.facial import FacialCertificate, facial_reduction
from ramanadual.fixtures import (example_1_1, example_1_1_ramana_levels,
                                 example_1_1_strong_dual_point, example_4_1,
                                 example_4_1_dual_optimal, example_4_1_ramana_levels,
                                 example_4_1_strong_dual_point, planted_face, random_invertible,
                                 slater_instance)
from ramanadual.model import RescalingTransform, apply_operator, rescale
from ramanadual.tangent import TangentWitness, compute_beta


def from_levels(levels) -> RamanaSolution:
    U, V, W = levels
    wits = [compute_beta(U[i - 1], W[i]) for i in range(1, len(U))]
    return RamanaSolution(tuple(U), tuple(V), tuple(wits))


FIXED = [(example_1_1, example_1_1_ramana_levels), (example_4_1, example_4_1_ramana_levels)]


class TestBuilders:
    def test_classical_example_1_1(self):
        prog = build_classical_dual(example_1_1())
        assert prog.psd_orders == (2,)
        assert np.array_equal(prog.A, [[0.0, 2.0, 0.0]])
        assert np.array_equal(prog.c, [1.0, 0.0, 0.0])
        assert np.array_equal(prog.b, [2.0])

    def test_strong_example_1_1_is_an_lp(self):
        prog = build_strong_dual(example_1_1(), 1)
        assert prog.psd_orders == (1,)
        assert prog.n_free == 2

    def test_strong_full_rank_is_classical(self):
        inst = example_4_1()
        a, b = build_strong_dual(inst, 4), build_classical_dual(inst)
        assert np.array_equal(a.A, b.A) and np.array_equal(a.c, b.c)
        assert (a.psd_orders, a.n_free) == (b.psd_orders, b.n_free)

    def test_strong_example_4_1(self):
        prog = build_strong_dual(example_4_1(), 2)
        assert prog.psd_orders == (2,)
        assert prog.n_free == 7

    def test_strong_no_psd_block(self):
        prog = build_strong_dual(example_1_1(), 0)
        assert prog.psd_orders == () and prog.n_free == 3

    @pytest.mark.parametrize("r", [-1, 3])
    def test_strong_range(self, r):
        with pytest.raises(ValueError):
            build_strong_dual(example_1_1(), r)

    @pytest.mark.parametrize("n,m", [(2, 1), (4, 3), (3, 2), (5, 1)])
    def test_ramana_counts(self, n, m):
        inst = planted_face(np.random.default_rng(n), n, 1, m=m).instance if n != 2 else example_1_1()
        prog = build_ramana_dual(inst)
        assert prog.num_vars == ramana_num_vars(n, m)
        assert prog.num_constraints == ramana_num_constraints(n, m)

    def test_ramana_counts_example_1_1(self):
        assert (ramana_num_vars(2, 1), ramana_num_constraints(2, 1)) == (39, 25)

    @pytest.mark.parametrize("make,levels", FIXED)
    def test_vector_round_trip(self, make, levels):
        inst = make()
        sol = from_levels(levels())
        x = ramana_solution_to_x(sol)
        back = ramana_solution_from_x(inst, x)
        for a, b in zip(back.U + back.V, sol.U + sol.V):
            assert np.array_equal(a, b)
        prog = build_ramana_dual(inst)
        assert np.max(np.abs(prog.A @ x - prog.b)) <= 1e-12
        assert prog.c @ x == pytest.approx(sol.objective(inst))


class TestVerifyRamana:
    @pytest.mark.parametrize("make,levels", FIXED)
    def test_displayed_solutions(self, make, levels):
        rep = verify_ramana(make(), from_levels(levels()), 1e-9)
        assert rep, rep.messages
        assert rep.objective == 0.0
        assert rep.max_residual <= 1e-9

    def test_non_tangent_v(self):
        U, V, W = example_1_1_ramana_levels()
        Z = np.zeros((2, 2))
        V = list(V)
        V[2] = np.eye(2)
        wits = [TangentWitness(Z, 0.0), TangentWitness(0.5 * np.eye(2), 1.0), compute_beta(U[2], W[3])]
        rep = verify_ramana(example_1_1(), RamanaSolution(tuple(U), tuple(V), tuple(wits)))
        assert not rep
        assert 2 in rep.tangent_failures

    def test_zero_point_with_nonzero_c(self):
        rep = verify_ramana(example_1_1(), embed_classical_dual_point(np.zeros((2, 2))))
        assert not rep
        assert rep.equation_residual > 1.0

    def test_wrong_level_count(self):
        sol = from_levels(example_1_1_ramana_levels())
        assert not verify_ramana(example_4_1(), sol)

    def test_indefinite_level(self):
        U, V, W = (list(a) for a in example_1_1_ramana_levels())
        U[1] = np.diag([-1.0, 0.0])
        sol = RamanaSolution(tuple(U), tuple(V), (TangentWitness(np.zeros((2, 2)), 0.0),) * 3)
        assert not verify_ramana(example_1_1(), sol)

    def test_classical_point_embeds(self):
        rep = verify_ramana(example_4_1(), embed_classical_dual_point(example_4_1_dual_optimal()))
        assert rep
        assert rep.objective == 1.0


def lift_original(inst, Y, r=None):
    """Lift an original-coordinate strong-dual point through facial reduction."""
    fr = facial_reduction(inst)
    cert = fr.certificate
    Yred = cert.accumulated_T.map_dual(Y)
    sol_red = lift_to_ramana(StrongDualPoint(Yred, cert.face_rank), cert, fr.reduced)
    return rescale_ramana_solution(sol_red, cert.accumulated_T.inverse())


class TestLift:
    @pytest.mark.parametrize("make,point", [(example_1_1, example_1_1_strong_dual_point),
                                            (example_4_1, example_4_1_strong_dual_point)])
    def test_examples(self, make, point):
        inst = make()
        sol = lift_original(inst, point())
        rep = verify_ramana(inst, sol, 1e-7)
        assert rep, rep.messages
        assert rep.objective == pytest.approx(0.0, abs=1e-9)

    def test_rank_mismatch(self):
        fr = facial_reduction(example_1_1())
        with pytest.raises(ValueError):
            lift_to_ramana(StrongDualPoint(np.zeros((2, 2)), 2), fr.certificate)

    def test_infeasible_point_rejected(self):
        fr = facial_reduction(example_1_1())
        with pytest.raises(ValueError):
            lift_to_ramana(StrongDualPoint(np.zeros((2, 2)), 1), fr.certificate, fr.reduced)

    @pytest.mark.parametrize("seed", range(50))
    def test_planted_lift_extract(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 6))
        r = int(rng.integers(0, n + 1))
        pf = planted_face(rng, n, r)
        cert = FacialCertificate(pf.certificates, pf.block_sizes, r, RescalingTransform.identity(n))
        ystar = StrongDualPoint(pf.strong_dual_point, r)
        sol = lift_to_ramana(ystar, cert, pf.base)
        rep = verify_ramana(pf.base, sol, 1e-9)
        assert rep, rep.messages
        target = ystar.objective(pf.base)
        assert rep.objective == pytest.approx(target, abs=1e-9)
        # the same point, carried to the transformed instance
        moved = rescale_ramana_solution(sol, pf.T)
        rep2 = verify_ramana(pf.instance, moved, 1e-7)
        assert rep2, rep2.messages
        assert rep2.objective == pytest.approx(target, abs=1e-7 * (1.0 + abs(target)))
        # and back to a strong-dual point of the base instance
        point, trail = extract_strong_dual_point(pf.base, sol, r)
        assert point.is_feasible(rescale(pf.base, trail), 1e-8)
        Y = trail.inverse().map_dual(point.Y)
        assert StrongDualPoint(Y, r).is_feasible(pf.base, 1e-8)
        assert StrongDualPoint(Y, r).objective(pf.base) == pytest.approx(target, abs=1e-8)

    def test_extract_rejects_inconsistent_slack(self):
        # U_1 with weight on the face block is incompatible with slack I_1 (+) 0
        inst = facial_reduction(example_1_1()).reduced
        n = 2
        Z = np.zeros((n, n))
        U = (Z, np.eye(n), Z, Z)
        wits = (TangentWitness(Z, 0.0),) * 3
        with pytest.raises(ValueError):
            extract_strong_dual_point(inst, RamanaSolution(U, (Z,) * 4, wits), 1)


class TestRescaleSolution:
    def test_identity(self):
        sol = from_levels(example_4_1_ramana_levels())
        out = rescale_ramana_solution(sol, np.eye(4))
        for a, b in zip(out.U + out.V, sol.U + sol.V):
            assert np.array_equal(a, b)

    def test_diagonal(self):
        inst = example_1_1()
        T = np.diag([1.0, 2.0])
        out = rescale_ramana_solution(from_levels(example_1_1_ramana_levels()), T)
        assert np.allclose(out.V[3], [[0.0, 0.5], [0.5, 0.0]])
        assert verify_ramana(rescale(inst, T), out, 1e-9)

    def test_random_transforms(self):
        rng = np.random.default_rng(5)
        inst = example_4_1()
        sol = from_levels(example_4_1_ramana_levels())
        for _ in range(200):
            T = random_invertible(rng, 4, 1e3)
            rep = verify_ramana(rescale(inst, T), rescale_ramana_solution(sol, T), 1e-7)
            assert rep, rep.messages
            assert rep.objective == pytest.approx(0.0, abs=1e-7)


class TestClassicalValue:
    def test_example_1_1_not_attained(self):
        cd = classical_dual_value(example_1_1())
        assert cd.value == pytest.approx(0.0, abs=1e-5)
        assert cd.attained is False
        assert cd.evidence["max_iterate_norm"] >= 1e4

    def test_example_4_1(self):
        cd = classical_dual_value(example_4_1())
        assert cd.value == pytest.approx(1.0, abs=1e-5)
        assert cd.attained is True

    def test_unique_point(self):
        # A* is onto the symmetric 1x1 matrices: Y = c
        from ramanadual.model import SdpInstance
        inst = SdpInstance((np.eye(1),), np.array([[3.0]]), [2.0])
        cd = classical_dual_value(inst)
        assert cd.value == pytest.approx(6.0)
        assert cd.attained is True

    def test_infeasible(self):
        from ramanadual.model import SdpInstance
        inst = SdpInstance((np.zeros((2, 2)),), np.eye(2), [1.0])
        assert classical_dual_value(inst).value == float("inf")


def test_face_consistent_instance():
    inst = example_4_1()
    fr = facial_reduction(inst)
    red, berr = face_consistent_instance(fr)
    assert berr <= 1e-8
    r = fr.certificate.face_rank
    Z = red.B - apply_operator(red, fr.slack.x)
    assert np.array_equal(Z[r:, :], np.zeros((inst.n - r, inst.n)))


class TestGapAnalysis:
    def test_example_1_1(self):
        rep = gap_analysis(example_1_1())
        assert rep.primal_value == pytest.approx(0.0, abs=1e-6)
        assert rep.classical_dual_value == pytest.approx(0.0, abs=1e-5)
        assert rep.ramana_value == pytest.approx(0.0, abs=1e-9)
        assert rep.ramana_verified
        assert rep.classical_dual_attained is False
        assert (rep.face_rank, rep.singularity_steps) == (1, 1)
        assert rep.sandwich_ok

    def test_example_4_1(self):
        rep = gap_analysis(example_4_1())
        assert rep.gap == pytest.approx(1.0, abs=1e-3)
        assert rep.classical_dual_value == pytest.approx(1.0, abs=1e-5)
        assert rep.ramana_value == pytest.approx(0.0, abs=1e-6)
        assert rep.primal_attained is True
        assert rep.ramana_verified and rep.sandwich_ok
        assert verify_ramana(example_4_1(), rep.ramana_solution, 1e-6)

    def test_slater(self):
        rep = gap_analysis(slater_instance(), solve_ramana=False)
        assert rep.primal_value == pytest.approx(0.0, abs=1e-7)
        assert rep.classical_dual_value == pytest.approx(0.0, abs=1e-7)
        assert rep.gap == pytest.approx(0.0, abs=1e-6)
        assert rep.face_rank == 3 and rep.singularity_steps == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_sandwich_on_planted(self, seed):
        rng = np.random.default_rng(2000 + seed)
        n = int(rng.integers(2, 5))
        pf = planted_face(rng, n, int(rng.integers(1, n + 1)), m=2)
        rep = gap_analysis(pf.instance, solve_ramana=False)
        assert rep.sandwich_ok
        if rep.ramana_verified:
            assert rep.primal_value == pytest.approx(rep.ramana_value, abs=1e-5)
