import numpy as np
import pytest

from dwellcert.errors import DimensionError, UsageError
from dwellcert.linalg import expm, max_eig
from dwellcert.lmi import (
    AffineMatrixMap,
    VarRegistry,
    assemble_problem,
    build_nominal_blocks,
    build_robust_blocks,
    nominal_registry,
    op_C,
    op_D,
    op_I_schur,
    robust_registry,
)
from dwellcert.sdp import SolveStatus, solve

A_EX1 = np.array([[1.0, 3.0], [-1.0, 2.0]])
J_EX1 = 0.5 * np.eye(2)


def p_only_registry(n=2):
    reg = VarRegistry()
    reg.add_symmetric("P", n, positive=True)
    return reg


class TestRegistry:
    def test_offsets_and_sizes(self):
        reg = nominal_registry(2)
        # P,Z,Q,U: 3 scalars each; R: 4; N: 8
        assert reg.size == 4 * 3 + 4 + 8
        offs = [b.offset for b in reg.blocks]
        sizes = [b.size for b in reg.blocks]
        assert offs == [0, 3, 6, 9, 12, 16]
        assert sizes == [3, 3, 3, 3, 4, 8]

    def test_pack_unpack_roundtrip(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            reg = VarRegistry()
            n = int(rng.integers(1, 5))
            reg.add_symmetric("S", n, positive=bool(rng.integers(2)))
            reg.add_diagonal("D", int(rng.integers(1, 4)))
            reg.add_full("G", int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            y = rng.normal(size=reg.size)
            mats = reg.unpack(y)
            assert np.allclose(reg.pack(mats), y)
            assert np.allclose(mats["S"], mats["S"].T)

    def test_duplicate_name_rejected(self):
        reg = VarRegistry()
        reg.add_symmetric("P", 2)
        with pytest.raises(UsageError):
            reg.add_full("P", 2, 2)


class TestOperators:
    def test_flow_operator_zero_matrix(self):
        reg = p_only_registry()
        m = op_C(np.zeros((2, 2)), reg)
        assert np.allclose(m(np.ones(reg.size)), 0)
        assert m.coeffs == {}

    def test_flow_operator_identity(self):
        reg = p_only_registry()
        m = op_C(np.eye(2), reg)
        val = m.evaluate_named({"P": np.eye(2)})
        assert np.allclose(val, 2 * np.eye(2))

    def test_flow_operator_hand_value(self):
        reg = p_only_registry()
        A = np.array([[-1.0, 0.0], [1.0, -2.0]])
        val = op_C(A, reg).evaluate_named({"P": np.eye(2)})
        assert np.allclose(val, [[-2.0, 1.0], [1.0, -4.0]])

    def test_jump_operator_identity_is_zero(self):
        reg = p_only_registry()
        m = op_D(np.eye(2), reg)
        assert np.allclose(m(np.ones(reg.size)), 0)

    def test_jump_operator_scalar_case(self):
        reg = p_only_registry()
        val = op_D(0.5 * np.eye(2), reg).evaluate_named({"P": np.eye(2)})
        assert np.allclose(val, -0.75 * np.eye(2))

    def test_jump_operator_hand_value(self):
        reg = p_only_registry()
        J = np.array([[2.0, 1.0], [1.0, 3.0]])
        val = op_D(J, reg).evaluate_named({"P": np.eye(2)})
        assert np.allclose(val, [[4.0, 5.0], [5.0, 9.0]])

    def test_impulsive_schur_marginal_at_identity(self):
        # zero flow, identity jumps: the block is singular negative
        # semidefinite, matching a one-cycle operator that is exactly zero
        reg = p_only_registry()
        m = op_I_schur(np.zeros((2, 2)), np.eye(2), 1.0, reg)
        block = m.evaluate_named({"P": np.eye(2)})
        assert np.allclose(block, np.block([[-np.eye(2), np.eye(2)],
                                            [np.eye(2), -np.eye(2)]]))
        assert max_eig(block) == pytest.approx(0.0, abs=1e-12)

    def test_impulsive_schur_sign_matches_reduced_operator(self):
        rng = np.random.default_rng(23)
        reg = p_only_registry()
        T = 0.40
        m = op_I_schur(A_EX1, J_EX1, T, reg)
        E = expm(A_EX1, T)
        for _ in range(20):
            L = rng.normal(size=(2, 2))
            P = L @ L.T + 0.1 * np.eye(2)
            block = m.evaluate_named({"P": P})
            reduced = (E @ J_EX1).T @ P @ (E @ J_EX1) - P
            assert (max_eig(block) < 0) == (max_eig(reduced) < 0)

    def test_impulsive_schur_rejects_nonpositive_T(self):
        with pytest.raises(UsageError):
            op_I_schur(A_EX1, J_EX1, 0.0, p_only_registry())

    def test_unregistered_variable(self):
        reg = VarRegistry()
        reg.add_symmetric("X", 2)
        with pytest.raises(UsageError):
            op_C(np.eye(2), reg, P="P")


class TestNominalBlocks:
    def test_only_p_reduction(self):
        # with all variables but P zeroed, the start-vertex block collapses
        # to the flow and jump operators in their row positions
        T = 0.37
        reg = nominal_registry(2)
        psi, _ = build_nominal_blocks(A_EX1, J_EX1, T, reg, balance=False)
        P = np.array([[2.0, 0.3], [0.3, 1.0]])
        vals = {b.name: np.zeros((b.rows, b.cols)) for b in reg.blocks}
        vals["P"] = P
        got = psi.evaluate_named(vals)
        n = 2
        Mx = np.hstack([np.eye(n), np.zeros((n, n))])
        Mm = np.hstack([np.zeros((n, n)), np.eye(n)])
        expected = (T * Mx.T @ (A_EX1.T @ P + P @ A_EX1) @ Mx
                    + Mm.T @ (J_EX1.T @ P @ J_EX1 - P) @ Mm)
        assert np.allclose(got, expected, atol=1e-12)

    def test_block_dimensions(self):
        reg = nominal_registry(2)
        psi, phi = build_nominal_blocks(A_EX1, J_EX1, 0.3, reg)
        assert psi.dim == 4 and phi.dim == 6

    def test_feasible_below_reported_bound(self):
        verdictT = {}
        for T in (0.44, 0.46):
            reg = nominal_registry(2)
            psi, phi = build_nominal_blocks(A_EX1, J_EX1, T, reg)
            rep = solve(assemble_problem([psi, phi], reg))
            verdictT[T] = rep.status
        assert verdictT[0.44] is SolveStatus.STRICTLY_FEASIBLE
        assert verdictT[0.46] is not SolveStatus.STRICTLY_FEASIBLE

    def test_coefficients_symmetric(self):
        reg = nominal_registry(3)
        A = np.arange(9, dtype=float).reshape(3, 3) / 10.0
        J = np.diag([0.5, 1.1, 0.2])
        for m in build_nominal_blocks(A, J, 0.7, reg):
            assert np.array_equal(m.constant, m.constant.T)
            for C in m.coeffs.values():
                assert np.array_equal(C, C.T)

    def test_evaluation_linearity_exact(self):
        reg = nominal_registry(2)
        psi, phi = build_nominal_blocks(A_EX1, J_EX1, 0.5, reg)
        rng = np.random.default_rng(2)
        y1 = rng.normal(size=reg.size)
        y2 = rng.normal(size=reg.size)
        for m in (psi, phi):
            for alpha in (0.0, 0.25, 1.0):
                lhs = m(alpha * y1 + (1 - alpha) * y2)
                rhs = alpha * m(y1) + (1 - alpha) * m(y2)
                assert np.allclose(lhs, rhs, atol=1e-10)

    def test_affinity_in_dwell(self):
        # for fixed variables the start-vertex block interpolates linearly in T
        Tmin, Tmax = 0.2, 0.9
        rng = np.random.default_rng(4)
        y = rng.normal(size=nominal_registry(2).size)
        vals = {}
        for T in (Tmin, Tmax, 0.55):
            reg = nominal_registry(2)
            psi, _ = build_nominal_blocks(A_EX1, J_EX1, T, reg, balance=False)
            vals[T] = psi(y)
        lam = (Tmax - 0.55) / (Tmax - Tmin)
        interp = lam * vals[Tmin] + (1 - lam) * vals[Tmax]
        assert np.max(np.abs(vals[0.55] - interp)) <= 1e-10

    def test_small_dwell_schur_dichotomy(self):
        # as T -> 0 feasibility reduces to the jump matrix being a contraction
        rng = np.random.default_rng(31)
        for _ in range(10):
            M = rng.normal(size=(2, 2))
            r = max(abs(np.linalg.eigvals(M)))
            A = rng.normal(size=(2, 2))
            for scale, expect in ((0.9 / r, True), (1.1 / r, False)):
                J = scale * M
                reg = nominal_registry(2)
                psi, phi = build_nominal_blocks(A, J, 1e-7, reg)
                rep = solve(assemble_problem([psi, phi], reg))
                assert (rep.status is SolveStatus.STRICTLY_FEASIBLE) == expect


class TestRobustBlocks:
    def test_dimensions(self):
        reg = robust_registry(2, ["0"])
        psi, phi = build_robust_blocks(A_EX1, J_EX1, 0.3, reg, j=0)
        assert psi.dim == 6 and phi.dim == 6

    def test_singleton_matches_nominal(self):
        rng = np.random.default_rng(41)
        agree = 0
        for _ in range(50):
            A = rng.normal(size=(2, 2))
            J = rng.normal(size=(2, 2)) * 0.8
            T = float(rng.uniform(0.05, 1.0))
            reg_n = nominal_registry(2)
            blocks_n = build_nominal_blocks(A, J, T, reg_n)
            rep_n = solve(assemble_problem(list(blocks_n), reg_n))
            reg_r = robust_registry(2, ["0"])
            blocks_r = build_robust_blocks(A, J, T, reg_r, j=0)
            rep_r = solve(assemble_problem(list(blocks_r), reg_r))
            agree += ((rep_n.status is SolveStatus.STRICTLY_FEASIBLE)
                      == (rep_r.status is SolveStatus.STRICTLY_FEASIBLE))
        assert agree == 50

    def test_unknown_tag_rejected(self):
        reg = robust_registry(2, ["0"])
        with pytest.raises(UsageError):
            build_robust_blocks(A_EX1, J_EX1, 0.3, reg, j=5)


class TestAssemble:
    def test_positivity_only_problem(self):
        reg = p_only_registry()
        m = op_C(-np.eye(2), reg)  # -2P < 0, trivially feasible with P > 0
        prob = assemble_problem([m], reg)
        assert len(prob.blocks) == 2  # constraint + positivity of P
        rep = solve(prob)
        assert rep.status is SolveStatus.STRICTLY_FEASIBLE

    def test_empty_constraints_rejected(self):
        with pytest.raises(UsageError):
            assemble_problem([], p_only_registry())

    def test_mixed_registries_rejected(self):
        reg1, reg2 = p_only_registry(), p_only_registry()
        m1 = op_C(np.eye(2), reg1)
        m2 = op_C(np.eye(2), reg2)
        with pytest.raises(UsageError):
            assemble_problem([m1, m2], reg1)

    def test_minimal_dwell_assembly_block_count(self):
        reg = nominal_registry(2)
        psi, phi = build_nominal_blocks(A_EX1, J_EX1, 0.5, reg)
        flow = op_C(A_EX1, reg)
        prob = assemble_problem([psi, phi, flow], reg)
        # three constraints plus positivity of P and Z
        assert len(prob.blocks) == 5
        assert sorted(l for l in prob.labels if l.startswith("positivity")) == [
            "positivity[P]", "positivity[Z]"]

    def test_blockdiag_concatenation(self):
        reg = p_only_registry()
        m1 = op_C(np.eye(2), reg)
        m2 = op_D(0.5 * np.eye(2), reg)
        big = AffineMatrixMap.blockdiag([m1, m2])
        y = np.array([1.0, 0.2, 2.0])
        val = big(y)
        assert val.shape == (4, 4)
        assert np.allclose(val[:2, :2], m1(y))
        assert np.allclose(val[2:, 2:], m2(y))
        assert np.allclose(val[:2, 2:], 0)


class TestAffineMapUtilities:
    def test_congruence_matches_direct(self):
        reg = nominal_registry(2)
        _, phi = build_nominal_blocks(A_EX1, J_EX1, 0.4, reg, balance=False)
        W = np.diag([1.0, 1.0, 1.0, 1.0, 2.0, 2.0])
        scaled = phi.congruence(W)
        rng = np.random.default_rng(6)
        y = rng.normal(size=reg.size)
        assert np.allclose(scaled(y), W.T @ phi(y) @ W, atol=1e-12)

    def test_negated_and_scaled(self):
        reg = p_only_registry()
        m = op_C(A_EX1, reg)
        y = np.array([1.0, -0.5, 2.0])
        assert np.allclose(m.negated()(y), -m(y))
        assert np.allclose(m.scaled(2.5)(y), 2.5 * m(y))

    def test_from_function_rejects_asymmetric(self):
        reg = p_only_registry()
        with pytest.raises(DimensionError):
            AffineMatrixMap.from_function(
                reg, lambda m: np.array([[0.0, 1.0], [0.0, 0.0]]) + m["P"])
