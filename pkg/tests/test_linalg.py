import numpy as np
import pytest

from dwellcert.errors import DimensionError
from dwellcert.linalg import (
    expm,
    is_anti_hurwitz,
    is_anti_schur,
    is_hurwitz,
    is_schur,
    max_eig,
    max_real_part,
    min_eig,
    spectral_radius,
    sym_eig,
)


def taylor_expm(M, terms=60):
    """Truncated power-series oracle, independent of the production path."""
    M = np.asarray(M, dtype=float)
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


class TestExpm:
    def test_zero_time_is_identity(self):
        M = np.array([[3.0, -1.0], [2.0, 5.0]])
        assert np.allclose(expm(M, 0.0), np.eye(2), atol=1e-14)

    def test_diagonal_case(self):
        E = expm(np.diag([-1.0, -2.0]), 1.0)
        assert np.allclose(E, np.diag([np.exp(-1.0), np.exp(-2.0)]), atol=1e-13)

    def test_against_taylor_oracle(self):
        M = np.array([[1.0, 3.0], [-1.0, 2.0]])
        t = 0.4620
        expected = taylor_expm(M * t)
        assert np.max(np.abs(expm(M, t) - expected)) <= 1e-10

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            expm(np.ones((2, 3)), 1.0)

    def test_semigroup_property(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n = rng.integers(2, 7)
            M = rng.normal(size=(n, n))
            norm = np.linalg.norm(M, 2)
            if norm > 5.0:
                M *= 5.0 / norm
            s, t = rng.uniform(-1.0, 1.0, size=2)
            lhs = expm(M, s + t)
            rhs = expm(M, s) @ expm(M, t)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9


class TestSpectra:
    def test_scaled_identity(self):
        assert spectral_radius(0.5 * np.eye(2)) == pytest.approx(0.5)

    def test_complex_pair_modulus(self):
        # eigenvalues 1.5 +- 1.6583j, modulus sqrt(det) = sqrt(5)
        A = np.array([[1.0, 3.0], [-1.0, 2.0]])
        assert spectral_radius(A) == pytest.approx(np.sqrt(5.0), abs=1e-9)
        assert max_real_part(A) == pytest.approx(1.5, abs=1e-9)

    def test_rotation_radius_one(self):
        assert spectral_radius([[0.0, 1.0], [-1.0, 0.0]]) == pytest.approx(1.0)

    def test_predicates(self):
        assert is_hurwitz(np.diag([-1.0, -2.0]))
        assert is_anti_hurwitz([[1.0, 3.0], [-1.0, 2.0]])
        assert not is_schur([[2.0, 1.0], [1.0, 3.0]])
        assert is_anti_schur([[2.0, 1.0], [1.0, 3.0]])
        assert is_schur(0.5 * np.eye(3))
        assert not is_anti_hurwitz(np.diag([1.0, -1.0]))

    def test_radius_commutes_with_factor_order(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            n = rng.integers(2, 5)
            A = rng.normal(size=(n, n))
            J = rng.normal(size=(n, n))
            T = rng.uniform(0.05, 1.5)
            E = expm(A, T)
            assert spectral_radius(E @ J) == pytest.approx(
                spectral_radius(J @ E), abs=1e-9)


class TestSymEig:
    def test_identity(self):
        assert np.allclose(sym_eig(np.eye(2)), [1.0, 1.0])

    def test_diagonal_sorted_ascending(self):
        assert np.allclose(sym_eig(np.diag([3.0, -2.0])), [-2.0, 3.0])

    def test_off_diagonal_closed_form(self):
        assert np.allclose(sym_eig([[0.0, 1.0], [1.0, 0.0]]), [-1.0, 1.0])

    def test_min_max_eig(self):
        assert min_eig(np.eye(3)) == pytest.approx(1.0)
        assert min_eig(np.zeros((2, 2))) == pytest.approx(0.0)
        assert min_eig(np.diag([5.0, -7.0])) == pytest.approx(-7.0)
        assert max_eig(np.diag([5.0, -7.0])) == pytest.approx(5.0)

    def test_rejects_asymmetric(self):
        with pytest.raises(DimensionError):
            sym_eig([[0.0, 1.0], [0.0, 0.0]])

    def test_shift_property(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = rng.integers(2, 6)
            M = rng.normal(size=(n, n))
            S = 0.5 * (M + M.T)
            c = rng.uniform(-3.0, 3.0)
            shifted = sym_eig(S + c * np.eye(n))
            assert np.max(np.abs(shifted - (sym_eig(S) + c))) <= 1e-10

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(5)
        M = rng.normal(size=(5, 5))
        S = 0.5 * (M + M.T)
        w, V = sym_eig(S, with_vectors=True)
        resid = np.linalg.norm(V @ np.diag(w) @ V.T - S)
        assert resid <= 1e-10 * max(1.0, np.linalg.norm(S))
