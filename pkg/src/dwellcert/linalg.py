"""Dense real matrix kernels used by every other module.

Matrices are plain float ``numpy.ndarray`` values; helpers here add the
validation, determinism and tolerance conventions the rest of the package
relies on.  The heavy lifting (QR eigenvalue iteration, symmetric
eigendecomposition, scaling-and-squaring matrix exponential) is delegated
to LAPACK via numpy/scipy, which is deterministic for fixed input.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .config import DEFAULT_CONFIG
from .errors import DimensionError, NumericalError

__all__ = [
    "as_square_matrix",
    "as_symmetric_matrix",
    "expm",
    "spectral_radius",
    "max_real_part",
    "is_hurwitz",
    "is_anti_hurwitz",
    "is_schur",
    "is_anti_schur",
    "sym_eig",
    "min_eig",
    "max_eig",
    "symmetrize",
]


def as_square_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite square 2-D float array."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionError(f"{name} contains non-finite entries")
    return A


def as_symmetric_matrix(S, name: str = "matrix", rtol: float = 1e-10) -> np.ndarray:
    """Validate symmetry (up to rtol * norm) and return the symmetrized array."""
    A = as_square_matrix(S, name)
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > rtol * scale:
        raise DimensionError(f"{name} is not symmetric")
    return symmetrize(A)


def symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def expm(M, t: float = 1.0) -> np.ndarray:
    """Matrix exponential ``e^(M t)``.

    Uses the scaling-and-squaring method with a degree-13 Pade approximant
    (scipy's implementation of Al-Mohy & Higham), which keeps the relative
    error near machine precision for well-conditioned inputs.
    """
    A = as_square_matrix(M)
    if not np.isfinite(t):
        raise DimensionError("time argument must be finite")
    return scipy.linalg.expm(A * float(t))


def _eigvals(M, name: str = "matrix") -> np.ndarray:
    A = as_square_matrix(M, name)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigenvalue iteration failed for {name}: {exc}") from exc


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    return float(np.max(np.abs(_eigvals(M))))


def max_real_part(M) -> float:
    """Largest real part over the spectrum of a square matrix."""
    return float(np.max(_eigvals(M).real))


def is_hurwitz(M, delta: float | None = None) -> bool:
    """All eigenvalues strictly in the open left half-plane (margin delta)."""
    d = DEFAULT_CONFIG.delta_eig if delta is None else delta
    return max_real_part(M) < -d


def is_anti_hurwitz(M, delta: float | None = None) -> bool:
    """All eigenvalues strictly in the open right half-plane (margin delta)."""
    d = DEFAULT_CONFIG.delta_eig if delta is None else delta
    return float(np.min(_eigvals(M).real)) > d


def is_schur(M, delta: float | None = None) -> bool:
    """All eigenvalues strictly inside the unit disk (margin delta)."""
    d = DEFAULT_CONFIG.delta_eig if delta is None else delta
    return spectral_radius(M) < 1.0 - d


def is_anti_schur(M, delta: float | None = None) -> bool:
    """All eigenvalues strictly outside the closed unit disk (margin delta)."""
    d = DEFAULT_CONFIG.delta_eig if delta is None else delta
    return float(np.min(np.abs(_eigvals(M)))) > 1.0 + d


def sym_eig(S, with_vectors: bool = False):
    """Eigenvalues of a symmetric matrix, ascending; optionally vectors.

    The reconstruction residual ``||V diag(w) V^T - S||`` stays below
    ``1e-10 * ||S||`` for valid symmetric input.
    """
    A = as_symmetric_matrix(S)
    try:
        if with_vectors:
            w, V = np.linalg.eigh(A)
            return w, V
        return np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"symmetric eigendecomposition failed: {exc}") from exc


def min_eig(S) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(sym_eig(S)[0])


def max_eig(S) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    return float(sym_eig(S)[-1])
