"""Affine matrix-inequality construction over a shared decision-variable registry.

Every stability condition in this package is an affine map
``F(y) = F_const + sum_k y_k F_k`` from a flat scalar vector ``y`` into
symmetric matrices, required to be negative definite.  ``VarRegistry``
assigns the named matrix variables (Lyapunov matrix, functional slack
blocks) their scalar coordinates; builders below produce the maps for the
continuous, discrete and impulsive Lyapunov operators and for the
looped-functional dwell-time blocks, in both nominal and per-vertex robust
form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import DimensionError, UsageError
from .linalg import as_square_matrix, expm, symmetrize

__all__ = [
    "VarBlock",
    "VarRegistry",
    "AffineMatrixMap",
    "LoopVarNames",
    "FeasibilityProblem",
    "op_C",
    "op_D",
    "op_I_schur",
    "build_nominal_blocks",
    "build_robust_blocks",
    "assemble_problem",
    "nominal_registry",
    "robust_registry",
]


def he(X: np.ndarray) -> np.ndarray:
    """Symmetrizing sum ``X + X^T``."""
    return X + X.T


@dataclass(frozen=True)
class VarBlock:
    """One named decision-variable block inside a registry."""

    name: str
    kind: str           # "sym" | "diag" | "full"
    rows: int
    cols: int
    positive: bool      # must satisfy block >= eps_pd * I
    offset: int

    @property
    def size(self) -> int:
        if self.kind == "sym":
            return self.rows * (self.rows + 1) // 2
        if self.kind == "diag":
            return self.rows
        return self.rows * self.cols


class VarRegistry:
    """Ordered decision-variable blocks mapped onto one flat scalar vector."""

    def __init__(self):
        self._blocks: list[VarBlock] = []
        self._by_name: dict[str, VarBlock] = {}

    def _add(self, name: str, kind: str, rows: int, cols: int, positive: bool):
        if name in self._by_name:
            raise UsageError(f"variable {name!r} already registered")
        if positive and kind == "full":
            raise UsageError("positivity flag requires a symmetric block")
        blk = VarBlock(name, kind, rows, cols, positive, offset=self.size)
        self._blocks.append(blk)
        self._by_name[name] = blk
        return blk

    def add_symmetric(self, name: str, n: int, positive: bool = False) -> VarBlock:
        return self._add(name, "sym", n, n, positive)

    def add_diagonal(self, name: str, n: int, positive: bool = False) -> VarBlock:
        return self._add(name, "diag", n, n, positive)

    def add_full(self, name: str, rows: int, cols: int) -> VarBlock:
        return self._add(name, "full", rows, cols, positive=False)

    @property
    def size(self) -> int:
        return sum(b.size for b in self._blocks)

    @property
    def blocks(self) -> tuple[VarBlock, ...]:
        return tuple(self._blocks)

    def block(self, name: str) -> VarBlock:
        try:
            return self._by_name[name]
        except KeyError:
            raise UsageError(f"variable {name!r} not registered") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def unpack(self, y) -> dict[str, np.ndarray]:
        """Scatter a flat scalar vector into named matrices."""
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.size:
            raise DimensionError(f"expected {self.size} scalars, got {y.size}")
        out = {}
        for b in self._blocks:
            seg = y[b.offset:b.offset + b.size]
            if b.kind == "sym":
                M = np.zeros((b.rows, b.rows))
                iu = np.triu_indices(b.rows)
                M[iu] = seg
                M.T[iu] = seg
            elif b.kind == "diag":
                M = np.diag(seg)
            else:
                M = seg.reshape(b.rows, b.cols)
            out[b.name] = M
        return out

    def pack(self, values: dict[str, np.ndarray]) -> np.ndarray:
        """Gather named matrices into the flat scalar vector (inverse of unpack)."""
        y = np.zeros(self.size)
        for b in self._blocks:
            if b.name not in values:
                raise UsageError(f"missing value for variable {b.name!r}")
            M = np.asarray(values[b.name], dtype=float)
            if M.shape != (b.rows, b.cols):
                raise DimensionError(
                    f"value for {b.name!r} has shape {M.shape}, expected "
                    f"({b.rows}, {b.cols})")
            if b.kind == "sym":
                y[b.offset:b.offset + b.size] = M[np.triu_indices(b.rows)]
            elif b.kind == "diag":
                y[b.offset:b.offset + b.size] = np.diag(M)
            else:
                y[b.offset:b.offset + b.size] = M.ravel()
        return y

    def zeros(self) -> dict[str, np.ndarray]:
        return self.unpack(np.zeros(self.size))


@dataclass
class AffineMatrixMap:
    """Symmetric-matrix-valued affine function of the registry scalars.

    ``F(y) = constant + sum_k y_k * coeff[k]`` with coefficients stored
    sparsely: offsets absent from ``coeffs`` have an all-zero coefficient.
    """

    registry: VarRegistry
    dim: int
    constant: np.ndarray
    coeffs: dict[int, np.ndarray]

    _SYM_TOL = 1e-9

    @classmethod
    def from_function(cls, reg: VarRegistry, fn) -> "AffineMatrixMap":
        """Build by probing an affine matrix expression at unit scalar vectors.

        ``fn`` maps a dict of named matrices to a symmetric matrix and must
        be affine in the scalar coordinates.
        """
        const = cls._check_sym(fn(reg.zeros()))
        coeffs = {}
        e = np.zeros(reg.size)
        for k in range(reg.size):
            e[k] = 1.0
            C = cls._check_sym(fn(reg.unpack(e))) - const
            e[k] = 0.0
            if np.any(C != 0.0):
                coeffs[k] = C
        return cls(registry=reg, dim=const.shape[0], constant=const, coeffs=coeffs)

    @classmethod
    def _check_sym(cls, M) -> np.ndarray:
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionError(f"map value must be square, got {M.shape}")
        scale = max(1.0, float(np.abs(M).max()))
        if np.abs(M - M.T).max() > cls._SYM_TOL * scale:
            raise DimensionError("map value is not symmetric")
        return symmetrize(M)

    def coeff(self, k: int) -> np.ndarray:
        C = self.coeffs.get(k)
        return np.zeros((self.dim, self.dim)) if C is None else C

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.registry.size:
            raise DimensionError(
                f"expected {self.registry.size} scalars, got {y.size}")
        out = self.constant.copy()
        for k, C in self.coeffs.items():
            yk = y[k]
            if yk != 0.0:
                out += yk * C
        return out

    def evaluate_named(self, values: dict[str, np.ndarray]) -> np.ndarray:
        return self(self.registry.pack(values))

    def negated(self) -> "AffineMatrixMap":
        return AffineMatrixMap(self.registry, self.dim, -self.constant,
                               {k: -C for k, C in self.coeffs.items()})

    def scaled(self, s: float) -> "AffineMatrixMap":
        return AffineMatrixMap(self.registry, self.dim, s * self.constant,
                               {k: s * C for k, C in self.coeffs.items()})

    def congruence(self, W: np.ndarray) -> "AffineMatrixMap":
        """Replace F by ``W^T F W`` (sign-equivalent for nonsingular W)."""
        W = np.asarray(W, dtype=float)
        return AffineMatrixMap(
            self.registry, W.shape[1], symmetrize(W.T @ self.constant @ W),
            {k: symmetrize(W.T @ C @ W) for k, C in self.coeffs.items()})

    def shifted(self, offset: np.ndarray) -> "AffineMatrixMap":
        return AffineMatrixMap(self.registry, self.dim,
                               self.constant + np.asarray(offset, dtype=float),
                               dict(self.coeffs))

    @staticmethod
    def blockdiag(maps: "list[AffineMatrixMap]") -> "AffineMatrixMap":
        """Concatenate maps into one block-diagonal map over the same registry."""
        if not maps:
            raise UsageError("cannot concatenate an empty list of maps")
        reg = maps[0].registry
        if any(m.registry is not reg for m in maps):
            raise UsageError("maps mix different registries")
        dims = [m.dim for m in maps]
        total = sum(dims)
        starts = np.cumsum([0] + dims[:-1])
        const = np.zeros((total, total))
        for m, s in zip(maps, starts):
            const[s:s + m.dim, s:s + m.dim] = m.constant
        coeffs: dict[int, np.ndarray] = {}
        for m, s in zip(maps, starts):
            for k, C in m.coeffs.items():
                big = coeffs.get(k)
                if big is None:
                    big = np.zeros((total, total))
                    coeffs[k] = big
                big[s:s + m.dim, s:s + m.dim] += C
        return AffineMatrixMap(reg, total, const, coeffs)


@dataclass(frozen=True)
class LoopVarNames:
    """Registry names of one looped-functional variable set."""

    P: str = "P"
    Z: str = "Z"
    Q: str = "Q"
    U: str = "U"
    R: str = "R"
    N: str = "N"

    @classmethod
    def suffixed(cls, tag: str, P: str = "P") -> "LoopVarNames":
        return cls(P=P, Z=f"Z{tag}", Q=f"Q{tag}", U=f"U{tag}",
                   R=f"R{tag}", N=f"N{tag}")


def nominal_registry(n: int, names: LoopVarNames = LoopVarNames()) -> VarRegistry:
    """Registry with one Lyapunov matrix and one functional variable set."""
    reg = VarRegistry()
    reg.add_symmetric(names.P, n, positive=True)
    add_loop_vars(reg, n, names)
    return reg


def add_loop_vars(reg: VarRegistry, n: int, names: LoopVarNames) -> None:
    """Register the functional slack set (Z positive, Q/U symmetric, R/N full)."""
    reg.add_symmetric(names.Z, n, positive=True)
    reg.add_symmetric(names.Q, n)
    reg.add_symmetric(names.U, n)
    reg.add_full(names.R, n, n)
    reg.add_full(names.N, n, 2 * n)


def robust_registry(n: int, tags: list[str], P: str = "P") -> VarRegistry:
    """Shared Lyapunov matrix plus one functional variable set per tag."""
    reg = VarRegistry()
    reg.add_symmetric(P, n, positive=True)
    for tag in tags:
        add_loop_vars(reg, n, LoopVarNames.suffixed(tag, P=P))
    return reg


def _selectors(n: int, J: np.ndarray):
    """Row selectors on the stacked vector (current state, pre-jump state)."""
    sel_x = np.hstack([np.eye(n), np.zeros((n, n))])
    sel_jump_gap = np.hstack([np.eye(n), -J])
    sel_pre = np.hstack([np.zeros((n, n)), np.eye(n)])
    return sel_x, sel_jump_gap, sel_pre


def _check_loop_shapes(reg: VarRegistry, names: LoopVarNames, n: int) -> None:
    expected = {names.P: (n, n), names.Z: (n, n), names.Q: (n, n),
                names.U: (n, n), names.R: (n, n), names.N: (n, 2 * n)}
    for nm, shape in expected.items():
        b = reg.block(nm)
        if (b.rows, b.cols) != shape:
            raise UsageError(
                f"variable {nm!r} has shape ({b.rows}, {b.cols}), "
                f"expected {shape}")


def op_C(A, reg: VarRegistry, P: str = "P") -> AffineMatrixMap:
    """Continuous Lyapunov operator ``A^T P + P A`` as a map over P."""
    A = as_square_matrix(A, "A")
    reg.block(P)
    return AffineMatrixMap.from_function(reg, lambda m: A.T @ m[P] + m[P] @ A)


def op_D(J, reg: VarRegistry, P: str = "P") -> AffineMatrixMap:
    """Discrete Lyapunov operator ``J^T P J - P`` as a map over P."""
    J = as_square_matrix(J, "J")
    reg.block(P)
    return AffineMatrixMap.from_function(reg, lambda m: J.T @ m[P] @ J - m[P])


def op_I_schur(A, J, T: float, reg: VarRegistry, P: str = "P") -> AffineMatrixMap:
    """Schur-complement form of the impulsive operator.

    The 2n x 2n block ``[[-P, J^T e^(A^T T) P], [*, -P]]`` is negative
    definite exactly when ``J^T e^(A^T T) P e^(A T) J - P < 0`` and P > 0,
    while staying affine in P (no exponential applied to variables).
    """
    A = as_square_matrix(A, "A")
    J = as_square_matrix(J, "J")
    if not (np.isfinite(T) and T > 0):
        raise UsageError(f"T must be positive and finite, got {T}")
    E = expm(A, T)
    reg.block(P)

    def fn(m, _P=P):
        Pm = m[_P]
        return np.block([[-Pm, J.T @ E.T @ Pm], [Pm @ E @ J, -Pm]])

    return AffineMatrixMap.from_function(reg, fn)


def build_nominal_blocks(A, J, T: float, reg: VarRegistry,
                         names: LoopVarNames = LoopVarNames(),
                         balance: bool = True):
    """Dwell-time inequality blocks for a known system at dwell T.

    Returns the pair of matrix inequalities whose joint negativity makes
    the quadratic form ``x^T P x`` decrease across impulses spaced T apart:
    the interval-start vertex block (2n x 2n, with the quadratic flow term
    ``A^T Z A`` kept in place) and the interval-end vertex block
    (3n x 3n, with the inverse-slack term expressed through a Schur row).

    With ``balance=True`` the Schur-augmented block is returned under the
    diagonal congruence ``diag(I, sqrt(T) I)``, which bounds its ``Z/T``
    corner as T -> 0; feasibility is unchanged.
    """
    A = as_square_matrix(A, "A")
    J = as_square_matrix(J, "J")
    if not (np.isfinite(T) and T > 0):
        raise UsageError(f"T must be positive and finite, got {T}")
    n = A.shape[0]
    _check_loop_shapes(reg, names, n)
    sel_x, sel_gap, sel_pre = _selectors(n, J)

    def static_part(m):
        P, Q, R, N = m[names.P], m[names.Q], m[names.R], m[names.N]
        return (T * sel_x.T @ (A.T @ P + P @ A) @ sel_x
                - sel_gap.T @ Q @ sel_gap
                + sel_pre.T @ (J.T @ P @ J - P) @ sel_pre
                + he(N.T @ sel_gap - sel_gap.T @ R @ sel_x))

    def flow_part(m):
        Q, R, Z = m[names.Q], m[names.R], m[names.Z]
        return (he(sel_x.T @ A.T @ Q @ sel_gap
                   + sel_x.T @ A.T @ R @ sel_x
                   + sel_gap.T @ R @ A @ sel_x)
                + sel_x.T @ A.T @ Z @ A @ sel_x)

    def jump_part(m):
        return sel_pre.T @ J.T @ m[names.U] @ J @ sel_pre

    def start_vertex(m):
        return static_part(m) + T * (flow_part(m) + jump_part(m))

    def end_vertex(m):
        N, Z = m[names.N], m[names.Z]
        return np.block([[static_part(m) - T * jump_part(m), N.T],
                         [N, -Z / T]])

    psi = AffineMatrixMap.from_function(reg, start_vertex)
    phi = AffineMatrixMap.from_function(reg, end_vertex)
    if balance:
        W = np.diag([1.0] * (2 * n) + [np.sqrt(T)] * n)
        phi = phi.congruence(W)
    return psi, phi


def build_robust_blocks(A_i, J_j, T: float, reg: VarRegistry, j: int | None = None,
                        tag: str | None = None, P: str = "P",
                        balance: bool = True):
    """Per-vertex dwell-time blocks, affine in the flow vertex ``A_i``.

    The quadratic flow term is moved to an extra Schur row, so the
    inequality stays affine in ``A_i`` and one shared Lyapunov matrix can
    certify the whole flow polytope; the functional variable set is the
    per-jump-vertex copy selected by ``j`` (or an explicit registry
    ``tag``).  Both returned blocks are (2n + n) x (2n + n).
    """
    A_i = as_square_matrix(A_i, "A_i")
    J_j = as_square_matrix(J_j, "J_j")
    if not (np.isfinite(T) and T > 0):
        raise UsageError(f"T must be positive and finite, got {T}")
    if tag is None:
        if j is None:
            raise UsageError("give a vertex index j or an explicit tag")
        tag = str(j)
    names = LoopVarNames.suffixed(tag, P=P)
    n = A_i.shape[0]
    _check_loop_shapes(reg, names, n)
    sel_x, sel_gap, sel_pre = _selectors(n, J_j)

    def static_part(m):
        Pm, Q, R, N = m[names.P], m[names.Q], m[names.R], m[names.N]
        return (T * he(sel_x.T @ A_i.T @ Pm @ sel_x)
                - sel_gap.T @ Q @ sel_gap
                + sel_pre.T @ (J_j.T @ Pm @ J_j - Pm) @ sel_pre
                + he(N.T @ sel_gap - sel_gap.T @ R @ sel_x))

    def flow_part(m):
        Q, R = m[names.Q], m[names.R]
        return he(sel_x.T @ A_i.T @ Q @ sel_gap
                  + sel_x.T @ A_i.T @ R @ sel_x
                  + sel_gap.T @ R @ A_i @ sel_x)

    def jump_part(m):
        return sel_pre.T @ J_j.T @ m[names.U] @ J_j @ sel_pre

    def start_vertex(m):
        Z = m[names.Z]
        core = static_part(m) + T * (flow_part(m) + jump_part(m))
        return np.block([[core, sel_x.T @ A_i.T @ Z],
                         [Z @ A_i @ sel_x, -Z / T]])

    def end_vertex(m):
        N, Z = m[names.N], m[names.Z]
        return np.block([[static_part(m) - T * jump_part(m), N.T],
                         [N, -Z / T]])

    psi = AffineMatrixMap.from_function(reg, start_vertex)
    phi = AffineMatrixMap.from_function(reg, end_vertex)
    if balance:
        W = np.diag([1.0] * (2 * n) + [np.sqrt(T)] * n)
        psi = psi.congruence(W)
        phi = phi.congruence(W)
    return psi, phi


@dataclass
class FeasibilityProblem:
    """A family of affine maps that must all be strictly negative definite."""

    registry: VarRegistry
    blocks: list[AffineMatrixMap]
    eps_strict: float
    eps_pd: float
    labels: list[str] = field(default_factory=list)

    def blockdiag(self) -> AffineMatrixMap:
        return AffineMatrixMap.blockdiag(self.blocks)

    @property
    def scalar_count(self) -> int:
        return self.registry.size


def assemble_problem(constraints: list[AffineMatrixMap], reg: VarRegistry,
                     config: NumericConfig = DEFAULT_CONFIG,
                     labels: list[str] | None = None) -> FeasibilityProblem:
    """Bundle constraint maps with the registry's positivity requirements.

    Each positivity-flagged variable block X contributes the extra map
    ``-X + eps_pd * I``, so the assembled problem reads: every block
    strictly negative definite (realized by the solver as <= -eps * I).
    """
    if not constraints:
        raise UsageError("constraint list is empty")
    if any(c.registry is not reg for c in constraints):
        raise UsageError("constraints mix different registries")
    blocks = list(constraints)
    if labels is None:
        labels = [f"constraint[{i}]" for i in range(len(constraints))]
    else:
        labels = list(labels)
        if len(labels) != len(constraints):
            raise UsageError("labels length must match constraints")
    for b in reg.blocks:
        if not b.positive:
            continue
        name = b.name
        eye = np.eye(b.rows)

        def positivity(m, _name=name, _eye=eye):
            return -m[_name] + config.eps_pd * _eye

        blocks.append(AffineMatrixMap.from_function(reg, positivity))
        labels.append(f"positivity[{name}]")
    return FeasibilityProblem(registry=reg, blocks=blocks,
                              eps_strict=config.eps_strict,
                              eps_pd=config.eps_pd, labels=labels)
