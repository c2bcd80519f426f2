"""Impulsive system descriptions, dwell-time queries and classification.

A linear impulsive system flows along ``xdot = A x`` between impulse
instants and jumps ``x+ = J x`` at them.  ``A`` and ``J`` may each be
uncertain, known only to lie in the convex hull of a list of vertex
matrices; the nominal case is the singleton-vertex special case.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_CONFIG, NumericConfig
from .errors import DimensionError, ParseError, UsageError
from .linalg import (
    as_square_matrix,
    is_anti_hurwitz,
    is_anti_schur,
    is_hurwitz,
    is_schur,
)

__all__ = [
    "ImpulsiveSystem",
    "DwellTimeSpec",
    "ConvexCombination",
    "Applicability",
    "load_system",
    "load_system_file",
    "instantiate",
    "classify",
    "sampled_data_embed",
]


@dataclass(frozen=True)
class ImpulsiveSystem:
    """Flow/jump vertex matrices of a (possibly uncertain) impulsive system."""

    n: int
    A_vertices: tuple[np.ndarray, ...]
    J_vertices: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        if self.n <= 0:
            raise DimensionError(f"state dimension must be positive, got {self.n}")
        for name, verts in (("A_vertices", self.A_vertices),
                            ("J_vertices", self.J_vertices)):
            if len(verts) == 0:
                raise DimensionError(f"{name} must be nonempty")
            for k, V in enumerate(verts):
                M = as_square_matrix(V, f"{name}[{k}]")
                if M.shape != (self.n, self.n):
                    raise DimensionError(
                        f"{name}[{k}] has shape {M.shape}, expected "
                        f"({self.n}, {self.n})")
        object.__setattr__(self, "A_vertices",
                           tuple(np.array(V, dtype=float) for V in self.A_vertices))
        object.__setattr__(self, "J_vertices",
                           tuple(np.array(V, dtype=float) for V in self.J_vertices))

    @property
    def is_nominal(self) -> bool:
        return len(self.A_vertices) == 1 and len(self.J_vertices) == 1

    @property
    def A(self) -> np.ndarray:
        """The flow matrix of a nominal system."""
        if len(self.A_vertices) != 1:
            raise UsageError("A is ambiguous for an uncertain system")
        return self.A_vertices[0]

    @property
    def J(self) -> np.ndarray:
        """The jump matrix of a nominal system."""
        if len(self.J_vertices) != 1:
            raise UsageError("J is ambiguous for an uncertain system")
        return self.J_vertices[0]

    @classmethod
    def nominal(cls, A, J, label: str = "") -> "ImpulsiveSystem":
        A = as_square_matrix(A, "A")
        return cls(n=A.shape[0], A_vertices=(A,),
                   J_vertices=(as_square_matrix(J, "J"),), label=label)


@dataclass(frozen=True)
class DwellTimeSpec:
    """Which dwell-time stability regime is being queried.

    ``kind`` is one of ``periodic`` (fixed period T), ``minimal`` (all
    dwells >= T), ``maximal`` (all dwells <= T), ``ranged`` (dwells in
    [Tmin, Tmax]) or ``arbitrary`` (any positive dwell).
    """

    kind: str
    T: float | None = None
    Tmin: float | None = None
    Tmax: float | None = None

    _KINDS = ("periodic", "minimal", "maximal", "ranged", "arbitrary")

    def __post_init__(self):
        eps = DEFAULT_CONFIG.eps_dwell
        if self.kind not in self._KINDS:
            raise UsageError(f"unknown dwell-time kind {self.kind!r}")
        if self.kind in ("periodic", "minimal", "maximal"):
            if self.T is None or not np.isfinite(self.T) or self.T <= eps:
                raise UsageError(f"{self.kind} spec needs finite T > {eps}")
        elif self.kind == "ranged":
            ok = (self.Tmin is not None and self.Tmax is not None
                  and np.isfinite(self.Tmin) and np.isfinite(self.Tmax)
                  and eps < self.Tmin <= self.Tmax)
            if not ok:
                raise UsageError(
                    f"ranged spec needs finite {eps} < Tmin <= Tmax, got "
                    f"({self.Tmin}, {self.Tmax})")

    @classmethod
    def periodic(cls, T: float) -> "DwellTimeSpec":
        return cls("periodic", T=T)

    @classmethod
    def minimal(cls, T: float) -> "DwellTimeSpec":
        return cls("minimal", T=T)

    @classmethod
    def maximal(cls, T: float) -> "DwellTimeSpec":
        return cls("maximal", T=T)

    @classmethod
    def ranged(cls, Tmin: float, Tmax: float) -> "DwellTimeSpec":
        return cls("ranged", Tmin=Tmin, Tmax=Tmax)

    @classmethod
    def arbitrary(cls) -> "DwellTimeSpec":
        return cls("arbitrary")


@dataclass(frozen=True)
class ConvexCombination:
    """Weights over the A- and J-polytope vertices (each a unit simplex point)."""

    A_weights: tuple[float, ...]
    J_weights: tuple[float, ...]

    def __post_init__(self):
        for name, w in (("A_weights", self.A_weights), ("J_weights", self.J_weights)):
            arr = np.asarray(w, dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise UsageError(f"{name} must be a nonempty weight vector")
            if np.any(arr < 0):
                raise UsageError(f"{name} has a negative weight")
            if abs(arr.sum() - 1.0) > 1e-12:
                raise UsageError(f"{name} must sum to 1, got {arr.sum()!r}")


@dataclass(frozen=True)
class Applicability:
    """Which dwell-time analyses the eigenstructure supports.

    Derived from the half-plane location of every A-vertex spectrum and the
    unit-disk location of every J-vertex spectrum.  For uncertain systems a
    predicate holds only if it holds at every vertex.  ``note`` is nonempty
    for combinations with no applicable result.
    """

    arbitrary: bool
    minimal: bool
    maximal: bool
    ranged: bool
    a_class: str
    j_class: str
    note: str = ""

    def flags(self) -> dict:
        return {"arbitrary": self.arbitrary, "minimal": self.minimal,
                "maximal": self.maximal, "ranged": self.ranged}


_SCHEMA_KEYS = {"n", "A_vertices", "J_vertices", "label"}


def load_system(document) -> ImpulsiveSystem:
    """Build a validated system from a JSON document (text or parsed dict).

    The schema is ``{"n": int, "A_vertices": [[[..]]], "J_vertices":
    [[[..]]], "label": str?}`` with row-major nested arrays.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    else:
        data = document
    if not isinstance(data, dict):
        raise ParseError("document root must be a JSON object")
    unknown = set(data) - _SCHEMA_KEYS
    if unknown:
        raise ParseError(f"unknown field(s): {sorted(unknown)}")
    for key in ("n", "A_vertices", "J_vertices"):
        if key not in data:
            raise ParseError(f"missing field: {key}")
    if not isinstance(data["n"], int) or isinstance(data["n"], bool):
        raise ParseError("field 'n' must be an integer")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ParseError("field 'label' must be a string")

    def read_vertices(key: str) -> tuple[np.ndarray, ...]:
        raw = data[key]
        if not isinstance(raw, list) or len(raw) == 0:
            raise ParseError(f"field '{key}' must be a nonempty list of matrices")
        out = []
        for k, entry in enumerate(raw):
            try:
                M = np.asarray(entry, dtype=float)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"field '{key}[{k}]' is not numeric") from exc
            if M.ndim != 2:
                raise ParseError(f"field '{key}[{k}]' must be a 2-D matrix")
            if not np.all(np.isfinite(M)):
                raise ParseError(f"field '{key}[{k}]' has non-finite entries")
            out.append(M)
        return tuple(out)

    A_verts = read_vertices("A_vertices")
    J_verts = read_vertices("J_vertices")
    n = data["n"]
    for key, verts in (("A_vertices", A_verts), ("J_vertices", J_verts)):
        for k, M in enumerate(verts):
            if M.shape != (n, n):
                raise ParseError(
                    f"field '{key}[{k}]' has shape {M.shape}, expected ({n}, {n})")
    return ImpulsiveSystem(n=n, A_vertices=A_verts, J_vertices=J_verts, label=label)


def load_system_file(path) -> ImpulsiveSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return load_system(fh.read())


def system_to_document(sys: ImpulsiveSystem) -> dict:
    """Inverse of load_system, for report echoing."""
    return {
        "n": sys.n,
        "A_vertices": [V.tolist() for V in sys.A_vertices],
        "J_vertices": [V.tolist() for V in sys.J_vertices],
        "label": sys.label,
    }


def instantiate(sys: ImpulsiveSystem, combo: ConvexCombination) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the polytopes at given convex weights: (sum k1_i A_i, sum k2_j J_j)."""
    if len(combo.A_weights) != len(sys.A_vertices):
        raise UsageError(
            f"A_weights length {len(combo.A_weights)} != vertex count "
            f"{len(sys.A_vertices)}")
    if len(combo.J_weights) != len(sys.J_vertices):
        raise UsageError(
            f"J_weights length {len(combo.J_weights)} != vertex count "
            f"{len(sys.J_vertices)}")
    A = sum(w * V for w, V in zip(combo.A_weights, sys.A_vertices))
    J = sum(w * V for w, V in zip(combo.J_weights, sys.J_vertices))
    return np.asarray(A), np.asarray(J)


def _classify_A(verts: Sequence[np.ndarray], delta: float) -> str:
    if all(is_hurwitz(V, delta) for V in verts):
        return "hurwitz"
    if all(is_anti_hurwitz(V, delta) for V in verts):
        return "anti-hurwitz"
    return "otherwise"


def _classify_J(verts: Sequence[np.ndarray], delta: float) -> str:
    if all(is_schur(V, delta) for V in verts):
        return "schur"
    if all(is_anti_schur(V, delta) for V in verts):
        return "anti-schur"
    return "otherwise"


def classify(sys: ImpulsiveSystem, config: NumericConfig = DEFAULT_CONFIG) -> Applicability:
    """Map the vertex eigenstructure to the applicable dwell-time analyses.

    Stable flow and stable jumps admit arbitrary impulse sequences; stable
    flow with destabilizing jumps calls for a minimal dwell time; unstable
    flow with stabilizing jumps calls for a maximal one; when neither matrix
    family is stable on its own, only the ranged analysis applies.
    """
    d = config.delta_eig
    a_cls = _classify_A(sys.A_vertices, d)
    j_cls = _classify_J(sys.J_vertices, d)
    flags = dict(arbitrary=False, minimal=False, maximal=False, ranged=False)
    note = ""
    if j_cls == "schur":
        if a_cls == "hurwitz":
            flags["arbitrary"] = True
            flags["minimal"] = True
        elif a_cls == "anti-hurwitz":
            flags["maximal"] = True
        else:
            flags["ranged"] = True
            flags["maximal"] = True
    elif j_cls == "anti-schur":
        if a_cls == "hurwitz":
            flags["minimal"] = True
        else:
            note = "no result applicable; ranged may still be attempted"
    else:
        if a_cls == "hurwitz":
            flags["minimal"] = True
        elif a_cls == "otherwise":
            flags["ranged"] = True
        else:
            note = "no result applicable; ranged may still be attempted"
    return Applicability(a_class=a_cls, j_class=j_cls, note=note, **flags)


def sampled_data_embed(Atilde, B, K, label: str = "") -> ImpulsiveSystem:
    """Embed a sampled-data loop ``xdot = Atilde x + B u, u = K x(t_k)`` as
    an impulsive system on the extended state ``(x, u)``.

    The flow matrix is ``[[Atilde, B], [0, 0]]`` and the jump matrix
    ``[[I, 0], [K, 0]]`` refreshes the held input from the sampled state.
    """
    Atilde = np.asarray(Atilde, dtype=float)
    B = np.asarray(B, dtype=float)
    K = np.asarray(K, dtype=float)
    if Atilde.ndim != 2 or Atilde.shape[0] != Atilde.shape[1]:
        raise DimensionError(f"Atilde must be square, got {Atilde.shape}")
    n = Atilde.shape[0]
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if K.ndim == 1:
        K = K.reshape(1, -1)
    if B.shape[0] != n:
        raise DimensionError(f"B must have {n} rows, got {B.shape}")
    m = B.shape[1]
    if K.shape != (m, n):
        raise DimensionError(f"K must have shape ({m}, {n}), got {K.shape}")
    A = np.block([[Atilde, B], [np.zeros((m, n)), np.zeros((m, m))]])
    J = np.block([[np.eye(n), np.zeros((n, m))], [K, np.zeros((m, m))]])
    return ImpulsiveSystem(n=n + m, A_vertices=(A,), J_vertices=(J,), label=label)
