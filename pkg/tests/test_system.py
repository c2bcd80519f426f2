import json

import numpy as np
import pytest

from dwellcert.errors import DimensionError, ParseError, UsageError
from dwellcert.linalg import spectral_radius
from dwellcert.system import (
    ConvexCombination,
    DwellTimeSpec,
    ImpulsiveSystem,
    classify,
    instantiate,
    load_system,
    sampled_data_embed,
)

EX1_DOC = {
    "n": 2,
    "A_vertices": [[[1.0, 3.0], [-1.0, 2.0]]],
    "J_vertices": [[[0.5, 0.0], [0.0, 0.5]]],
    "label": "ex1",
}


class TestLoadSystem:
    def test_nominal_document(self):
        sys = load_system(json.dumps(EX1_DOC))
        assert sys.is_nominal
        assert sys.n == 2
        assert np.allclose(sys.A, [[1, 3], [-1, 2]])
        assert sys.label == "ex1"

    def test_uncertain_document(self):
        doc = dict(EX1_DOC)
        doc["A_vertices"] = [[[1, 3], [-1, 2]], [[2, 2], [0, 6]]]
        sys = load_system(doc)
        assert not sys.is_nominal
        assert len(sys.A_vertices) == 2

    def test_dimension_mismatch_names_field(self):
        doc = dict(EX1_DOC)
        doc["J_vertices"] = [np.eye(3).tolist()]
        with pytest.raises(ParseError, match="J_vertices"):
            load_system(doc)

    def test_missing_field(self):
        doc = {k: v for k, v in EX1_DOC.items() if k != "n"}
        with pytest.raises(ParseError, match="n"):
            load_system(doc)

    def test_unknown_field(self):
        doc = dict(EX1_DOC, extra=1)
        with pytest.raises(ParseError, match="extra"):
            load_system(doc)

    def test_empty_vertex_list(self):
        doc = dict(EX1_DOC, A_vertices=[])
        with pytest.raises(ParseError, match="A_vertices"):
            load_system(doc)

    def test_non_finite_entries(self):
        doc = dict(EX1_DOC)
        doc["A_vertices"] = [[[1.0, float("inf")], [0.0, 1.0]]]
        with pytest.raises(ParseError, match="A_vertices"):
            load_system(json.dumps(doc).replace("Infinity", "1e999"))

    def test_invalid_json(self):
        with pytest.raises(ParseError):
            load_system("{not json")


class TestDwellTimeSpec:
    def test_kinds(self):
        DwellTimeSpec.periodic(0.3)
        DwellTimeSpec.minimal(1.2)
        DwellTimeSpec.maximal(0.4)
        DwellTimeSpec.ranged(0.2, 0.5)
        DwellTimeSpec.arbitrary()

    def test_ranged_ordering_enforced(self):
        with pytest.raises(UsageError):
            DwellTimeSpec.ranged(0.5, 0.2)

    def test_tiny_bound_rejected(self):
        with pytest.raises(UsageError):
            DwellTimeSpec.periodic(1e-12)


class TestInstantiate:
    def test_singleton_weight_one(self):
        sys = load_system(EX1_DOC)
        A, J = instantiate(sys, ConvexCombination((1.0,), (1.0,)))
        assert np.array_equal(A, sys.A)
        assert np.array_equal(J, sys.J)

    def test_midpoint(self):
        doc = dict(EX1_DOC)
        doc["A_vertices"] = [np.zeros((2, 2)).tolist(), (2 * np.eye(2)).tolist()]
        sys = load_system(doc)
        A, _ = instantiate(sys, ConvexCombination((0.5, 0.5), (1.0,)))
        assert np.allclose(A, np.eye(2))

    def test_indicator_returns_vertex_exactly(self):
        doc = dict(EX1_DOC)
        doc["A_vertices"] = [[[1, 3], [-1, 2]], [[2, 2], [0, 6]]]
        sys = load_system(doc)
        A, _ = instantiate(sys, ConvexCombination((1.0, 0.0), (1.0,)))
        assert np.array_equal(A, sys.A_vertices[0])
        A, _ = instantiate(sys, ConvexCombination((0.0, 1.0), (1.0,)))
        assert np.array_equal(A, sys.A_vertices[1])

    def test_weight_validation(self):
        with pytest.raises(UsageError):
            ConvexCombination((0.5, 0.6), (1.0,))
        with pytest.raises(UsageError):
            ConvexCombination((-0.1, 1.1), (1.0,))
        sys = load_system(EX1_DOC)
        with pytest.raises(UsageError):
            instantiate(sys, ConvexCombination((0.5, 0.5), (1.0,)))


class TestClassify:
    def test_unstable_flow_contracting_jumps(self):
        sys = ImpulsiveSystem.nominal([[1, 3], [-1, 2]], 0.5 * np.eye(2))
        app = classify(sys)
        assert app.maximal and not app.minimal and not app.arbitrary
        assert app.a_class == "anti-hurwitz" and app.j_class == "schur"

    def test_stable_flow_expanding_jumps(self):
        sys = ImpulsiveSystem.nominal([[-1, 0], [1, -2]], [[2, 1], [1, 3]])
        app = classify(sys)
        assert app.minimal and not app.maximal
        assert app.j_class == "anti-schur"

    def test_neither_stable(self):
        sys = ImpulsiveSystem.nominal([[-1, 0.1], [0, 1.2]],
                                      [[1.2, 0], [0, 0.5]])
        app = classify(sys)
        assert app.ranged and not app.minimal and not app.maximal
        assert app.a_class == "otherwise" and app.j_class == "otherwise"

    def test_both_stable(self):
        sys = ImpulsiveSystem.nominal(-np.eye(2), 0.5 * np.eye(2))
        app = classify(sys)
        assert app.arbitrary and app.minimal

    def test_dead_cell_reports_note(self):
        sys = ImpulsiveSystem.nominal(np.eye(2), 2.0 * np.eye(2))
        app = classify(sys)
        assert not any(app.flags().values())
        assert "ranged may still be attempted" in app.note

    def test_vertex_order_invariance(self):
        verts = (np.array([[1.0, 3.0], [-1.0, 2.0]]),
                 np.array([[2.0, 2.0], [0.0, 6.0]]))
        a = classify(ImpulsiveSystem(2, verts, (0.5 * np.eye(2),)))
        b = classify(ImpulsiveSystem(2, verts[::-1], (0.5 * np.eye(2),)))
        assert a.flags() == b.flags()

    def test_uncertain_needs_every_vertex(self):
        verts = (-np.eye(2), np.eye(2))  # one stable, one unstable vertex
        app = classify(ImpulsiveSystem(2, verts, (0.5 * np.eye(2),)))
        assert app.a_class == "otherwise"


class TestSampledDataEmbed:
    def test_reference_loop(self):
        sys = sampled_data_embed([[0, 1], [0, -0.1]], [[0], [0.1]],
                                 [[-3.75, -11.5]])
        assert sys.n == 3
        A, J = sys.A, sys.J
        assert np.allclose(A[:2, :2], [[0, 1], [0, -0.1]])
        assert np.allclose(A[:2, 2], [0, 0.1])
        assert np.allclose(A[2, :], 0)
        assert np.allclose(J[:2, :2], np.eye(2))
        assert np.allclose(J[2, :2], [-3.75, -11.5])
        assert np.allclose(J[:, 2], 0)
        # neither embedded matrix is stable on its own
        assert spectral_radius(J) >= 1.0 - 1e-12
        app = classify(sys)
        assert app.a_class != "hurwitz" and app.j_class != "schur"
        assert app.ranged

    def test_zero_gain_decouples(self):
        sys = sampled_data_embed(-np.eye(2), np.zeros((2, 1)),
                                 np.zeros((1, 2)))
        A = sys.A
        assert np.allclose(A[:2, 2], 0)
        assert np.allclose(A[2, :], 0)

    def test_jump_is_idempotent(self):
        sys = sampled_data_embed([[0, 1], [0, -0.1]], [[0], [0.1]],
                                 [[-3.75, -11.5]])
        J = sys.J
        assert np.allclose(J @ J, J)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            sampled_data_embed(np.eye(2), np.zeros((3, 1)), np.zeros((1, 2)))
        with pytest.raises(DimensionError):
            sampled_data_embed(np.eye(2), np.zeros((2, 1)), np.zeros((2, 2)))


class TestImpulsiveSystemValidation:
    def test_vertex_dimension_check(self):
        with pytest.raises(DimensionError):
            ImpulsiveSystem(2, (np.eye(2),), (np.eye(3),))

    def test_empty_vertices(self):
        with pytest.raises(DimensionError):
            ImpulsiveSystem(2, tuple(), (np.eye(2),))

    def test_uncertain_A_accessor_blocked(self):
        sys = ImpulsiveSystem(2, (np.eye(2), 2 * np.eye(2)), (np.eye(2),))
        with pytest.raises(UsageError):
            _ = sys.A
