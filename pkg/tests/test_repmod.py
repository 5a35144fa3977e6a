"""
Test representation diagrams: loading, weight propagation and module checks.
"""

import copy
import json
from fractions import Fraction

import pytest

from qforge.errors import RepSchemaError, WeightConflictError
from qforge.repmod import (
    BUNDLED_REPS,
    bundled_rep_path,
    elaborate,
    load_module,
    load_rep,
    validate_rep,
)

A1_DOUBLET = {
    "name": "a1_doublet",
    "algebra": {"family": "A", "rank": 1},
    "weight_denominator": 2,
    "anchor": {"node": 1, "weight_eps_numerators": [-1, 1]},
    "nodes": [1, 2],
    "edges": [{"from": 1, "to": 2, "root": 1}],
}


@pytest.fixture
def d5_raw():
    with open(bundled_rep_path("d5_halfspin16"), "r") as f:
        return json.load(f)


class TestLoadRep:
    """Schema and bundled data"""

    @pytest.mark.parametrize("name,nodes", [("d5_halfspin16", 16), ("e6_fund27", 27), ("e7_fund56", 56)])
    def test_bundled_sizes(self, name, nodes):
        diagram = load_rep(name)
        assert len(diagram.nodes) == nodes

    def test_d5_edge_count(self):
        assert len(load_rep("d5_halfspin16").edges) == 20

    def test_missing_file(self, tmp_path):
        with pytest.raises(RepSchemaError):
            load_rep(tmp_path / "nope.json")

    def test_non_contiguous_nodes(self):
        data = copy.deepcopy(A1_DOUBLET)
        data["nodes"] = [1, 3]
        data["edges"] = [{"from": 1, "to": 3, "root": 1}]
        with pytest.raises(RepSchemaError):
            load_rep(data)

    def test_unknown_root(self):
        data = copy.deepcopy(A1_DOUBLET)
        data["edges"][0]["root"] = 2
        with pytest.raises(RepSchemaError):
            load_rep(data)

    def test_duplicate_edge(self):
        data = copy.deepcopy(A1_DOUBLET)
        data["edges"].append({"from": 1, "to": 2, "root": 1})
        with pytest.raises(RepSchemaError):
            load_rep(data)

    def test_schema_violation(self):
        with pytest.raises(RepSchemaError):
            load_rep({"name": "broken"})


class TestElaborate:
    """Weights, ordering and generator matrices"""

    def test_anchor_and_first_step(self, d5_rep):
        half = Fraction(1, 2)
        assert d5_rep.weights[d5_rep.index_of(1)] == (-half, -half, -half, -half, half)
        assert d5_rep.weights[d5_rep.index_of(2)] == (-half, -half, -half, half, -half)

    def test_exponent_denominator(self, d5_rep):
        assert d5_rep.L == 4

    def test_topological_order(self, d5_rep):
        assert all(a < b for a, b, _ in d5_rep.edges)
        assert d5_rep.node_ids[d5_rep.highest] == 16
        assert d5_rep.node_ids[d5_rep.lowest] == 1

    def test_generator_matrices(self, d5_rep):
        a, b = d5_rep.index_of(1), d5_rep.index_of(2)
        assert d5_rep.matE[4].get(b, a).is_one()
        assert d5_rep.matF[4].get(a, b).is_one()
        assert d5_rep.matE[4].nnz() == 4

    def test_k_action(self, d5_rep):
        top = d5_rep.highest
        # (α5, λ5) = 1
        assert d5_rep.K(5).get(top, top) == d5_rep.q_i(5)
        assert d5_rep.coroot_pairing(top, 5) == 1

    def test_conflicting_edge(self, d5_raw):
        for edge in d5_raw["edges"]:
            if edge["from"] == 9 and edge["to"] == 12:
                edge["root"] = 3
        with pytest.raises(WeightConflictError) as excinfo:
            elaborate(load_rep(d5_raw))
        assert excinfo.value.cycle

    def test_declared_label_mismatch_is_warning(self, d5_raw):
        d5_raw["declared_weights"]["16"] = [-1, -1, -1, -1, -1]
        rep = elaborate(load_rep(d5_raw))
        assert any("node 16" in w for w in rep.warnings)


class TestValidateRep:
    """Module checks"""

    @pytest.mark.parametrize("name", BUNDLED_REPS)
    def test_bundled_modules_pass(self, name):
        report = validate_rep(load_module(name))
        assert report.passed, [c for c in report.checks if not c.passed]

    def test_small_doublet(self):
        report = validate_rep(load_module(A1_DOUBLET))
        assert report.passed
        assert report.dim == 2
        assert report.info["self_dual"] is True

    def test_conflict_reported_not_raised(self, d5_raw):
        for edge in d5_raw["edges"]:
            if edge["from"] == 9 and edge["to"] == 12:
                edge["root"] = 3
        report = validate_rep(load_rep(d5_raw))
        assert not report.passed
        assert report.check("weight_propagation").passed is False

    def test_missing_edge_breaks_commutator(self, d5_raw):
        d5_raw["edges"] = [e for e in d5_raw["edges"] if not (e["from"] == 7 and e["to"] == 9)]
        report = validate_rep(load_module(d5_raw))
        assert not report.check("commutator").passed

    def test_d5_is_not_self_dual(self, d5_rep):
        assert validate_rep(d5_rep).info["self_dual"] is False
