"""
Minuscule modules given as edge-labelled weight diagrams.

A diagram file lists basis nodes and edges (from, to, root) meaning
E_root f_from = f_to and F_root f_to = f_from, both with coefficient 1. Weights
are propagated from a single anchor node; printed labels are only cross-checked.
"""

import heapq
import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import RepSchemaError, WeightConflictError
from .exactq import Scalar
from .rootsys import (
    RootSystem,
    Vector,
    add,
    build_root_system,
    fundamental_to_epsilon,
    inner,
)
from .sparse import SparseMat

logger = logging.getLogger(__name__)

BUNDLED_REPS = (
    "d5_halfspin16",
    "e6_fund27",
    "e7_fund56",
    "an_vector",
    "cn_vector",
    "dn_vector",
    "b3_spin8",
)


class AlgebraRef(BaseModel):
    family: str = Field(..., description="Root system family letter")
    rank: int = Field(..., ge=1, description="Rank of the root system")
    layout: Optional[str] = Field(None, description="Simple-root numbering convention")


class AnchorRef(BaseModel):
    node: int = Field(..., description="Node whose weight is given")
    weight_eps_numerators: Optional[List[int]] = Field(
        None, description="ε-coordinates times weight_denominator"
    )
    weight_fundamental: Optional[List[int]] = Field(None, description="Fundamental-weight coordinates")


class EdgeRef(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: int = Field(..., alias="from", description="Basis node acted on")
    to: int = Field(..., description="Image node")
    root: int = Field(..., description="Simple root index (1-based)")


class RepDiagram(BaseModel):
    """Schema of a representation diagram file"""

    name: str
    algebra: AlgebraRef
    weight_denominator: int = Field(default=1, ge=1)
    anchor: AnchorRef
    nodes: List[int]
    edges: List[EdgeRef]
    declared_weights: Optional[Dict[str, List[int]]] = Field(
        None, description="Printed node labels, cross-checked only"
    )
    declared_basis: Literal["epsilon", "fundamental"] = "epsilon"


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class ValidationReport(BaseModel):
    rep: str
    dim: int
    checks: List[CheckResult] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    info: Dict[str, object] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)


def bundled_rep_path(name: str) -> Path:
    """Path of a bundled diagram, e.g. ``d5_halfspin16``"""
    stem = Path(name).stem
    return Path(str(resources.files("qforge") / "data" / "reps" / f"{stem}.json"))


def load_rep(source: Union[str, Path, Dict]) -> RepDiagram:
    """
    Load and schema-check a diagram.

    Args:
        source: Bundled name, file path or already-parsed JSON mapping

    Returns:
        Parsed diagram with contiguous node ids 1..p
    """
    if isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        if not path.exists() and str(source) in BUNDLED_REPS:
            path = bundled_rep_path(str(source))
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise RepSchemaError(f"representation file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise RepSchemaError(f"representation file {path} is not valid JSON: {e}") from e

    try:
        diagram = RepDiagram.model_validate(data)
    except ValidationError as e:
        raise RepSchemaError(f"representation schema violation: {e}") from e

    p = len(diagram.nodes)
    if sorted(diagram.nodes) != list(range(1, p + 1)):
        raise RepSchemaError(f"{diagram.name}: node ids must be contiguous 1..{p}")
    seen = set()
    for edge in diagram.edges:
        key = (edge.source, edge.to, edge.root)
        if key in seen:
            raise RepSchemaError(f"{diagram.name}: duplicate edge {key}")
        seen.add(key)
        if not 1 <= edge.root <= diagram.algebra.rank:
            raise RepSchemaError(f"{diagram.name}: unknown root index {edge.root}")
        if edge.source not in range(1, p + 1) or edge.to not in range(1, p + 1):
            raise RepSchemaError(f"{diagram.name}: edge {key} references an unknown node")
    if diagram.anchor.node not in range(1, p + 1):
        raise RepSchemaError(f"{diagram.name}: anchor node {diagram.anchor.node} unknown")

    logger.info(f"Loaded diagram {diagram.name}: {p} nodes, {len(diagram.edges)} edges")
    return diagram


@dataclass(eq=False)
class RepModule:
    """
    Elaborated module: weights, generator matrices and K-action data.

    Basis indices are 0-based and topologically ordered, so every E-edge goes
    from a lower to a higher index.
    """

    name: str
    root_system: RootSystem
    node_ids: List[int]
    weights: List[Vector]
    edges: List[Tuple[int, int, int]]
    L: int
    matE: Dict[int, SparseMat]
    matF: Dict[int, SparseMat]
    pairings: List[List[Fraction]]
    warnings: List[str] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def index_of(self, node_id: int) -> int:
        return self.node_ids.index(node_id)

    def weight_inner(self, a: int, b: int) -> Fraction:
        return inner(self.weights[a], self.weights[b])

    def coroot_pairing(self, idx: int, i: int) -> Fraction:
        """⟨wt_idx, α_i^∨⟩ with 1-based root index"""
        return self.pairings[i - 1][idx] / self.root_system.symmetrizers[i - 1]

    def q_i(self, i: int) -> Scalar:
        return Scalar.q_power(self.root_system.symmetrizers[i - 1], self.L)

    def k_diag(self, exponents: Sequence[Fraction]) -> SparseMat:
        """Diagonal action of ∏ K_i^{r_i}: q^{Σ r_i (α_i, wt)}"""
        values = []
        for idx in range(self.dim):
            total = sum(
                (Fraction(r) * self.pairings[i][idx] for i, r in enumerate(exponents)), Fraction(0)
            )
            values.append(Scalar.q_power(total, self.L))
        return SparseMat.diagonal(values, self.L)

    def k_weight(self, weight: Vector, sign: int = 1) -> SparseMat:
        """Diagonal q^{sign (weight, wt)} for a weight given in ε-coordinates"""
        return SparseMat.diagonal(
            [Scalar.q_power(sign * inner(weight, w), self.L) for w in self.weights], self.L
        )

    def K(self, i: int, power: int = 1) -> SparseMat:
        exps = [Fraction(0)] * self.root_system.rank
        exps[i - 1] = Fraction(power)
        return self.k_diag(exps)

    def predecessors(self, idx: int) -> List[Tuple[int, int]]:
        """(source index, root) for every edge ending at idx"""
        return [(a, r) for a, b, r in self.edges if b == idx]

    @property
    def highest(self) -> int:
        return self.dim - 1

    @property
    def lowest(self) -> int:
        return 0


def _anchor_weight(diagram: RepDiagram, rs: RootSystem) -> Vector:
    anchor = diagram.anchor
    if anchor.weight_eps_numerators is not None:
        if len(anchor.weight_eps_numerators) != rs.dim:
            raise RepSchemaError(f"{diagram.name}: anchor weight has wrong dimension")
        return tuple(Fraction(x, diagram.weight_denominator) for x in anchor.weight_eps_numerators)
    if anchor.weight_fundamental is not None:
        return fundamental_to_epsilon(rs, anchor.weight_fundamental).coords
    raise RepSchemaError(f"{diagram.name}: anchor needs a weight")


def _tree_path(parent: Dict[int, Optional[int]], node: int) -> List[int]:
    path = [node]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return list(reversed(path))


def _propagate(diagram: RepDiagram, rs: RootSystem) -> Dict[int, Vector]:
    adjacency: Dict[int, List[Tuple[int, Vector]]] = {n: [] for n in diagram.nodes}
    for edge in diagram.edges:
        alpha = rs.alpha(edge.root)
        adjacency[edge.source].append((edge.to, alpha))
        adjacency[edge.to].append((edge.source, tuple(-a for a in alpha)))

    start = diagram.anchor.node
    weights: Dict[int, Vector] = {start: _anchor_weight(diagram, rs)}
    parent: Dict[int, Optional[int]] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nbr, step in adjacency[node]:
            expected = add(weights[node], step)
            if nbr not in weights:
                weights[nbr] = expected
                parent[nbr] = node
                queue.append(nbr)
            elif weights[nbr] != expected:
                cycle = _tree_path(parent, node) + list(reversed(_tree_path(parent, nbr)))
                raise WeightConflictError(
                    f"{diagram.name}: weight conflict at node {nbr} via node {node}; cycle {cycle}",
                    cycle=cycle,
                )
    missing = sorted(set(diagram.nodes) - set(weights))
    if missing:
        raise WeightConflictError(f"{diagram.name}: diagram is disconnected, unreachable nodes {missing}")
    return weights


def _topological_order(diagram: RepDiagram) -> List[int]:
    """Kahn's algorithm on E-edges, smallest node id first"""
    indegree = {n: 0 for n in diagram.nodes}
    out: Dict[int, List[int]] = {n: [] for n in diagram.nodes}
    for edge in diagram.edges:
        out[edge.source].append(edge.to)
        indegree[edge.to] += 1
    heap = [n for n, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        node = heapq.heappop(heap)
        order.append(node)
        for nxt in out[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(heap, nxt)
    if len(order) != len(diagram.nodes):
        raise WeightConflictError(f"{diagram.name}: E-edges contain a directed cycle")
    return order


def exponent_denominator(weights: Sequence[Vector], rs: RootSystem) -> int:
    """Least L with every (wt_i, wt_k) and (β,β)/2 in (1/L)Z"""
    L = 1
    for a in weights:
        for b in weights:
            L = math.lcm(L, inner(a, b).denominator)
    for beta in rs.positive_roots:
        L = math.lcm(L, (inner(beta, beta) / 2).denominator)
    return L


def _declared_mismatches(diagram: RepDiagram, rs: RootSystem, weights: Dict[int, Vector]) -> List[str]:
    warnings = []
    for key, label in (diagram.declared_weights or {}).items():
        node = int(key)
        if diagram.declared_basis == "epsilon":
            declared = tuple(Fraction(x, diagram.weight_denominator) for x in label)
        else:
            declared = fundamental_to_epsilon(rs, label).coords
        if declared != weights.get(node):
            derived = [str(x) for x in weights[node]]
            warnings.append(
                f"{diagram.name}: printed label of node {node} {label} disagrees with propagated weight {derived}"
            )
    return warnings


def elaborate(diagram: RepDiagram) -> RepModule:
    """
    Compute weights, topological order and generator matrices.

    Args:
        diagram: Schema-checked diagram

    Returns:
        Elaborated module over the exponent denominator of its weights
    """
    rs = build_root_system(diagram.algebra.family, diagram.algebra.rank, diagram.algebra.layout)
    by_node = _propagate(diagram, rs)
    warnings = _declared_mismatches(diagram, rs, by_node)
    for w in warnings:
        logger.warning(w)

    order = _topological_order(diagram)
    position = {node: idx for idx, node in enumerate(order)}
    weights = [by_node[node] for node in order]
    edges = [(position[e.source], position[e.to], e.root) for e in diagram.edges]
    L = exponent_denominator(weights, rs)
    p = len(weights)

    one = Scalar.one(L)
    e_rows: Dict[int, Dict[int, Dict[int, Scalar]]] = {i: {} for i in range(1, rs.rank + 1)}
    f_rows: Dict[int, Dict[int, Dict[int, Scalar]]] = {i: {} for i in range(1, rs.rank + 1)}
    for a, b, r in edges:
        e_rows[r].setdefault(b, {})[a] = one
        f_rows[r].setdefault(a, {})[b] = one
    mat_e = {i: SparseMat(rows, (p, p), L) for i, rows in e_rows.items()}
    mat_f = {i: SparseMat(rows, (p, p), L) for i, rows in f_rows.items()}
    pairings = [[inner(alpha, w) for w in weights] for alpha in rs.simple_roots]

    rep = RepModule(
        name=diagram.name,
        root_system=rs,
        node_ids=order,
        weights=weights,
        edges=edges,
        L=L,
        matE=mat_e,
        matF=mat_f,
        pairings=pairings,
        warnings=warnings,
    )
    logger.info(f"Elaborated {rep.name}: dim {p}, exponent denominator L = {L}")
    return rep


def load_module(source: Union[str, Path, Dict]) -> RepModule:
    return elaborate(load_rep(source))


def _commutator_ok(rep: RepModule, i: int, j: int) -> bool:
    lhs = rep.matE[i] @ rep.matF[j] - rep.matF[j] @ rep.matE[i]
    if i != j:
        return lhs.is_zero()
    q_i = rep.q_i(i)
    denom = q_i - q_i.inverse()
    values = []
    for idx in range(rep.dim):
        k = Scalar.q_power(rep.pairings[i - 1][idx], rep.L)
        values.append((k - k.inverse()) / denom)
    return lhs == SparseMat.diagonal(values, rep.L)


def validate_rep(rep: Union[RepModule, RepDiagram]) -> ValidationReport:
    """
    Run the module checks; failures are report entries, never exceptions.

    Args:
        rep: Elaborated module, or a diagram to elaborate first

    Returns:
        Per-check pass/fail report
    """
    if isinstance(rep, RepDiagram):
        try:
            rep = elaborate(rep)
        except WeightConflictError as e:
            report = ValidationReport(rep=rep.name, dim=len(rep.nodes))
            report.checks.append(CheckResult(name="weight_propagation", passed=False, detail=str(e)))
            return report

    rs = rep.root_system
    report = ValidationReport(rep=rep.name, dim=rep.dim, warnings=list(rep.warnings))
    report.checks.append(CheckResult(name="weight_propagation", passed=True))
    report.checks.append(
        CheckResult(name="dimension", passed=rep.dim == len(rep.node_ids), detail=f"dim {rep.dim}")
    )

    bad_e = [i for i, m in rep.matE.items() if not (m @ m).is_zero()]
    bad_f = [i for i, m in rep.matF.items() if not (m @ m).is_zero()]
    report.checks.append(CheckResult(name="E_squared_zero", passed=not bad_e, detail=f"failing roots {bad_e}" if bad_e else ""))
    report.checks.append(CheckResult(name="F_squared_zero", passed=not bad_f, detail=f"failing roots {bad_f}" if bad_f else ""))

    bad_pairs = [
        (i, j)
        for i in range(1, rs.rank + 1)
        for j in range(1, rs.rank + 1)
        if not _commutator_ok(rep, i, j)
    ]
    report.checks.append(
        CheckResult(name="commutator", passed=not bad_pairs, detail=f"failing pairs {bad_pairs}" if bad_pairs else "")
    )

    distinct = len(set(rep.weights)) == rep.dim
    report.checks.append(CheckResult(name="weights_distinct", passed=distinct))

    offending = []
    for beta in rs.positive_roots:
        norm = inner(beta, beta)
        for idx, w in enumerate(rep.weights):
            if 2 * inner(w, beta) / norm not in (-1, 0, 1):
                offending.append((rep.node_ids[idx], [str(x) for x in beta]))
                break
    report.checks.append(
        CheckResult(name="minuscule", passed=not offending, detail=f"first offenders {offending[:3]}" if offending else "")
    )

    negated = sorted(tuple(-x for x in w) for w in rep.weights)
    report.info["self_dual"] = negated == sorted(rep.weights)
    report.info["L"] = rep.L
    report.info["edges"] = len(rep.edges)
    logger.info(f"Validated {rep.name}: {'pass' if report.passed else 'FAIL'}")
    return report
