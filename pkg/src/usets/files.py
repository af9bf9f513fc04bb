"""Network document files.

Grammar (blank lines and ``#`` comments are skipped; errors carry line
numbers):

    nodes
    <id> <name> <dim>            (one per node)
    edges                        (optional when there are none)
    <parent> <child>
    factor <id>
    <region block>               (coordinate order: parents ascending, then self)
    factor <id> gaussian
    <dim rows of the mean map>   (omitted for roots)
    <offset line>
    <dim rows of the covariance>
    joint                        (alternative to factor blocks)
    <region block over all node blocks, ids ascending>
    evidence                     (optional)
    <id> <v1> <v2> ...

A document may carry region factors, gaussian factors, or a raw joint; the
commands validate which combination they need.  Raw joints exist because not
every joint set factorizes over a DAG.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConditionalMap, JointVariable, VariableSignature
from .estimate import GaussianFactor, GaussianNetwork
from .geometry import Region
from .network import Dag, UncertaintyNetwork, canonical_order
from .serialize import LineCursor, ParseError, parse_region

__all__ = ["NetworkDocument", "parse_network_document"]


@dataclass(frozen=True, eq=False)
class NetworkDocument:
    dag: Dag
    variables: dict[int, VariableSignature]
    region_factors: dict[int, Region]          # raw factor regions, keyed by node
    gaussian_factors: dict[int, GaussianFactor]
    joint_region: Region | None
    evidence: dict[int, np.ndarray]

    def require_network(self, check_definite: bool = True) -> UncertaintyNetwork:
        if self.gaussian_factors:
            raise ValueError("document has gaussian factors; use require_gaussian()")
        if set(self.region_factors) != set(self.dag.nodes):
            missing = sorted(set(self.dag.nodes) - set(self.region_factors))
            raise ValueError(f"missing factor blocks for nodes {missing}")
        factors: dict[int, object] = {}
        for i in self.dag.nodes:
            region = self.region_factors[i]
            parents = self.dag.parents(i)
            if parents:
                given_dim = sum(self.variables[p].dim for p in parents)
                given = VariableSignature(
                    "|".join(self.variables[p].name for p in parents), given_dim)
                factors[i] = ConditionalMap(given, self.variables[i], region)
            else:
                factors[i] = region
        return UncertaintyNetwork(self.dag, self.variables, factors,
                                  check_definite=check_definite)

    def require_gaussian(self) -> GaussianNetwork:
        factors: dict[int, GaussianFactor | None] = {}
        for i in self.dag.nodes:
            if i in self.gaussian_factors:
                factors[i] = self.gaussian_factors[i]
            elif i in self.region_factors:
                raise ValueError("gaussian estimation needs gaussian factor blocks"
                                 f" (node {i} has a region factor)")
            else:
                factors[i] = None  # flat root prior
        return GaussianNetwork(self.dag, self.variables, factors)

    def require_joint(self) -> JointVariable:
        order = canonical_order(self.dag)
        sigs = tuple(self.variables[i] for i in order)
        if self.joint_region is not None:
            total = sum(s.dim for s in sigs)
            if self.joint_region.dim != total:
                raise ValueError(
                    f"joint block has dimension {self.joint_region.dim}, nodes sum to {total}")
            if order != sorted(order):
                # raw joint blocks are declared in ascending node-id order
                from . import geometry as geo
                asc = sorted(order)
                offsets = {}
                start = 0
                for i in asc:
                    offsets[i] = start
                    start += self.variables[i].dim
                perm = [k for i in order
                        for k in range(offsets[i], offsets[i] + self.variables[i].dim)]
                return JointVariable(sigs, geo.project(self.joint_region, perm))
            return JointVariable(sigs, self.joint_region)
        from .network import joint as network_joint
        return network_joint(self.require_network())


def parse_network_document(text: str) -> NetworkDocument:
    cursor = LineCursor(text)
    variables: dict[int, VariableSignature] = {}
    node_order: list[int] = []
    edges: list[tuple[int, int]] = []
    region_factors: dict[int, Region] = {}
    gaussian_factors: dict[int, GaussianFactor] = {}
    joint_region: Region | None = None
    evidence: dict[int, np.ndarray] = {}

    header, lineno = cursor.next("nodes section")
    if header != "nodes":
        raise ParseError(f"expected 'nodes', got {header!r}", lineno)
    while True:
        peeked = cursor.peek()
        if peeked is None:
            break
        line, lineno = peeked
        first = line.split()[0]
        if first in ("edges", "factor", "joint", "evidence"):
            break
        cursor.next()
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("node line must be '<id> <name> <dim>'", lineno)
        try:
            node_id, dim = int(parts[0]), int(parts[2])
        except ValueError:
            raise ParseError("node id and dim must be integers", lineno) from None
        if node_id in variables:
            raise ParseError(f"duplicate node id {node_id}", lineno)
        try:
            variables[node_id] = VariableSignature(parts[1], dim)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        node_order.append(node_id)
    if not variables:
        raise ParseError("nodes section is empty", cursor.line)

    factors_seen = False
    while not cursor.at_end():
        line, lineno = cursor.next()
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "edges":
            if factors_seen:
                raise ParseError("edges section must precede factor blocks", lineno)
            while True:
                peeked = cursor.peek()
                if peeked is None:
                    break
                nxt, nxt_line = peeked
                if nxt.split()[0] in ("factor", "joint", "evidence"):
                    break
                cursor.next()
                parts = nxt.split()
                if len(parts) != 2:
                    raise ParseError("edge line must be '<parent> <child>'", nxt_line)
                try:
                    edges.append((int(parts[0]), int(parts[1])))
                except ValueError:
                    raise ParseError("edge endpoints must be integers", nxt_line) from None
        elif keyword == "factor":
            factors_seen = True
            if len(tokens) not in (2, 3):
                raise ParseError("factor header must be 'factor <id> [gaussian]'", lineno)
            try:
                node_id = int(tokens[1])
            except ValueError:
                raise ParseError("factor node id must be an integer", lineno) from None
            if node_id not in variables:
                raise ParseError(f"factor for unknown node {node_id}", lineno)
            if node_id in region_factors or node_id in gaussian_factors:
                raise ParseError(f"duplicate factor for node {node_id}", lineno)
            if len(tokens) == 3:
                if tokens[2] != "gaussian":
                    raise ParseError(f"unknown factor kind {tokens[2]!r}", lineno)
                gaussian_factors[node_id] = _parse_gaussian_factor(
                    cursor, variables, edges, node_id)
            else:
                region_factors[node_id] = parse_region(cursor)
        elif keyword == "joint":
            if joint_region is not None:
                raise ParseError("duplicate joint block", lineno)
            joint_region = parse_region(cursor)
        elif keyword == "evidence":
            while True:
                peeked = cursor.peek()
                if peeked is None:
                    break
                nxt, nxt_line = peeked
                if nxt.split()[0] in ("factor", "joint", "edges"):
                    break
                cursor.next()
                parts = nxt.split()
                try:
                    node_id = int(parts[0])
                    values = np.array([float(v) for v in parts[1:]])
                except ValueError:
                    raise ParseError("evidence line must be '<id> <values...>'", nxt_line) from None
                if node_id not in variables:
                    raise ParseError(f"evidence for unknown node {node_id}", nxt_line)
                if values.shape[0] != variables[node_id].dim:
                    raise ParseError(
                        f"evidence for node {node_id} needs {variables[node_id].dim} values",
                        nxt_line)
                evidence[node_id] = values
        else:
            raise ParseError(f"unknown section {keyword!r}", lineno)

    try:
        dag = Dag(node_order, edges)
    except ValueError as exc:
        raise ParseError(str(exc), cursor.line) from None
    for node_id, region in region_factors.items():
        parents = dag.parents(node_id)
        expected = sum(variables[p].dim for p in parents) + variables[node_id].dim
        if region.dim != expected:
            raise ParseError(
                f"factor of node {node_id} has dimension {region.dim}, expected {expected}"
                " (parents ascending, then self)", cursor.line)
    return NetworkDocument(dag, variables, region_factors, gaussian_factors,
                           joint_region, evidence)


def _parse_gaussian_factor(cursor: LineCursor, variables, edges, node_id) -> GaussianFactor:
    parents = sorted(p for p, c in edges if c == node_id)
    d = variables[node_id].dim
    pa_dim = sum(variables[p].dim for p in parents)
    mean_map = np.zeros((d, pa_dim))
    for r in range(d if pa_dim else 0):
        text, lineno = cursor.next("mean-map row")
        mean_map[r] = _floats_line(text, lineno, pa_dim)
    text, lineno = cursor.next("offset line")
    offset = _floats_line(text, lineno, d)
    cov = np.zeros((d, d))
    for r in range(d):
        text, lineno = cursor.next("covariance row")
        cov[r] = _floats_line(text, lineno, d)
    try:
        return GaussianFactor(mean_map, offset, cov)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def _floats_line(text: str, lineno: int, expected: int) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in text.split()])
    except ValueError as exc:
        raise ParseError(f"bad number: {exc}", lineno) from None
    if vals.shape[0] != expected:
        raise ParseError(f"expected {expected} values, got {vals.shape[0]}", lineno)
    return vals
