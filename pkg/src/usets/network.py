"""DAG-factorized uncertainty networks.

A network assigns every root node a region and every non-root node a
conditional relation whose given block is the concatenation of its parents in
ascending node-id order (that ordering is part of the file format).  The
joint uncertainty set is the conjunction of all factor constraints, built by
folding joins along a topological order; the result is order independent.

Graph separation is decided by the standard reachability formulation over
(node, travel-direction) states, and the factorization carries the expected
consequences: every node is conditionally independent of its non-descendants
given its parents, and d-separated node sets are conditionally independent.
Ancestral marginalization works by peeling leaves: dropping a leaf's factor
is exact because a definite factor constrains nothing once its own block is
projected away.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import geometry as geo
from .core import (
    ConditionalMap,
    JointVariable,
    VariableSignature,
    conditioned_joint,
    is_conditionally_independent,
    marginal as joint_marginal,
)
from .geometry import (
    DimensionMismatchError,
    EmptyRegion,
    FullRegion,
    HPolytope,
    Region,
    UnionOfPolytopes,
    Verdict,
)

__all__ = [
    "Dag",
    "Relatives",
    "DSepQuery",
    "canonical_order",
    "relatives",
    "ancestral_closure",
    "d_separated",
    "UncertaintyNetwork",
    "NotAlwaysDefiniteError",
    "always_definite_report",
    "joint",
    "eliminate_leaf",
    "marginal_ancestral",
    "network_posterior",
    "verify_local_independence",
    "GlobalIndependenceResult",
    "verify_global_independence",
    "audit_global_independence",
]


@dataclass(frozen=True, eq=False)
class Dag:
    """Directed acyclic graph over integer node ids."""

    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    def __init__(self, nodes: Iterable[int], edges: Iterable[tuple[int, int]]):
        nodes = tuple(int(n) for n in nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node ids")
        edge_list = [(int(p), int(c)) for p, c in edges]
        edge_set = frozenset(edge_list)
        if len(edge_set) != len(edge_list):
            raise ValueError("duplicate edges")
        node_set = set(nodes)
        for p, c in edge_set:
            if p == c:
                raise ValueError(f"self-loop at node {p}")
            if p not in node_set or c not in node_set:
                raise ValueError(f"edge ({p}, {c}) uses unknown node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edge_set)
        parents: dict[int, list[int]] = {n: [] for n in nodes}
        children: dict[int, list[int]] = {n: [] for n in nodes}
        for p, c in edge_set:
            parents[c].append(p)
            children[p].append(c)
        object.__setattr__(self, "_parents", {n: tuple(sorted(v)) for n, v in parents.items()})
        object.__setattr__(self, "_children", {n: tuple(sorted(v)) for n, v in children.items()})
        canonical_order(self)  # raises on cycles

    def parents(self, i: int) -> tuple[int, ...]:
        return self._parents[i]

    def children(self, i: int) -> tuple[int, ...]:
        return self._children[i]

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(n for n in sorted(self.nodes) if not self._parents[n])

    def is_leaf(self, i: int) -> bool:
        return not self._children[i]


def canonical_order(g: Dag) -> list[int]:
    """Topological order with deterministic ascending-id tie-break."""
    indeg = {n: len(g._parents[n]) for n in g.nodes}
    heap = [n for n in g.nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in g._children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(g.nodes):
        raise ValueError("graph contains a cycle")
    return order


@dataclass(frozen=True)
class Relatives:
    parents: frozenset[int]
    ancestors: frozenset[int]
    descendants: frozenset[int]
    non_descendants: frozenset[int]


def _reach(adj, start: Iterable[int]) -> set[int]:
    seen: set[int] = set()
    stack = list(start)
    while stack:
        n = stack.pop()
        for nxt in adj(n):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def relatives(g: Dag, i: int) -> Relatives:
    if i not in set(g.nodes):
        raise KeyError(f"unknown node {i}")
    desc = _reach(g.children, [i])
    anc = _reach(g.parents, [i])
    non_desc = frozenset(set(g.nodes) - desc - {i})
    return Relatives(frozenset(g.parents(i)), frozenset(anc), frozenset(desc), non_desc)


def ancestral_closure(g: Dag, a: Iterable[int]) -> frozenset[int]:
    """a plus all its ancestors (fixed point of parent expansion)."""
    a = set(int(n) for n in a)
    unknown = a - set(g.nodes)
    if unknown:
        raise KeyError(f"unknown nodes {sorted(unknown)}")
    return frozenset(a | _reach(g.parents, a))


@dataclass(frozen=True)
class DSepQuery:
    a: frozenset[int]
    b: frozenset[int]
    c: frozenset[int]

    def __init__(self, a: Iterable[int], b: Iterable[int], c: Iterable[int] = ()):
        a, b, c = frozenset(a), frozenset(b), frozenset(c)
        if not a or not b:
            raise ValueError("query sets a and b must be nonempty")
        if a & b or a & c or b & c:
            raise ValueError("query sets must be pairwise disjoint")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


def d_separated(g: Dag, q: DSepQuery) -> bool:
    """All undirected paths from a to b are blocked by c.

    Reachability over (node, direction) states: a trail arriving at a node
    from a child ("up") passes through unobserved nodes in both directions;
    a trail arriving from a parent ("down") continues to children when the
    node is unobserved and bounces back up only at colliders whose
    descendants meet c.
    """
    node_set = set(g.nodes)
    for n in q.a | q.b | q.c:
        if n not in node_set:
            raise KeyError(f"unknown node {n}")
    observed = q.c
    # nodes with an observed descendant (or observed themselves): these
    # activate colliders
    activating = set(observed)
    for n in observed:
        activating |= _reach(g.parents, [n])

    visited: set[tuple[int, str]] = set()
    stack = [(n, "up") for n in q.a]
    while stack:
        node, direction = stack.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in observed and node in q.b:
            return False
        if direction == "up" and node not in observed:
            stack.extend((p, "up") for p in g.parents(node))
            stack.extend((c, "down") for c in g.children(node))
        elif direction == "down":
            if node not in observed:
                stack.extend((c, "down") for c in g.children(node))
            if node in activating:
                stack.extend((p, "up") for p in g.parents(node))
    return True


# ---------------------------------------------------------------------------
# Networks
# ---------------------------------------------------------------------------


class NotAlwaysDefiniteError(ValueError):
    """A non-root factor is provably empty somewhere on its parents' reachable set."""


class UncertaintyNetwork:
    """A DAG plus per-node factors (root regions / conditional relations).

    Parents are concatenated in ascending node-id order to form each
    conditional's given block.  Construction validates dimensions and, by
    default, the definiteness of every non-root factor over its parents'
    reachable set: exact violations raise, sampled violations warn
    (tri-state honesty).  Pass ``check_definite=False`` to skip, e.g. to
    build deliberate counterexamples.
    """

    def __init__(self, dag: Dag, variables: Mapping[int, VariableSignature],
                 factors: Mapping[int, Region | ConditionalMap],
                 check_definite: bool = True, seed: int = 0):
        self.dag = dag
        self.variables = dict(variables)
        self.factors = dict(factors)
        if set(self.variables) != set(dag.nodes):
            raise ValueError("variables must cover exactly the dag nodes")
        if set(self.factors) != set(dag.nodes):
            raise ValueError("factors must cover exactly the dag nodes")
        names = [self.variables[n].name for n in dag.nodes]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        for n in dag.nodes:
            sig = self.variables[n]
            factor = self.factors[n]
            parents = dag.parents(n)
            if parents:
                if not isinstance(factor, ConditionalMap):
                    raise TypeError(f"node {n} has parents and needs a ConditionalMap factor")
                pa_dim = sum(self.variables[p].dim for p in parents)
                if factor.given.dim != pa_dim or factor.target.dim != sig.dim:
                    raise DimensionMismatchError(
                        f"factor of node {n} disagrees with parent/self dimensions")
            else:
                if isinstance(factor, ConditionalMap):
                    raise TypeError(f"root node {n} needs a Region factor")
                if factor.dim != sig.dim:
                    raise DimensionMismatchError(
                        f"factor of node {n} disagrees with its dimension")
                if geo.is_empty(factor, seed=seed) is Verdict.TRUE:
                    raise ValueError(f"root factor of node {n} is empty")
        if check_definite:
            report = always_definite_report(self, seed=seed)
            for n, verdict in report.items():
                if verdict is Verdict.FALSE:
                    raise NotAlwaysDefiniteError(
                        f"factor of node {n} is not always definite on its parents'"
                        f" reachable set")
            sampled = [n for n, v in report.items() if v is Verdict.SAMPLED_TRUE]
            if sampled:
                warnings.warn(
                    f"definiteness of factors {sampled} was only sampled, not proved",
                    stacklevel=2)

    def signature(self, i: int) -> VariableSignature:
        return self.variables[i]

    def node_by_name(self, name: str) -> int:
        for n, sig in self.variables.items():
            if sig.name == name:
                return n
        raise KeyError(f"unknown variable {name!r}")


def always_definite_report(n: UncertaintyNetwork, seed: int = 0) -> dict[int, Verdict]:
    """Per-node check that each conditional is nonempty on the parents' reachable set.

    The reachable set of a node's parents is the marginal of the ancestral
    sub-network; the factor is definite there iff that marginal is included
    in the projection of the relation onto the given block.  Inclusion is
    exact for polytopic representations, sampled otherwise.
    """
    report: dict[int, Verdict] = {}
    order = canonical_order(n.dag)
    for i in order:
        parents = n.dag.parents(i)
        if not parents:
            report[i] = Verdict.TRUE
            continue
        factor: ConditionalMap = n.factors[i]
        closure = ancestral_closure(n.dag, parents)
        reachable_joint = _conjunction_region(n, sorted(closure))
        pa_idx = _indices_within(n, sorted(closure), parents)
        reachable = geo.project(reachable_joint, pa_idx)
        domain = geo.project(factor.relation, factor.given_indices)
        report[i] = geo.is_subset(reachable, domain, seed=seed)
    return report


def _indices_within(n: UncertaintyNetwork, scope: Sequence[int], targets: Sequence[int]) -> list[int]:
    """Coordinate indices of target blocks inside a scope ordered by node id."""
    offsets = {}
    start = 0
    for node in scope:
        offsets[node] = start
        start += n.variables[node].dim
    out: list[int] = []
    for t in targets:
        out.extend(range(offsets[t], offsets[t] + n.variables[t].dim))
    return out


def _embed_rows(region: Region, col_map: list[int], total: int) -> Region:
    """Lift a region into a larger space; unmapped coordinates are free."""
    if isinstance(region, EmptyRegion):
        return EmptyRegion(total)
    if isinstance(region, FullRegion):
        return FullRegion(total)
    if isinstance(region, (geo.Box, HPolytope)):
        p = geo.as_polytope(region)
        a = np.zeros((p.nrows, total))
        a[:, col_map] = p.a
        return HPolytope(a, p.b)
    if isinstance(region, UnionOfPolytopes):
        return geo.union_of(
            [_embed_rows(piece, col_map, total) for piece in region.pieces])
    raise geo.UnsupportedRepresentationError(
        "network factors must be exact (box / polytope / union); ellipsoidal or"
        " oracle factors have no H-representation to embed")


def _conjunction_region(n: UncertaintyNetwork, scope: Sequence[int]) -> Region:
    """Conjunction of the factors of ``scope`` over the scope's blocks.

    Only valid when scope is ancestrally closed (every parent of a scope
    node is in scope); callers guarantee that.
    """
    scope = list(scope)
    total = sum(n.variables[i].dim for i in scope)
    region: Region = FullRegion(total)
    for i in scope:
        factor = n.factors[i]
        parents = n.dag.parents(i)
        if parents:
            cols = _indices_within(n, scope, list(parents) + [i])
            lifted = _embed_rows(factor.relation, cols, total)
        else:
            cols = _indices_within(n, scope, [i])
            lifted = _embed_rows(factor, cols, total)
        region = geo.intersect(region, lifted)
    return region


def joint(n: UncertaintyNetwork, order: Sequence[int] | None = None) -> JointVariable:
    """Joint uncertainty over all nodes: conjunction of every factor.

    ``order`` may be any topological order and only affects the construction
    sequence; the blocks of the result always follow the canonical order and
    the set itself is order independent (asserted as a property test).
    """
    canon = canonical_order(n.dag)
    if order is None:
        order = canon
    else:
        order = [int(i) for i in order]
        if sorted(order) != sorted(n.dag.nodes):
            raise ValueError("order must enumerate every node exactly once")
        seen: set[int] = set()
        for i in order:
            if any(p not in seen for p in n.dag.parents(i)):
                raise ValueError("order is not topological")
            seen.add(i)

    total = sum(n.variables[i].dim for i in canon)
    offsets = {}
    start = 0
    for i in canon:
        offsets[i] = start
        start += n.variables[i].dim

    region: Region = FullRegion(total)
    for i in order:
        factor = n.factors[i]
        parents = n.dag.parents(i)
        if parents:
            cols = []
            for p in list(parents) + [i]:
                cols.extend(range(offsets[p], offsets[p] + n.variables[p].dim))
            lifted = _embed_rows(factor.relation, cols, total)
        else:
            cols = list(range(offsets[i], offsets[i] + n.variables[i].dim))
            lifted = _embed_rows(factor, cols, total)
        region = geo.intersect(region, lifted)
    sigs = tuple(n.variables[i] for i in canon)
    return JointVariable(sigs, region)


def eliminate_leaf(n: UncertaintyNetwork, j: int) -> UncertaintyNetwork:
    """Drop a leaf node and its factor; the remaining joint is the marginal.

    For definite factors this is exact (the leaf's constraint is the only one
    mentioning its block and admits a witness for every parent value), which
    is the content of the leaf-removal lemma and is enforced as a test.
    """
    if j not in set(n.dag.nodes):
        raise KeyError(f"unknown node {j}")
    if not n.dag.is_leaf(j):
        raise ValueError(f"node {j} has children and is not a leaf")
    nodes = tuple(i for i in n.dag.nodes if i != j)
    edges = [(p, c) for (p, c) in n.dag.edges if c != j and p != j]
    dag = Dag(nodes, edges)
    variables = {i: n.variables[i] for i in nodes}
    factors = {i: n.factors[i] for i in nodes}
    return UncertaintyNetwork(dag, variables, factors, check_definite=False)


def marginal_ancestral(n: UncertaintyNetwork, a: Iterable[int]) -> Region:
    """Marginal over an ancestral node set by repeated leaf elimination.

    Requires ``a`` to be ancestrally closed; the result equals the direct
    projection of the joint and is simply the conjunction of the factors of
    ``a``, with blocks in canonical order of the reduced network.
    """
    a = frozenset(int(i) for i in a)
    if a != ancestral_closure(n.dag, a):
        raise ValueError("node set is not ancestral (missing parents)")
    current = n
    while set(current.dag.nodes) != a:
        leaf = next(i for i in canonical_order(current.dag)[::-1]
                    if i not in a and current.dag.is_leaf(i))
        current = eliminate_leaf(current, leaf)
    return joint(current).uncertainty


def network_posterior(n: UncertaintyNetwork, evidence: Mapping[int, object],
                      query: Iterable[int]) -> Region:
    """Condition the joint on evidence, then project onto the query blocks.

    Blocks of the result follow the canonical order restricted to the query.
    An Empty result signals evidence outside the model.
    """
    query = [int(i) for i in query]
    node_set = set(n.dag.nodes)
    unknown = (set(query) | set(evidence)) - node_set
    if unknown:
        raise KeyError(f"unknown nodes {sorted(unknown)}")
    if set(query) & set(evidence):
        raise ValueError("query and evidence overlap")
    if not query:
        raise ValueError("query must be nonempty")
    jv = joint(n)
    named_evidence = {n.variables[i].name: v for i, v in evidence.items()}
    canon = canonical_order(n.dag)
    query_names = [n.variables[i].name for i in canon if i in set(query)]
    if named_evidence:
        jv = conditioned_joint(jv, named_evidence)
    if isinstance(jv.uncertainty, EmptyRegion):
        return EmptyRegion(sum(n.variables[i].dim for i in query))
    return joint_marginal(jv, query_names)


# ---------------------------------------------------------------------------
# Independence verification
# ---------------------------------------------------------------------------


def verify_local_independence(n: UncertaintyNetwork, seed: int = 0,
                              samples: int = 50) -> dict[int, Verdict]:
    """Each node vs. its non-descendants-minus-parents, given its parents."""
    jv = joint(n)
    report: dict[int, Verdict] = {}
    for i in n.dag.nodes:
        rel = relatives(n.dag, i)
        b = sorted(rel.non_descendants - rel.parents)
        if not b:
            report[i] = Verdict.TRUE  # vacuous
            continue
        a_names = [n.variables[i].name]
        b_names = [n.variables[k].name for k in b]
        c_names = [n.variables[k].name for k in sorted(rel.parents)]
        report[i] = is_conditionally_independent(
            jv, a_names, b_names, c_names, z_samples="auto", seed=seed, samples=samples)
    return report


@dataclass(frozen=True)
class GlobalIndependenceResult:
    query: DSepQuery
    separated: bool
    verdict: Verdict | None  # None when not applicable (not d-separated)

    @property
    def applicable(self) -> bool:
        return self.separated


def verify_global_independence(n: UncertaintyNetwork, q: DSepQuery,
                               seed: int = 0, samples: int = 50) -> GlobalIndependenceResult:
    """Conditional-independence check for one d-separation query.

    Not-applicable when the sets are not d-separated.  Otherwise the check
    runs on the marginal joint over a|b|c.
    """
    if not d_separated(n.dag, q):
        return GlobalIndependenceResult(q, False, None)
    jv = joint(n)
    a = [n.variables[i].name for i in sorted(q.a)]
    b = [n.variables[i].name for i in sorted(q.b)]
    c = [n.variables[i].name for i in sorted(q.c)]
    verdict = is_conditionally_independent(
        jv, a, b, c, z_samples="auto", seed=seed, samples=samples)
    return GlobalIndependenceResult(q, True, verdict)


def _lift_factorization_verdict(m_poly: HPolytope, a_idx: list[int], b_idx: list[int],
                                c_idx: list[int]) -> Verdict:
    """Exact conditional-independence test for a polytopic joint over a|b|c.

    The blocks are conditionally independent given c iff the set equals the
    intersection of its liftings from the (a,c)- and (b,c)-projections; the
    set is always contained in that intersection, so only the reverse
    inclusion needs an LP per row.
    """
    dim = m_poly.dim
    proj_ac = geo.project(m_poly, sorted(a_idx + c_idx))
    proj_bc = geo.project(m_poly, sorted(b_idx + c_idx))
    lift_ac = _embed_cols(proj_ac, sorted(a_idx + c_idx), dim)
    lift_bc = _embed_cols(proj_bc, sorted(b_idx + c_idx), dim)
    candidate = geo.intersect(lift_ac, lift_bc)
    return geo.is_subset(candidate, m_poly)


def _embed_cols(region: Region, cols: list[int], total: int) -> Region:
    if isinstance(region, EmptyRegion):
        return EmptyRegion(total)
    if isinstance(region, FullRegion):
        return FullRegion(total)
    p = geo.as_polytope(region)
    a = np.zeros((p.nrows, total))
    a[:, cols] = p.a
    return HPolytope(a, p.b)


def audit_global_independence(n: UncertaintyNetwork, max_nodes: int = 5,
                              seed: int = 0) -> list[GlobalIndependenceResult]:
    """Enumerate every d-separated triple and test it exactly.

    Usable for polytopic networks with at most ``max_nodes`` nodes (the
    enumeration is exponential).  Each d-separated triple (A, B, C) is tested
    with the exact factorization criterion on the marginal joint over
    A|B|C; triples that are not d-separated are reported as not applicable.
    Unordered pairs {A, B} are enumerated once.
    """
    nodes = sorted(n.dag.nodes)
    if len(nodes) > max_nodes:
        raise ValueError(f"audit is capped at {max_nodes} nodes")
    jv = joint(n)
    joint_poly = geo.as_polytope(jv.uncertainty)

    # Marginal cache per coordinate-index tuple.
    marg_cache: dict[tuple[int, ...], Region] = {}

    def marginal_poly(idx: tuple[int, ...]) -> Region:
        if idx not in marg_cache:
            marg_cache[idx] = geo.project(joint_poly, list(idx))
        return marg_cache[idx]

    def node_indices(group: Sequence[int]) -> list[int]:
        return jv.indices_of([n.variables[i].name for i in group])

    results: list[GlobalIndependenceResult] = []
    assignments = _triple_assignments(nodes)
    for a_set, b_set, c_set in assignments:
        q = DSepQuery(a_set, b_set, c_set)
        if not d_separated(n.dag, q):
            results.append(GlobalIndependenceResult(q, False, None))
            continue
        scope = sorted(a_set | b_set | c_set)
        scope_idx = tuple(node_indices(scope))
        m_region = marginal_poly(scope_idx)
        if isinstance(m_region, (EmptyRegion, FullRegion)):
            results.append(GlobalIndependenceResult(q, True, Verdict.TRUE))
            continue
        pos = {g: k for k, g in enumerate(scope_idx)}
        a_idx = [pos[i] for i in node_indices(sorted(a_set))]
        b_idx = [pos[i] for i in node_indices(sorted(b_set))]
        c_idx = [pos[i] for i in node_indices(sorted(c_set))]
        verdict = _lift_factorization_verdict(geo.as_polytope(m_region), a_idx, b_idx, c_idx)
        results.append(GlobalIndependenceResult(q, True, verdict))
    return results


def _triple_assignments(nodes: list[int]):
    """All (A, B, C) with A, B nonempty, pairwise disjoint; {A,B} unordered."""
    out = []
    n = len(nodes)
    for mask in range(4 ** n):
        a, b, c = set(), set(), set()
        m = mask
        for node in nodes:
            part = m % 4
            m //= 4
            if part == 1:
                a.add(node)
            elif part == 2:
                b.add(node)
            elif part == 3:
                c.add(node)
        if not a or not b:
            continue
        if min(a) > min(b):  # unordered {A, B}: keep one orientation
            continue
        out.append((frozenset(a), frozenset(b), frozenset(c)))
    return out
