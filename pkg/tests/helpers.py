"""Random-instance generators shared across test modules."""

from __future__ import annotations

import numpy as np

from usets import geometry as geo
from usets.core import ConditionalMap, VariableSignature
from usets.network import Dag, UncertaintyNetwork


def random_bounded_polytope(rng, dim, extra_rows, radius=3.0, margin=(0.05, 1.0)):
    """Nonempty bounded polytope: random cut rows around an interior point,
    plus box rows guaranteeing boundedness."""
    interior = rng.uniform(-1.0, 1.0, size=dim)
    rows = rng.normal(size=(extra_rows, dim))
    norms = np.linalg.norm(rows, axis=1)
    rows = rows[norms > 1e-9]
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    rhs = rows @ interior + rng.uniform(*margin, size=rows.shape[0])
    box_rows = np.vstack([np.eye(dim), -np.eye(dim)])
    box_rhs = np.hstack([interior, -interior]) + radius
    return geo.polytope(np.vstack([rows, box_rows]), np.hstack([rhs, box_rhs]))


def random_definite_pair(rng, max_dim=3, max_extra_rows=4):
    """(U_X, conditional map) with the map definite for every x.

    The relation is C (y - F x - g) <= d where {u | Cu <= d} is a fixed
    bounded nonempty offset polytope, so the value at any x is a translate of
    a nonempty set.
    """
    dx = int(rng.integers(1, max_dim + 1))
    dy = int(rng.integers(1, max_dim + 1))
    ux = random_bounded_polytope(rng, dx, int(rng.integers(0, max_extra_rows)))
    offset_poly = random_bounded_polytope(rng, dy, int(rng.integers(0, max_extra_rows)),
                                          radius=1.5)
    f = rng.uniform(-1.0, 1.0, size=(dy, dx))
    g = rng.uniform(-0.5, 0.5, size=dy)
    c_mat, d_vec = offset_poly.a, offset_poly.b
    a_rel = np.hstack([-c_mat @ f, c_mat])
    b_rel = d_vec + c_mat @ g
    relation = geo.polytope(a_rel, b_rel)
    m = ConditionalMap(VariableSignature("x", dx), VariableSignature("y", dy), relation)
    return ux, m


def interval_relation(weights, center, radius):
    """1-D conditional: x_child - sum(w_i x_pa_i) within [center - r, center + r]."""
    k = len(weights)
    a = np.zeros((2, k + 1))
    a[0, :k] = -np.asarray(weights, dtype=float)
    a[0, k] = 1.0
    a[1] = -a[0]
    return geo.polytope(a, [center + radius, radius - center])


def random_interval_network(rng, max_nodes=5, edge_prob=0.4):
    """Random DAG with 1-D nodes, interval root factors, affine-offset
    interval conditionals (always definite, polytopic, bounded joint)."""
    n = int(rng.integers(2, max_nodes + 1))
    nodes = list(range(1, n + 1))
    edges = [(i, j) for i in nodes for j in nodes
             if i < j and rng.random() < edge_prob]
    dag = Dag(nodes, edges)
    variables = {i: VariableSignature(f"x{i}", 1) for i in nodes}
    factors = {}
    for i in nodes:
        parents = dag.parents(i)
        if not parents:
            lo = rng.uniform(-1.5, 0.0)
            factors[i] = geo.interval(lo, lo + rng.uniform(0.5, 2.0))
        else:
            weights = rng.uniform(-1.0, 1.0, size=len(parents))
            rel = interval_relation(weights, rng.uniform(-0.5, 0.5),
                                    rng.uniform(0.2, 1.0))
            given = VariableSignature(f"pa{i}", len(parents))
            factors[i] = ConditionalMap(given, variables[i], rel)
    return UncertaintyNetwork(dag, variables, factors, check_definite=False)


def random_dag(rng, n, edge_prob=0.4):
    nodes = list(range(1, n + 1))
    edges = [(i, j) for i in nodes for j in nodes if i < j and rng.random() < edge_prob]
    return Dag(nodes, edges)


def abs_relation(bound, dim=1):
    """Relation |y - x| <= bound componentwise over (x, y)."""
    eye = np.eye(dim)
    a = np.vstack([np.hstack([-eye, eye]), np.hstack([eye, -eye])])
    return geo.polytope(a, np.full(2 * dim, float(bound)))
