"""Independent oracles for the test suite.

Everything here is deliberately written against the math, not against the
package internals: brute-force vertex enumeration for LPs, grid scans and
feasibility probes for projections, simple-path enumeration for graph
separation, and textbook Gaussian conditioning.  The oracles stay independent
of the code paths they check.
"""

from __future__ import annotations

import itertools

import numpy as np


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


def lp_min_by_vertices(c, a, b, feas_tol=1e-7):
    """Minimum of c.x over {Ax <= b} by enumerating basic feasible points.

    Only valid for bounded polytopes.  Returns +inf when no basic point is
    feasible (empty set).
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    best = np.inf
    for rows in itertools.combinations(range(m), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(a @ v <= b + feas_tol):
            best = min(best, float(c @ v))
    return best


def polytope_vertices(a, b, feas_tol=1e-7):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    verts = []
    for rows in itertools.combinations(range(m), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(a @ v <= b + feas_tol):
            verts.append(v)
    return np.array(verts) if verts else np.zeros((0, n))


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------


def extension_exists(a, b, keep, point, solver, feas_tol=1e-9):
    """Feasibility of {Ax <= b, x[keep] = point} via the provided LP solver.

    The equality is encoded as two inequalities; any objective works, a zero
    objective probes pure feasibility.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[1]
    rows = [a]
    rhs = [b]
    for k, idx in enumerate(keep):
        e = np.zeros(n)
        e[idx] = 1.0
        rows.append(e[None, :])
        rhs.append(np.array([point[k] + feas_tol]))
        rows.append(-e[None, :])
        rhs.append(np.array([-point[k] + feas_tol]))
    status, _, _ = solver(np.zeros(n), np.vstack(rows), np.hstack(rhs))
    return status.value != "infeasible"


def grid_project_interval(a, b, axis, lo, hi, step):
    """1-D projection of {Ax <= b} onto ``axis`` by scanning a grid, for 2-D
    polytopes: returns (min, max) of feasible axis values or None."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    assert a.shape[1] == 2
    other = 1 - axis
    xs = np.arange(lo, hi + step, step)
    ys = np.arange(lo, hi + step, step)
    found = []
    for x in xs:
        pt = np.zeros(2)
        pt[axis] = x
        ok = False
        for y in ys:
            pt[other] = y
            if np.all(a @ pt <= b + 1e-9):
                ok = True
                break
        if ok:
            found.append(x)
    if not found:
        return None
    return min(found), max(found)


# ---------------------------------------------------------------------------
# Graph separation
# ---------------------------------------------------------------------------


def path_enumeration_d_separated(nodes, edges, a_set, b_set, c_set):
    """Ground-truth separation by enumerating all simple undirected paths.

    A path is blocked if some intermediate node is serial/diverging and
    observed, or converging with neither itself nor any descendant observed.
    """
    edges = set(edges)
    neighbors = {n: set() for n in nodes}
    children = {n: set() for n in nodes}
    for p, c in edges:
        neighbors[p].add(c)
        neighbors[c].add(p)
        children[p].add(c)

    def descendants(n):
        seen, stack = set(), [n]
        while stack:
            cur = stack.pop()
            for nxt in children[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    desc = {n: descendants(n) for n in nodes}

    def blocked(path):
        for k in range(1, len(path) - 1):
            prev, node, nxt = path[k - 1], path[k], path[k + 1]
            converging = (prev, node) in edges and (nxt, node) in edges
            if converging:
                if node not in c_set and not (desc[node] & c_set):
                    return True
            else:
                if node in c_set:
                    return True
        return False

    for start in a_set:
        stack = [(start, [start])]
        while stack:
            cur, path = stack.pop()
            for nxt in neighbors[cur]:
                if nxt in path:
                    continue
                new_path = path + [nxt]
                if nxt in b_set:
                    if not blocked(new_path):
                        return False
                    continue
                stack.append((nxt, new_path))
    return True


def all_dags(n):
    """Every labeled DAG on nodes 1..n (feasible for n <= 4)."""
    nodes = list(range(1, n + 1))
    pairs = [(i, j) for i in nodes for j in nodes if i != j]
    out = []
    for mask in range(2 ** len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if (mask >> k) & 1]
        if _acyclic(nodes, edges):
            out.append((nodes, edges))
    return out


def _acyclic(nodes, edges):
    children = {n: [] for n in nodes}
    indeg = {n: 0 for n in nodes}
    for p, c in edges:
        children[p].append(c)
        indeg[c] += 1
    queue = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while queue:
        n = queue.pop()
        seen += 1
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen == len(nodes)


# ---------------------------------------------------------------------------
# Gaussian conditioning
# ---------------------------------------------------------------------------


def gaussian_conditional_mean(dag_nodes, parents, dims, factors, evidence, query):
    """Posterior mean of the query block by joint-covariance conditioning.

    Builds the joint mean/covariance of the linear-Gaussian network through
    the noise representation x = (I - L)^{-1} (c + eps) and applies the
    textbook conditional-mean formula.  Requires proper (non-flat) priors.
    ``factors[i]`` is (F_i, c_i, Sigma_i) with parent blocks ascending.
    """
    order = dag_nodes  # assumed topological with parents ascending
    offsets = {}
    start = 0
    for i in order:
        offsets[i] = start
        start += dims[i]
    total = start
    big_l = np.zeros((total, total))
    c_vec = np.zeros(total)
    noise_cov = np.zeros((total, total))
    for i in order:
        f, c, s = factors[i]
        rows = slice(offsets[i], offsets[i] + dims[i])
        col = 0
        for p in parents[i]:
            cols = slice(offsets[p], offsets[p] + dims[p])
            big_l[rows, cols] = f[:, col:col + dims[p]]
            col += dims[p]
        c_vec[rows] = c
        noise_cov[rows, rows] = s
    inv = np.linalg.inv(np.eye(total) - big_l)
    mean = inv @ c_vec
    cov = inv @ noise_cov @ inv.T

    q_idx = [k for i in query for k in range(offsets[i], offsets[i] + dims[i])]
    j_idx = [k for i in evidence for k in range(offsets[i], offsets[i] + dims[i])]
    y = np.hstack([np.asarray(evidence[i], dtype=float) for i in evidence])
    cqq = cov[np.ix_(q_idx, j_idx)]
    cjj = cov[np.ix_(j_idx, j_idx)]
    return mean[q_idx] + cqq @ np.linalg.solve(cjj, y - mean[j_idx])


def conjugate_posterior_mean(prior_mean, prior_var, obs, obs_var):
    """Textbook 1-D conjugate update for y ~ N(x, obs_var), prior N(m, v)."""
    precision = 1.0 / prior_var + 1.0 / obs_var
    return (prior_mean / prior_var + obs / obs_var) / precision


# ---------------------------------------------------------------------------
# Interval filtering (1-D set-membership reference)
# ---------------------------------------------------------------------------


def interval_filter(prior, motion, noise, measurements):
    """Reference recursion with interval arithmetic.

    prior = (lo, hi); |x_t - x_{t-1}| <= motion; |y_t - x_t| <= noise.
    Returns the list of per-step intervals or None entries when empty.
    """
    lo, hi = prior
    out = []
    for y in measurements:
        lo, hi = lo - motion, hi + motion
        lo, hi = max(lo, y - noise), min(hi, y + noise)
        if lo > hi + 1e-12:
            out.append(None)
            lo, hi = np.inf, -np.inf
        else:
            out.append((lo, hi))
    return out
