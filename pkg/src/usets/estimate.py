"""Point estimation over uncertainty networks.

The point estimate minimizes the sum of per-factor scaling variables: each
factor's right-hand side is stretched by its own beta >= 0 until all scaled
constraints admit a common point consistent with the evidence.  Factors whose
constraints already hold can shrink (beta < 1); outlying evidence forces its
factor to grow.  The program is
``min sum_i beta_i  s.t.  A_i z_i <= beta_i h_i + A_i zbar_i,  x_J = y_J``.

Scaling a right-hand side only enlarges the set when it is strictly positive,
so the LP backend first re-centers every factor at its Chebyshev center
(``A (z - zbar) <= h`` with ``h > 0``); factors without an interior are
rejected.  This canonical normalization also makes the estimate invariant to
row rescaling and to how an off-center box is written.

For linear-Gaussian factors the scaled constraints bind at any optimum, the
scaling variables can be eliminated, and the program collapses to the
normal-equations least-squares problem whose solution is the MAP estimate of
the corresponding Bayesian network; the level parameter eta only scales the
objective, never the argmin.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import geometry as geo
from .core import ConditionalMap, VariableSignature
from .geometry import DimensionMismatchError, FullRegion, HPolytope, Region
from .network import Dag, UncertaintyNetwork, canonical_order, network_posterior

__all__ = [
    "EstimateStatus",
    "EstimateProblem",
    "EstimateResult",
    "GaussianFactor",
    "GaussianNetwork",
    "point_estimate_lp",
    "point_estimate_gaussian",
    "MapEquivalenceReport",
    "verify_map_equivalence",
    "posterior_set",
]


class EstimateStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE_EVIDENCE = "infeasible-evidence"
    UNBOUNDED = "unbounded"
    BACKEND_UNSUPPORTED = "backend-unsupported"


@dataclass(frozen=True, eq=False)
class GaussianFactor:
    """Linear-Gaussian factor ``x_i ~ N(F x_pa + c, cov)`` at level eta.

    Roots use an empty mean map (``F`` with zero columns).  The level enters
    the implied scaling variables but not the estimate itself.
    """

    mean_map: np.ndarray    # (d_i, d_pa); d_pa == 0 for roots
    offset: np.ndarray      # (d_i,)
    covariance: np.ndarray  # (d_i, d_i), SPD
    level: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.mean_map, dtype=float)
        if f.ndim != 2:
            raise ValueError("mean map must be a matrix (use shape (d, 0) for roots)")
        c = np.asarray(self.offset, dtype=float).reshape(-1)
        s = np.asarray(self.covariance, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("covariance must be square")
        if f.shape[0] != c.shape[0] or s.shape[0] != c.shape[0]:
            raise DimensionMismatchError("factor blocks disagree in dimension")
        if np.max(np.abs(s - s.T)) > 1e-12:
            raise ValueError("covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(s)) <= 0.0:
            raise ValueError("covariance must be positive definite (zero variance rejected)")
        if not (self.level > 0.0):
            raise ValueError("level must be positive")
        object.__setattr__(self, "mean_map", geo._freeze(f))
        object.__setattr__(self, "offset", geo._freeze(c))
        object.__setattr__(self, "covariance", geo._freeze(s))
        object.__setattr__(self, "level", float(self.level))

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    def neg_log_density(self, x_i, x_pa) -> float:
        r = np.asarray(x_i, dtype=float) - self.mean_map @ np.asarray(x_pa, dtype=float) - self.offset
        quad = 0.5 * float(r @ np.linalg.solve(self.covariance, r))
        norm = 0.5 * (self.dim * math.log(2.0 * math.pi)
                      + math.log(float(np.linalg.det(self.covariance))))
        return quad + norm


@dataclass(frozen=True, eq=False)
class GaussianNetwork:
    """A DAG whose factors are linear-Gaussian (or None for a flat root prior)."""

    dag: Dag
    variables: Mapping[int, VariableSignature]
    factors: Mapping[int, GaussianFactor | None]

    def __post_init__(self):
        object.__setattr__(self, "variables", dict(self.variables))
        object.__setattr__(self, "factors", dict(self.factors))
        if set(self.variables) != set(self.dag.nodes) or set(self.factors) != set(self.dag.nodes):
            raise ValueError("variables and factors must cover exactly the dag nodes")
        for i in self.dag.nodes:
            f = self.factors[i]
            if f is None:
                if self.dag.parents(i):
                    raise ValueError(f"node {i} has parents; only roots may be flat")
                continue
            pa_dim = sum(self.variables[p].dim for p in self.dag.parents(i))
            if f.dim != self.variables[i].dim or f.mean_map.shape[1] != pa_dim:
                raise DimensionMismatchError(f"gaussian factor of node {i} has wrong shape")


@dataclass(frozen=True, eq=False)
class EstimateProblem:
    """Evidence on J, query on I; I and J partition the nodes."""

    network: UncertaintyNetwork | GaussianNetwork
    evidence: Mapping[int, np.ndarray]
    query: frozenset[int]

    def __post_init__(self):
        evidence = {int(k): np.asarray(v, dtype=float).reshape(-1)
                    for k, v in self.evidence.items()}
        query = frozenset(int(i) for i in self.query)
        nodes = set(self.network.dag.nodes)
        if query & set(evidence):
            raise ValueError("query and evidence overlap")
        if query | set(evidence) != nodes:
            raise ValueError("query and evidence must partition the nodes")
        if not query:
            raise ValueError("query must be nonempty")
        for i, v in evidence.items():
            if v.shape[0] != self.network.variables[i].dim:
                raise DimensionMismatchError(f"evidence for node {i} has wrong dimension")
        object.__setattr__(self, "evidence", evidence)
        object.__setattr__(self, "query", query)


@dataclass(frozen=True, eq=False)
class EstimateResult:
    status: EstimateStatus
    x_hat: dict[int, np.ndarray]
    beta: dict[int, float]
    objective: float | None
    non_unique: bool | None = None
    message: str = ""


# ---------------------------------------------------------------------------
# LP backend
# ---------------------------------------------------------------------------


def _factor_rows(n: UncertaintyNetwork, i: int):
    """(A, b, local node blocks) of factor i over its (parents..., self) coords."""
    factor = n.factors[i]
    parents = list(n.dag.parents(i))
    if parents:
        region = factor.relation
        blocks = parents + [i]
    else:
        region = factor
        blocks = [i]
    if isinstance(region, FullRegion):
        dim = sum(n.variables[k].dim for k in blocks)
        return np.zeros((0, dim)), np.zeros(0), blocks
    if not isinstance(region, (geo.Box, HPolytope)):
        return None, None, blocks
    p = geo.as_polytope(region)
    return np.array(p.a), np.array(p.b), blocks


def _normalize_factor(a: np.ndarray, b: np.ndarray):
    """Chebyshev re-centering ``A (z - zbar) <= h`` with h > 0, or None.

    Rows that are trivially true (zero coefficients, nonnegative bound) are
    dropped first.  A factor without interior cannot be scaled and is
    rejected.
    """
    trimmed = geo._drop_trivial_rows(a, b)
    if trimmed is None:
        return None
    a, b = trimmed
    if a.shape[0] == 0:
        return a, b, np.zeros(a.shape[1])
    center, radius = geo.chebyshev_center(HPolytope(a, b))
    if center is None or radius <= 1e-9:
        return None
    h = b - a @ center
    if np.any(h <= 0.0):
        return None
    return a, h, center


def point_estimate_lp(p: EstimateProblem) -> EstimateResult:
    """Scaling-variable point estimate for polytopic factors.

    One scaling variable per node.  The LP is always feasible (every beta can
    grow), and bounded below since the objective is a sum of nonnegative
    scalings, so the generic status is OPTIMAL.  The reported optimizer is
    one simplex vertex; when the optimal face is larger the result is flagged
    ``non_unique`` (detected by re-solving with lexicographic objectives).
    """
    n = p.network
    if isinstance(n, GaussianNetwork):
        return EstimateResult(EstimateStatus.BACKEND_UNSUPPORTED, {}, {}, None,
                              message="lp backend needs polytopic factors")
    nodes = canonical_order(n.dag)

    normalized = {}
    for i in nodes:
        a, b, blocks = _factor_rows(n, i)
        if a is None:
            return EstimateResult(EstimateStatus.BACKEND_UNSUPPORTED, {}, {}, None,
                                  message=f"factor of node {i} is not polytopic")
        norm = _normalize_factor(a, b)
        if norm is None:
            return EstimateResult(EstimateStatus.BACKEND_UNSUPPORTED, {}, {}, None,
                                  message=f"factor of node {i} has no interior to scale")
        normalized[i] = (*norm, blocks)

    # Column layout: query-node coordinates first, then one beta per node.
    x_cols: dict[int, range] = {}
    start = 0
    for i in nodes:
        if i in p.query:
            d = n.variables[i].dim
            x_cols[i] = range(start, start + d)
            start += d
    n_x = start
    beta_col = {i: n_x + k for k, i in enumerate(nodes)}
    n_cols = n_x + len(nodes)

    rows, rhs = [], []
    for i in nodes:
        a, h, center, blocks = normalized[i]
        if a.shape[0] == 0:
            continue
        base = a @ center  # constant from re-centering
        col_offsets = np.cumsum([0] + [n.variables[k].dim for k in blocks])
        for r in range(a.shape[0]):
            row = np.zeros(n_cols)
            const = base[r]
            for k, node in enumerate(blocks):
                coefs = a[r, col_offsets[k]:col_offsets[k + 1]]
                if node in p.query:
                    row[list(x_cols[node])] += coefs
                else:
                    const -= float(coefs @ p.evidence[node])
            row[beta_col[i]] = -h[r]
            rows.append(row)
            rhs.append(const)
    for i in nodes:  # beta >= 0
        row = np.zeros(n_cols)
        row[beta_col[i]] = -1.0
        rows.append(row)
        rhs.append(0.0)

    a_lp = np.array(rows)
    b_lp = np.array(rhs)
    cost = np.zeros(n_cols)
    for i in nodes:
        cost[beta_col[i]] = 1.0

    status, z, value = geo._simplex(cost, a_lp, b_lp)
    if status is geo.LpStatus.INFEASIBLE:  # pragma: no cover - cannot happen
        return EstimateResult(EstimateStatus.INFEASIBLE_EVIDENCE, {}, {}, None)
    if status is geo.LpStatus.UNBOUNDED:  # pragma: no cover - objective >= 0
        return EstimateResult(EstimateStatus.UNBOUNDED, {}, {}, None)

    x_hat = {i: z[list(cols)].copy() for i, cols in x_cols.items()}
    beta = {i: max(0.0, float(z[beta_col[i]])) for i in nodes}
    objective = float(value)

    non_unique = _detect_alternative_optima(a_lp, b_lp, cost, n_x, objective, z)
    return EstimateResult(EstimateStatus.OPTIMAL, x_hat, beta, objective, non_unique)


def _detect_alternative_optima(a, b, cost, n_x, objective, z, tol=1e-6) -> bool:
    """Lexicographic min/max of each estimate coordinate over the optimal face."""
    if n_x == 0:
        return False
    a_opt = np.vstack([a, cost])
    b_opt = np.hstack([b, objective + 1e-9])
    for j in range(n_x):
        e = np.zeros(a.shape[1])
        e[j] = 1.0
        for sign in (1.0, -1.0):
            status, _, value = geo._simplex(sign * e, a_opt, b_opt)
            if status is geo.LpStatus.OPTIMAL and abs(sign * value - z[j]) > tol:
                return True
            if status is geo.LpStatus.UNBOUNDED:
                return True
    return False


# ---------------------------------------------------------------------------
# Gaussian backend (canonical factors)
# ---------------------------------------------------------------------------


def point_estimate_gaussian(p: EstimateProblem) -> EstimateResult:
    """Estimate for linear-Gaussian factors by eliminating the scalings.

    At any optimum the scaled constraints bind, so each scaling variable
    equals its factor's negative log density over the level; substituting
    them reduces the program to weighted linear least squares in the query
    coordinates, solved by normal equations (symmetric solve, singularity
    tolerance 1e-12).  A singular normal matrix means the query is not
    identifiable from the evidence.
    """
    n = p.network
    if not isinstance(n, GaussianNetwork):
        return EstimateResult(EstimateStatus.BACKEND_UNSUPPORTED, {}, {}, None,
                              message="gaussian backend needs GaussianFactor nodes")
    nodes = canonical_order(n.dag)

    x_cols: dict[int, range] = {}
    start = 0
    for i in nodes:
        if i in p.query:
            d = n.variables[i].dim
            x_cols[i] = range(start, start + d)
            start += d
    n_x = start

    blocks_m, blocks_r = [], []
    for i in nodes:
        f = n.factors[i]
        if f is None:
            continue
        d = f.dim
        weight = np.linalg.inv(np.linalg.cholesky(f.covariance))
        m = np.zeros((d, n_x))
        r = np.array(f.offset)
        if i in p.query:
            m[:, list(x_cols[i])] += np.eye(d)
        else:
            r -= p.evidence[i]
        col = 0
        for pa in n.dag.parents(i):
            dp = n.variables[pa].dim
            fpart = f.mean_map[:, col:col + dp]
            if pa in p.query:
                m[:, list(x_cols[pa])] -= fpart
            else:
                r += fpart @ p.evidence[pa]
            col += dp
        # residual(x_q) = m x_q - r; least squares targets +W r
        blocks_m.append(weight @ m)
        blocks_r.append(weight @ r)
    big_m = np.vstack(blocks_m) if blocks_m else np.zeros((0, n_x))
    big_r = np.hstack(blocks_r) if blocks_r else np.zeros(0)

    gram = big_m.T @ big_m
    if n_x == 0:
        return EstimateResult(EstimateStatus.BACKEND_UNSUPPORTED, {}, {}, None,
                              message="empty query")
    eig = np.linalg.eigvalsh(gram)
    if eig[-1] <= 0.0 or eig[0] < 1e-12 * eig[-1]:
        return EstimateResult(EstimateStatus.UNBOUNDED, {}, {}, None,
                              message="query is not identifiable from the evidence")
    sol = np.linalg.solve(gram, big_m.T @ big_r)

    x_hat = {i: sol[list(cols)].copy() for i, cols in x_cols.items()}

    def value_of(i: int) -> np.ndarray:
        return x_hat[i] if i in p.query else p.evidence[i]

    beta = {}
    for i in nodes:
        f = n.factors[i]
        if f is None:
            beta[i] = 0.0
            continue
        x_pa = (np.hstack([value_of(pa) for pa in n.dag.parents(i)])
                if n.dag.parents(i) else np.zeros(0))
        # Implied scaling: binding value of the negative log density over the
        # level, floored at zero to honor beta >= 0 (a density above one
        # leaves its constraint slack instead).
        beta[i] = max(0.0, f.neg_log_density(value_of(i), x_pa) / f.level)
    return EstimateResult(EstimateStatus.OPTIMAL, x_hat, beta,
                          float(sum(beta.values())), non_unique=False)


@dataclass(frozen=True)
class MapEquivalenceReport:
    max_abs_difference: float
    gradient_inf_norm: float
    passed: bool


def verify_map_equivalence(p: EstimateProblem,
                           density_logs: Mapping[int, Callable] | None = None,
                           tol: float = 1e-6) -> MapEquivalenceReport:
    """Cross-check the Gaussian estimate against a direct MAP maximization.

    The oracle maximizes the summed log densities over the query block using
    only the ``density_logs`` callables: for quadratics, one finite-difference
    Hessian/gradient at a base point determines the maximizer exactly.  Also
    reports the finite-difference gradient at the backend estimate, which
    must vanish at a true optimum.
    """
    n = p.network
    if not isinstance(n, GaussianNetwork):
        raise TypeError("verify_map_equivalence needs a Gaussian network")
    if density_logs is None:
        density_logs = {
            i: (lambda xi, xpa, _f=f: -_f.neg_log_density(xi, xpa))
            for i, f in n.factors.items() if f is not None
        }
    result = point_estimate_gaussian(p)
    if result.status is not EstimateStatus.OPTIMAL:
        return MapEquivalenceReport(math.inf, math.inf, False)

    nodes = canonical_order(n.dag)
    layout: dict[int, range] = {}
    start = 0
    for i in nodes:
        if i in p.query:
            layout[i] = range(start, start + n.variables[i].dim)
            start += n.variables[i].dim

    def objective(xq: np.ndarray) -> float:
        def value_of(i):
            return xq[list(layout[i])] if i in p.query else p.evidence[i]
        total = 0.0
        for i, logf in density_logs.items():
            x_pa = (np.hstack([value_of(pa) for pa in n.dag.parents(i)])
                    if n.dag.parents(i) else np.zeros(0))
            total += float(logf(value_of(i), x_pa))
        return total

    x0 = np.zeros(start)
    grad0, hess = _fd_quadratic(objective, x0)
    try:
        oracle = x0 - np.linalg.solve(hess, grad0)
    except np.linalg.LinAlgError:
        return MapEquivalenceReport(math.inf, math.inf, False)

    backend = np.zeros(start)
    for i, cols in layout.items():
        backend[list(cols)] = result.x_hat[i]
    diff = float(np.max(np.abs(backend - oracle))) if start else 0.0
    grad_at_hat, _ = _fd_quadratic(objective, backend, hessian=False)
    grad_norm = float(np.max(np.abs(grad_at_hat))) if start else 0.0
    return MapEquivalenceReport(diff, grad_norm, diff <= tol and grad_norm <= tol)


def _fd_quadratic(fn, x0: np.ndarray, step: float = 1e-4, hessian: bool = True):
    """Central-difference gradient (and Hessian) - exact for quadratics."""
    d = x0.shape[0]
    grad = np.zeros(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = step
        grad[i] = (fn(x0 + e) - fn(x0 - e)) / (2 * step)
    if not hessian:
        return grad, None
    hess = np.zeros((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = step
        for j in range(i, d):
            ej = np.zeros(d)
            ej[j] = step
            val = (fn(x0 + ei + ej) - fn(x0 + ei - ej)
                   - fn(x0 - ei + ej) + fn(x0 - ei - ej)) / (4 * step * step)
            hess[i, j] = hess[j, i] = val
    return grad, hess


def posterior_set(p: EstimateProblem) -> Region:
    """The conditioned-and-projected uncertainty set next to the point estimate.

    The set can be Empty while the point estimate still exists (the scalings
    enlarge factors past consistency); the caller decides what inconsistent
    evidence means for the application.
    """
    n = p.network
    if isinstance(n, GaussianNetwork):
        raise geo.UnsupportedRepresentationError(
            "posterior_set needs polytopic factors")
    canon = canonical_order(n.dag)
    query = [i for i in canon if i in p.query]
    return network_posterior(n, p.evidence, query)
