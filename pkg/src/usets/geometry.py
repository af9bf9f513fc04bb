"""Region representations and the exact set-operation kernel.

A *region* is a subset of R^n given either exactly (box, H-polytope, finite
union of H-polytopes, ellipsoid) or through a membership oracle with a
bounding box.  Every higher-level object in this package (uncertainty sets,
conditional relations, network factors, filter states) is a region, and every
law implemented upstream reduces to the operations in this module:
membership, emptiness, projection, intersection, product, coordinate slicing,
support values, inclusion, and a dense two-phase simplex.

Conventions
-----------
* All geometry is double precision.  A single feasibility tolerance
  ``EPS_FEAS = 1e-9`` governs membership and inclusion: a point satisfies a
  row ``a . x <= b`` if ``a . x <= b + EPS_FEAS``.  Set equality is double
  inclusion under that tolerance.
* Regions are immutable after construction (frozen dataclasses holding
  read-only numpy arrays) and safe to share across threads.  All operations
  are pure; sampled checks take an explicit seed.
* Exact H-polytope projection uses Fourier-Motzkin elimination.  Blowup is
  mild for the desk-scale problems here (<= ~6 eliminated coordinates);
  beyond that it is a documented limitation, not a solved problem.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

EPS_FEAS = 1e-9
PIVOT_TOL = 1e-10
ORACLE_SAMPLES = 100_000

__all__ = [
    "EPS_FEAS",
    "PIVOT_TOL",
    "ORACLE_SAMPLES",
    "Verdict",
    "DimensionMismatchError",
    "UnsupportedRepresentationError",
    "Region",
    "Box",
    "HPolytope",
    "UnionOfPolytopes",
    "Ellipsoid",
    "MembershipOracle",
    "EmptyRegion",
    "FullRegion",
    "union_of",
    "box",
    "interval",
    "polytope",
    "LpProblem",
    "LpStatus",
    "LpResult",
    "solve_lp",
    "contains",
    "is_empty",
    "project",
    "intersect",
    "product",
    "slice_region",
    "linear_max",
    "is_subset",
    "regions_equal",
    "bounding_box",
    "as_polytope",
    "chebyshev_center",
    "sample_region",
    "enumerate_vertices",
    "support_values",
]


class DimensionMismatchError(ValueError):
    """Operands live in ambient spaces of different dimension."""


class UnsupportedRepresentationError(TypeError):
    """The requested operation has no implementation for this representation."""


class Verdict(enum.Enum):
    """Tri-state answer for set-level predicates.

    ``TRUE`` and ``FALSE`` are certain (exact path).  ``SAMPLED_TRUE`` means
    every spot check passed but the check was sampled, so it is evidence, not
    proof.  A ``FALSE`` from a sampled path is still certain: it comes with a
    witness point.
    """

    TRUE = "true"
    FALSE = "false"
    SAMPLED_TRUE = "sampled-true"

    @property
    def holds(self) -> bool:
        return self is not Verdict.FALSE

    @property
    def exact(self) -> bool:
        return self is not Verdict.SAMPLED_TRUE

    def both(self, other: "Verdict") -> "Verdict":
        """Conjunction: FALSE dominates, any sampling taints TRUE."""
        if self is Verdict.FALSE or other is Verdict.FALSE:
            return Verdict.FALSE
        if self is Verdict.SAMPLED_TRUE or other is Verdict.SAMPLED_TRUE:
            return Verdict.SAMPLED_TRUE
        return Verdict.TRUE

    @staticmethod
    def from_bool(value: bool) -> "Verdict":
        return Verdict.TRUE if value else Verdict.FALSE

    @staticmethod
    def all(verdicts) -> "Verdict":
        out = Verdict.TRUE
        for v in verdicts:
            out = out.both(v)
            if out is Verdict.FALSE:
                return out
        return out


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"expected a vector of length {dim}, got {v.shape[0]}")
    return v


# ---------------------------------------------------------------------------
# Region representations
# ---------------------------------------------------------------------------


class Region:
    """Base class for all region representations."""

    @property
    def dim(self) -> int:  # pragma: no cover - overridden
        raise NotImplementedError

    def contains(self, x) -> bool:
        return contains(self, x)


@dataclass(frozen=True, eq=False)
class Box(Region):
    """Axis-aligned box; bounds may be +/-inf.  Never empty by construction."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _freeze(_vector(self.lower))
        hi = _freeze(_vector(self.upper))
        if lo.shape != hi.shape:
            raise DimensionMismatchError("box bounds differ in length")
        if lo.shape[0] < 1:
            raise ValueError("box dimension must be at least 1")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound; use EmptyRegion")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True, eq=False)
class HPolytope(Region):
    """``{x | A x <= b}``.  Zero-coefficient rows are allowed only if trivially true."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 2:
            raise ValueError("constraint matrix must be two-dimensional")
        b = _vector(self.b)
        if a.shape[0] != b.shape[0]:
            raise DimensionMismatchError("row count of A and length of b differ")
        if a.shape[1] < 1:
            raise ValueError("polytope dimension must be at least 1")
        if np.any(~np.isfinite(a)) or np.any(np.isnan(b)):
            raise ValueError("constraint data must be finite")
        zero_rows = np.all(np.abs(a) <= 0.0, axis=1)
        if np.any(zero_rows & (b < 0.0)):
            raise ValueError("zero row with negative bound encodes emptiness; use EmptyRegion")
        object.__setattr__(self, "a", _freeze(a))
        object.__setattr__(self, "b", _freeze(b))

    @property
    def dim(self) -> int:
        return self.a.shape[1]

    @property
    def nrows(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class UnionOfPolytopes(Region):
    """Finite union, kept as a flat tuple of H-polytopes of equal dimension."""

    pieces: tuple[HPolytope, ...]

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("empty union; use EmptyRegion")
        d = pieces[0].dim
        for p in pieces:
            if not isinstance(p, HPolytope):
                raise TypeError("union pieces must be HPolytope")
            if p.dim != d:
                raise DimensionMismatchError("union pieces differ in dimension")
        object.__setattr__(self, "pieces", pieces)

    @property
    def dim(self) -> int:
        return self.pieces[0].dim


@dataclass(frozen=True, eq=False)
class Ellipsoid(Region):
    """``{x | (x - center)^T Q^{-1} (x - center) <= level}`` with Q SPD."""

    center: np.ndarray
    shape: np.ndarray
    level: float

    def __post_init__(self):
        c = _freeze(_vector(self.center))
        q = np.asarray(self.shape, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("shape matrix must be square")
        if q.shape[0] != c.shape[0]:
            raise DimensionMismatchError("center and shape matrix sizes differ")
        if np.max(np.abs(q - q.T)) > 1e-12:
            raise ValueError("shape matrix must be symmetric within 1e-12")
        if np.min(np.linalg.eigvalsh(q)) <= 0.0:
            raise ValueError("shape matrix must be positive definite")
        if not (self.level > 0.0):
            raise ValueError("level must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", _freeze(q))
        object.__setattr__(self, "level", float(self.level))

    @property
    def dim(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True, eq=False)
class MembershipOracle(Region):
    """Predicate-defined region with a bounding box for sampled queries."""

    predicate: Callable[[np.ndarray], bool]
    bounds: Box

    @property
    def dim(self) -> int:
        return self.bounds.dim


@dataclass(frozen=True, eq=False)
class EmptyRegion(Region):
    """The empty subset of R^n."""

    _dim: int

    def __post_init__(self):
        if self._dim < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def dim(self) -> int:
        return self._dim


@dataclass(frozen=True, eq=False)
class FullRegion(Region):
    """All of R^n."""

    _dim: int

    def __post_init__(self):
        if self._dim < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def dim(self) -> int:
        return self._dim


def box(lower, upper) -> Box:
    return Box(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))


def interval(lo: float, hi: float) -> Box:
    return Box(np.array([lo]), np.array([hi]))


def polytope(a, b) -> HPolytope:
    return HPolytope(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def union_of(pieces: Sequence[Region]) -> Region:
    """Flatten mixed exact pieces into EmptyRegion / HPolytope / UnionOfPolytopes."""
    flat: list[HPolytope] = []
    dim = None
    for p in pieces:
        if dim is None:
            dim = p.dim
        elif p.dim != dim:
            raise DimensionMismatchError("union pieces differ in dimension")
        if isinstance(p, EmptyRegion):
            continue
        if isinstance(p, UnionOfPolytopes):
            flat.extend(p.pieces)
        else:
            flat.append(as_polytope(p))
    if dim is None:
        raise ValueError("union_of needs at least one region to fix the dimension")
    if not flat:
        return EmptyRegion(dim)
    if len(flat) == 1:
        return flat[0]
    return UnionOfPolytopes(tuple(flat))


def as_polytope(r: Region) -> HPolytope:
    """Convert box / full / polytope to H-representation (finite rows only)."""
    if isinstance(r, HPolytope):
        return r
    if isinstance(r, Box):
        rows = []
        rhs = []
        n = r.dim
        for i in range(n):
            if np.isfinite(r.upper[i]):
                e = np.zeros(n)
                e[i] = 1.0
                rows.append(e)
                rhs.append(r.upper[i])
            if np.isfinite(r.lower[i]):
                e = np.zeros(n)
                e[i] = -1.0
                rows.append(e)
                rhs.append(-r.lower[i])
        if not rows:
            return HPolytope(np.zeros((0, n)), np.zeros(0))
        return HPolytope(np.array(rows), np.array(rhs))
    if isinstance(r, FullRegion):
        return HPolytope(np.zeros((0, r.dim)), np.zeros(0))
    raise UnsupportedRepresentationError(f"cannot convert {type(r).__name__} to H-representation")


# ---------------------------------------------------------------------------
# Linear programming: dense two-phase simplex with Bland's rule
# ---------------------------------------------------------------------------


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Minimize ``objective . x`` subject to ``constraints``; x is free."""

    objective: np.ndarray
    constraints: HPolytope

    def __post_init__(self):
        c = _freeze(_vector(self.objective))
        if c.shape[0] != self.constraints.dim:
            raise DimensionMismatchError("objective length differs from constraint dimension")
        object.__setattr__(self, "objective", c)


@dataclass(frozen=True, eq=False)
class LpResult:
    status: LpStatus
    x: np.ndarray | None
    value: float | None


def solve_lp(problem: LpProblem) -> LpResult:
    """Two-phase dense simplex under Bland's rule (anti-cycling).

    Free variables are split internally; the reported optimum is one vertex of
    the lifted standard-form polytope, so ties return an arbitrary but
    deterministic optimal vertex.
    """
    status, x, value = _simplex(problem.objective, problem.constraints.a, problem.constraints.b)
    return LpResult(status, x, value)


def _simplex(c, a, b, maxiter: int = 20000):
    """minimize c.x s.t. a x <= b, x free.  Returns (status, x, value)."""
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape

    if m == 0:
        if np.all(np.abs(c) <= PIVOT_TOL):
            return LpStatus.OPTIMAL, np.zeros(n), 0.0
        return LpStatus.UNBOUNDED, None, None

    # Standard form: x = u - v, slack s: [A, -A, S] z = b', z >= 0.
    # Rows with negative b are negated; their slack carries coefficient -1 and
    # needs an artificial variable to complete the starting basis.
    neg = b < 0.0
    sign = np.where(neg, -1.0, 1.0)
    d = np.hstack([a * sign[:, None], -a * sign[:, None], np.diag(sign)])
    rhs = b * sign
    n_struct = 2 * n + m

    art_rows = np.where(neg)[0]
    n_art = art_rows.size
    if n_art:
        art_block = np.zeros((m, n_art))
        for k, i in enumerate(art_rows):
            art_block[i, k] = 1.0
        tableau = np.hstack([d, art_block, rhs[:, None]])
    else:
        tableau = np.hstack([d, rhs[:, None]])

    basis = np.empty(m, dtype=int)
    art_of_row = {int(i): n_struct + k for k, i in enumerate(art_rows)}
    for i in range(m):
        basis[i] = art_of_row.get(i, 2 * n + i)

    ncols = tableau.shape[1] - 1

    def run(cost, allowed_cols, iter_budget):
        """Bland simplex on the current tableau; returns False on iteration cap."""
        for _ in range(iter_budget):
            # reduced costs: cost - cost_B . tableau rows
            red = cost.copy()
            cb = cost[basis]
            nz = np.abs(cb) > 0.0
            if np.any(nz):
                red -= cb[nz] @ tableau[nz, :-1]
            entering = -1
            for j in range(ncols):
                if allowed_cols[j] and red[j] < -PIVOT_TOL and j not in basis_set:
                    entering = j
                    break
            if entering < 0:
                return True
            col = tableau[:, entering]
            pos = col > PIVOT_TOL
            if not np.any(pos):
                return None  # unbounded
            ratios = np.full(m, np.inf)
            ratios[pos] = tableau[pos, -1] / col[pos]
            best = np.min(ratios)
            # Bland: among tied rows pick the one whose basic variable index
            # is smallest.
            tied = np.where(ratios <= best + 1e-12)[0]
            leave = tied[np.argmin(basis[tied])]
            _pivot(tableau, basis, basis_set, leave, entering)
        raise RuntimeError("simplex iteration limit exceeded")

    basis_set = set(int(v) for v in basis)

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n_struct:] = 1.0
        ok = run(cost1, np.ones(ncols, dtype=bool), maxiter)
        if ok is None:  # pragma: no cover - phase 1 objective is bounded below
            return LpStatus.INFEASIBLE, None, None
        phase1 = float(cost1[basis] @ tableau[:, -1])
        if phase1 > 1e-8:
            return LpStatus.INFEASIBLE, None, None
        # Drive leftover artificials out of the basis; rows with no usable
        # pivot are redundant and harmless (artificial stays basic at zero but
        # is barred from re-entering).
        for i in range(m):
            if basis[i] >= n_struct:
                row = tableau[i, :n_struct]
                cand = np.where(np.abs(row) > PIVOT_TOL)[0]
                cand = [j for j in cand if j not in basis_set]
                if cand:
                    _pivot(tableau, basis, basis_set, i, int(cand[0]))

    cost2 = np.zeros(ncols)
    cost2[:n] = c
    cost2[n:2 * n] = -c
    allowed = np.ones(ncols, dtype=bool)
    allowed[n_struct:] = False
    ok = run(cost2, allowed, maxiter)
    if ok is None:
        return LpStatus.UNBOUNDED, None, None

    z = np.zeros(ncols)
    z[basis] = tableau[:, -1]
    x = z[:n] - z[n:2 * n]
    return LpStatus.OPTIMAL, x, float(c @ x)


def _pivot(tableau, basis, basis_set, row: int, col: int):
    piv = tableau[row, col]
    tableau[row, :] /= piv
    colvals = tableau[:, col].copy()
    colvals[row] = 0.0
    tableau -= np.outer(colvals, tableau[row, :])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis_set.discard(int(basis[row]))
    basis[row] = col
    basis_set.add(int(col))


def _poly_feasible(p: HPolytope) -> bool:
    status, _, _ = _simplex(np.zeros(p.dim), p.a, p.b)
    return status is not LpStatus.INFEASIBLE


# ---------------------------------------------------------------------------
# Elementary predicates
# ---------------------------------------------------------------------------


def contains(r: Region, x) -> bool:
    """Membership with feasibility tolerance EPS_FEAS on every inequality."""
    v = _vector(x, r.dim)
    if isinstance(r, EmptyRegion):
        return False
    if isinstance(r, FullRegion):
        return True
    if isinstance(r, Box):
        return bool(np.all(v >= r.lower - EPS_FEAS) and np.all(v <= r.upper + EPS_FEAS))
    if isinstance(r, HPolytope):
        if r.nrows == 0:
            return True
        return bool(np.all(r.a @ v <= r.b + EPS_FEAS))
    if isinstance(r, UnionOfPolytopes):
        return any(contains(p, v) for p in r.pieces)
    if isinstance(r, Ellipsoid):
        diff = v - r.center
        val = float(diff @ np.linalg.solve(r.shape, diff))
        return val <= r.level + EPS_FEAS
    if isinstance(r, MembershipOracle):
        return bool(r.predicate(v))
    raise UnsupportedRepresentationError(type(r).__name__)


def is_empty(r: Region, seed: int = 0) -> Verdict:
    """Emptiness; oracle regions are decided by rejection sampling.

    Oracle path: ORACLE_SAMPLES draws over the bounding box; all misses give
    SAMPLED_TRUE ("probably empty").
    """
    if isinstance(r, EmptyRegion):
        return Verdict.TRUE
    if isinstance(r, (FullRegion, Box, Ellipsoid)):
        return Verdict.FALSE
    if isinstance(r, HPolytope):
        return Verdict.from_bool(not _poly_feasible(r))
    if isinstance(r, UnionOfPolytopes):
        return Verdict.all(is_empty(p) for p in r.pieces)
    if isinstance(r, MembershipOracle):
        rng = np.random.default_rng(seed)
        pts = _box_samples(r.bounds, ORACLE_SAMPLES, rng)
        for p in pts:
            if r.predicate(p):
                return Verdict.FALSE
        return Verdict.SAMPLED_TRUE
    raise UnsupportedRepresentationError(type(r).__name__)


def _box_samples(b: Box, n: int, rng) -> np.ndarray:
    if not (np.all(np.isfinite(b.lower)) and np.all(np.isfinite(b.upper))):
        raise UnsupportedRepresentationError("cannot sample an unbounded box")
    return rng.uniform(b.lower, b.upper, size=(n, b.dim))


# ---------------------------------------------------------------------------
# Support values and inclusion
# ---------------------------------------------------------------------------


def linear_max(r: Region, c) -> float:
    """Supremum of ``c . x`` over r.

    Returns ``+inf`` when unbounded in direction c and ``-inf`` for an empty
    region (the empty supremum), which is unambiguous because any point gives
    a finite value.  Oracle regions are unsupported.
    """
    v = _vector(c, r.dim)
    if isinstance(r, EmptyRegion):
        return -math.inf
    if isinstance(r, FullRegion):
        return 0.0 if np.all(np.abs(v) <= 0.0) else math.inf
    if isinstance(r, Box):
        terms = np.where(v > 0.0, v * r.upper, np.where(v < 0.0, v * r.lower, 0.0))
        return float(np.sum(terms))
    if isinstance(r, HPolytope):
        status, _, value = _simplex(-v, r.a, r.b)
        if status is LpStatus.INFEASIBLE:
            return -math.inf
        if status is LpStatus.UNBOUNDED:
            return math.inf
        return -value
    if isinstance(r, UnionOfPolytopes):
        return max(linear_max(p, v) for p in r.pieces)
    if isinstance(r, Ellipsoid):
        return float(v @ r.center) + math.sqrt(max(0.0, r.level * float(v @ r.shape @ v)))
    raise UnsupportedRepresentationError(
        f"linear_max is unsupported for {type(r).__name__}")


def is_subset(r1: Region, r2: Region, seed: int = 0) -> Verdict:
    """``r1 subseteq r2``.

    Exact path when r2 is a box or a single polytope (and r1 supports support
    values): for every row (a, beta) of r2, ``linear_max(r1, a) <= beta +
    EPS_FEAS``.  Otherwise sampled: points of r1 drawn from its bounding box
    must all lie in r2; a miss is a certain FALSE, full agreement is
    "probably subset" (SAMPLED_TRUE).
    """
    if r1.dim != r2.dim:
        raise DimensionMismatchError("is_subset operands differ in dimension")
    if isinstance(r1, EmptyRegion) or isinstance(r2, FullRegion):
        return Verdict.TRUE
    if isinstance(r2, EmptyRegion):
        return is_empty(r1, seed=seed)

    exact_r2 = isinstance(r2, (Box, HPolytope))
    exact_r1 = isinstance(r1, (Box, HPolytope, UnionOfPolytopes, Ellipsoid, FullRegion))
    if exact_r2 and exact_r1:
        p2 = as_polytope(r2)
        for i in range(p2.nrows):
            if linear_max(r1, p2.a[i]) > p2.b[i] + EPS_FEAS:
                return Verdict.FALSE
        return Verdict.TRUE

    # Sampled path.
    rng = np.random.default_rng(seed)
    pts = sample_region(r1, 2000, rng=rng)
    checked = 0
    for p in pts:
        if not contains(r1, p):  # oracle pieces may reject bounding-box draws
            continue
        checked += 1
        if not contains(r2, p):
            return Verdict.FALSE
    if checked == 0:
        return Verdict.SAMPLED_TRUE  # probably empty, hence probably subset
    return Verdict.SAMPLED_TRUE


def regions_equal(r1: Region, r2: Region, seed: int = 0) -> Verdict:
    """Double inclusion under EPS_FEAS; tri-state if either direction sampled."""
    return is_subset(r1, r2, seed=seed).both(is_subset(r2, r1, seed=seed))


# ---------------------------------------------------------------------------
# Projection (Fourier-Motzkin), intersection, product, slicing
# ---------------------------------------------------------------------------


def project(r: Region, keep: Sequence[int]) -> Region:
    """Project onto the coordinates in ``keep`` (result follows keep's order).

    H-polytopes are projected exactly by Fourier-Motzkin elimination, one
    coordinate at a time (greedy order: fewest new rows first), with
    LP-backed redundancy removal after every step.  Boxes select coordinates,
    unions project piecewise, ellipsoids project to the ellipsoid of the
    corresponding shape submatrix (Schur complement of the inverse).
    """
    keep = [int(k) for k in keep]
    if len(keep) == 0:
        raise ValueError("keep must be nonempty")
    if len(set(keep)) != len(keep):
        raise ValueError("keep has duplicate indices")
    for k in keep:
        if k < 0 or k >= r.dim:
            raise IndexError(f"keep index {k} out of range for dimension {r.dim}")

    if len(keep) == r.dim:
        return _permute(r, keep)

    if isinstance(r, EmptyRegion):
        return EmptyRegion(len(keep))
    if isinstance(r, FullRegion):
        return FullRegion(len(keep))
    if isinstance(r, Box):
        return Box(r.lower[keep], r.upper[keep])
    if isinstance(r, HPolytope):
        return _project_polytope(r, keep)
    if isinstance(r, UnionOfPolytopes):
        return union_of([_project_polytope(p, keep) for p in r.pieces])
    if isinstance(r, Ellipsoid):
        idx = np.array(keep)
        return Ellipsoid(r.center[idx], r.shape[np.ix_(idx, idx)], r.level)
    raise UnsupportedRepresentationError(
        f"project is unsupported for {type(r).__name__}")


def _permute(r: Region, order: Sequence[int]) -> Region:
    """Pure coordinate permutation; supported by every representation."""
    idx = np.array(order, dtype=int)
    if isinstance(r, EmptyRegion) or isinstance(r, FullRegion):
        return r
    if isinstance(r, Box):
        return Box(r.lower[idx], r.upper[idx])
    if isinstance(r, HPolytope):
        return HPolytope(r.a[:, idx], r.b)
    if isinstance(r, UnionOfPolytopes):
        return UnionOfPolytopes(tuple(HPolytope(p.a[:, idx], p.b) for p in r.pieces))
    if isinstance(r, Ellipsoid):
        return Ellipsoid(r.center[idx], r.shape[np.ix_(idx, idx)], r.level)
    if isinstance(r, MembershipOracle):
        inverse = np.empty_like(idx)
        inverse[idx] = np.arange(idx.size)
        pred = r.predicate

        def permuted(y, _pred=pred, _inv=inverse):
            return _pred(np.asarray(y)[_inv])

        return MembershipOracle(permuted, Box(r.bounds.lower[idx], r.bounds.upper[idx]))
    raise UnsupportedRepresentationError(type(r).__name__)


def _normalize_rows(a: np.ndarray, b: np.ndarray):
    norms = np.linalg.norm(a, axis=1)
    scale = np.where(norms > 0.0, norms, np.maximum(np.abs(b), 1.0))
    return a / scale[:, None], b / scale


def _dedupe_rows(a: np.ndarray, b: np.ndarray):
    if a.shape[0] <= 1:
        return a, b
    stacked = np.round(np.hstack([a, b[:, None]]), 12)
    _, idx = np.unique(stacked, axis=0, return_index=True)
    idx = np.sort(idx)
    return a[idx], b[idx]


def _drop_trivial_rows(a: np.ndarray, b: np.ndarray):
    """Remove ~zero rows; a zero row with b < -EPS_FEAS signals emptiness."""
    zero = np.all(np.abs(a) <= 1e-13, axis=1)
    if np.any(zero & (b < -EPS_FEAS)):
        return None
    keep = ~zero
    return a[keep], b[keep]


def _remove_redundant_rows(a: np.ndarray, b: np.ndarray):
    """Drop rows whose LP max over the remaining rows stays within bound."""
    active = list(range(a.shape[0]))
    i = 0
    while i < len(active):
        row = active[i]
        rest = active[:i] + active[i + 1:]
        if not rest:
            break
        status, _, value = _simplex(-a[row], a[rest], b[rest])
        if status is LpStatus.OPTIMAL and -value <= b[row] + EPS_FEAS:
            active.pop(i)
        else:
            i += 1
    return a[active], b[active]


def _fm_step(a: np.ndarray, b: np.ndarray, col: int):
    """Eliminate one column; returns (a', b') with that column removed."""
    coef = a[:, col]
    pos = coef > 1e-13
    neg = coef < -1e-13
    zero = ~(pos | neg)
    others = [j for j in range(a.shape[1]) if j != col]

    rows = [np.hstack([a[zero][:, others], b[zero][:, None]])]
    if np.any(pos) and np.any(neg):
        ap, bp, cp = a[pos][:, others], b[pos], coef[pos]
        an, bn, cn = a[neg][:, others], b[neg], coef[neg]
        # row_p / c_p + row_n / (-c_n), pairwise: eliminated coefficient cancels
        ap = ap / cp[:, None]
        bp = bp / cp
        an = an / (-cn)[:, None]
        bn = bn / (-cn)
        comb_a = ap[:, None, :] + an[None, :, :]
        comb_b = bp[:, None] + bn[None, :]
        rows.append(np.hstack([comb_a.reshape(-1, len(others)), comb_b.reshape(-1, 1)]))
    stacked = np.vstack(rows)
    return stacked[:, :-1], stacked[:, -1]


def _project_polytope(p: HPolytope, keep: Sequence[int]) -> Region:
    if not _poly_feasible(p):
        return EmptyRegion(len(keep))
    a, b = np.array(p.a), np.array(p.b)
    cols = list(range(p.dim))
    drop = [c for c in cols if c not in keep]

    while drop:
        # Greedy: eliminate the column creating the fewest product rows.
        def new_rows(c):
            j = cols.index(c)
            coef = a[:, j]
            return int(np.sum(coef > 1e-13)) * int(np.sum(coef < -1e-13))

        target = min(drop, key=new_rows)
        a, b = _fm_step(a, b, cols.index(target))
        cols.remove(target)
        drop.remove(target)
        trimmed = _drop_trivial_rows(a, b)
        if trimmed is None:
            return EmptyRegion(len(keep))
        a, b = trimmed
        a, b = _normalize_rows(a, b)
        a, b = _dedupe_rows(a, b)
        a, b = _remove_redundant_rows(a, b)

    order = [cols.index(k) for k in keep]
    if a.shape[0] == 0:
        return FullRegion(len(keep))
    return HPolytope(a[:, order], b)


def intersect(r1: Region, r2: Region) -> Region:
    """Exact intersection for box/polytope/union; ellipsoids and oracles fall
    back to a membership oracle over the intersected bounding boxes."""
    if r1.dim != r2.dim:
        raise DimensionMismatchError("intersect operands differ in dimension")
    if isinstance(r1, EmptyRegion) or isinstance(r2, EmptyRegion):
        return EmptyRegion(r1.dim)
    if isinstance(r1, FullRegion):
        return r2
    if isinstance(r2, FullRegion):
        return r1
    if isinstance(r1, Box) and isinstance(r2, Box):
        lo = np.maximum(r1.lower, r2.lower)
        hi = np.minimum(r1.upper, r2.upper)
        if np.any(lo > hi + EPS_FEAS):
            return EmptyRegion(r1.dim)
        return Box(lo, np.maximum(lo, hi))
    exact1 = isinstance(r1, (Box, HPolytope))
    exact2 = isinstance(r2, (Box, HPolytope))
    if exact1 and exact2:
        p1, p2 = as_polytope(r1), as_polytope(r2)
        return HPolytope(np.vstack([p1.a, p2.a]), np.hstack([p1.b, p2.b]))
    if isinstance(r1, UnionOfPolytopes) and (exact2 or isinstance(r2, UnionOfPolytopes)):
        other = r2.pieces if isinstance(r2, UnionOfPolytopes) else (as_polytope(r2),)
        pieces = []
        for p in r1.pieces:
            for q in other:
                cand = HPolytope(np.vstack([p.a, q.a]), np.hstack([p.b, q.b]))
                if _poly_feasible(cand):
                    pieces.append(cand)
        return union_of(pieces) if pieces else EmptyRegion(r1.dim)
    if isinstance(r2, UnionOfPolytopes) and exact1:
        return intersect(r2, r1)

    # Ellipsoid or oracle operand: predicate conjunction with box bounds.
    bounds = _intersect_boxes(bounding_box(r1), bounding_box(r2))
    if bounds is None:
        return EmptyRegion(r1.dim)

    def conj(x, _r1=r1, _r2=r2):
        return contains(_r1, x) and contains(_r2, x)

    return MembershipOracle(conj, bounds)


def _intersect_boxes(b1: Box, b2: Box) -> Box | None:
    lo = np.maximum(b1.lower, b2.lower)
    hi = np.minimum(b1.upper, b2.upper)
    if np.any(lo > hi + EPS_FEAS):
        return None
    return Box(lo, np.maximum(lo, hi))


def product(r1: Region, r2: Region) -> Region:
    """Cartesian product; membership is componentwise conjunction."""
    d1, d2 = r1.dim, r2.dim
    if isinstance(r1, EmptyRegion) or isinstance(r2, EmptyRegion):
        return EmptyRegion(d1 + d2)
    if isinstance(r1, FullRegion) and isinstance(r2, FullRegion):
        return FullRegion(d1 + d2)
    boxlike1 = isinstance(r1, (Box, FullRegion))
    boxlike2 = isinstance(r2, (Box, FullRegion))
    if boxlike1 and boxlike2:
        return Box(np.hstack([_box_lower(r1), _box_lower(r2)]),
                   np.hstack([_box_upper(r1), _box_upper(r2)]))
    exact1 = isinstance(r1, (Box, HPolytope, FullRegion))
    exact2 = isinstance(r2, (Box, HPolytope, FullRegion))
    if exact1 and exact2:
        p1, p2 = as_polytope(r1), as_polytope(r2)
        a = np.block([
            [p1.a, np.zeros((p1.nrows, d2))],
            [np.zeros((p2.nrows, d1)), p2.a],
        ])
        return HPolytope(a, np.hstack([p1.b, p2.b]))
    if isinstance(r1, UnionOfPolytopes) and (exact2 or isinstance(r2, UnionOfPolytopes)):
        rhs = r2.pieces if isinstance(r2, UnionOfPolytopes) else (r2,)
        return union_of([as_polytope(product(p, q)) for p in r1.pieces for q in rhs])
    if isinstance(r2, UnionOfPolytopes) and exact1:
        return union_of([as_polytope(product(r1, q)) for q in r2.pieces])

    bounds = Box(np.hstack([bounding_box(r1).lower, bounding_box(r2).lower]),
                 np.hstack([bounding_box(r1).upper, bounding_box(r2).upper]))

    def conj(x, _r1=r1, _r2=r2, _d1=d1):
        v = np.asarray(x)
        return contains(_r1, v[:_d1]) and contains(_r2, v[_d1:])

    return MembershipOracle(conj, bounds)


def _box_lower(r: Region) -> np.ndarray:
    return r.lower if isinstance(r, Box) else np.full(r.dim, -math.inf)


def _box_upper(r: Region) -> np.ndarray:
    return r.upper if isinstance(r, Box) else np.full(r.dim, math.inf)


def slice_region(r: Region, fixed: Mapping[int, float]) -> Region:
    """Substitute fixed coordinate values; returns the region over the rest.

    Equivalent to intersecting with the affine slice and projecting, but done
    by substitution, so no elimination is needed.  The result may be empty.
    """
    if not fixed:
        return r
    idx = sorted(int(k) for k in fixed)
    if len(idx) != len(fixed):
        raise ValueError("fixed indices must be distinct")
    for k in idx:
        if k < 0 or k >= r.dim:
            raise IndexError(f"fixed index {k} out of range for dimension {r.dim}")
    if len(idx) >= r.dim:
        raise ValueError("slicing must leave at least one coordinate")
    vals = np.array([float(fixed[k]) for k in idx])
    keep = [j for j in range(r.dim) if j not in set(idx)]

    if isinstance(r, EmptyRegion):
        return EmptyRegion(len(keep))
    if isinstance(r, FullRegion):
        return FullRegion(len(keep))
    if isinstance(r, Box):
        inside = np.all(vals >= r.lower[idx] - EPS_FEAS) and np.all(vals <= r.upper[idx] + EPS_FEAS)
        if not inside:
            return EmptyRegion(len(keep))
        return Box(r.lower[keep], r.upper[keep])
    if isinstance(r, HPolytope):
        return _slice_polytope(r, idx, vals, keep)
    if isinstance(r, UnionOfPolytopes):
        return union_of([_slice_polytope(p, idx, vals, keep) for p in r.pieces])
    if isinstance(r, Ellipsoid):
        return _slice_ellipsoid(r, idx, vals, keep)
    if isinstance(r, MembershipOracle):
        lo, hi = r.bounds.lower, r.bounds.upper
        if np.any(vals < lo[idx] - EPS_FEAS) or np.any(vals > hi[idx] + EPS_FEAS):
            return EmptyRegion(len(keep))
        pred = r.predicate

        def sliced(y, _pred=pred, _idx=idx, _vals=vals, _keep=keep, _dim=r.dim):
            full = np.empty(_dim)
            full[_idx] = _vals
            full[_keep] = np.asarray(y)
            return _pred(full)

        return MembershipOracle(sliced, Box(lo[keep], hi[keep]))
    raise UnsupportedRepresentationError(type(r).__name__)


def _embed_point(vals, idx, bounds: Box, keep):
    full = np.array((bounds.lower + bounds.upper) / 2.0)
    full[~np.isfinite(full)] = 0.0
    full[idx] = vals
    return full


def _slice_polytope(p: HPolytope, idx, vals, keep) -> Region:
    if p.nrows == 0:
        return FullRegion(len(keep))
    b = p.b - p.a[:, idx] @ vals
    a = p.a[:, keep]
    trimmed = _drop_trivial_rows(a, b)
    if trimmed is None:
        return EmptyRegion(len(keep))
    a, b = trimmed
    if a.shape[0] == 0:
        return FullRegion(len(keep))
    out = HPolytope(a, b)
    # Normalize provably empty slices so callers can treat Empty as a value.
    if not _poly_feasible(out):
        return EmptyRegion(len(keep))
    return out


def _slice_ellipsoid(e: Ellipsoid, idx, vals, keep) -> Region:
    m = np.linalg.inv(e.shape)
    kk = np.ix_(keep, keep)
    kf = np.ix_(keep, idx)
    ff = np.ix_(idx, idx)
    mkk = m[kk]
    mkf = m[kf]
    mff = m[ff]
    dv = vals - e.center[idx]
    # Complete the square in the kept block.
    shift = np.linalg.solve(mkk, mkf @ dv)
    center = e.center[keep] - shift
    residual = float(dv @ (mff @ dv) - (mkf @ dv) @ shift)
    level = e.level - residual
    scale = max(1.0, abs(e.level))
    if level < -EPS_FEAS * scale:
        return EmptyRegion(len(keep))
    if level <= EPS_FEAS * scale:
        return Box(center, center)
    return Ellipsoid(center, np.linalg.inv(mkk), level)


# ---------------------------------------------------------------------------
# Bounding boxes, Chebyshev centers, sampling, vertices
# ---------------------------------------------------------------------------


def bounding_box(r: Region) -> Box:
    """Smallest axis-aligned box containing r (coordinates may be infinite)."""
    n = r.dim
    if isinstance(r, Box):
        return r
    if isinstance(r, FullRegion):
        return Box(np.full(n, -math.inf), np.full(n, math.inf))
    if isinstance(r, EmptyRegion):
        raise ValueError("the empty region has no bounding box")
    if isinstance(r, MembershipOracle):
        return r.bounds
    if isinstance(r, Ellipsoid):
        half = np.sqrt(np.maximum(0.0, r.level * np.diag(r.shape)))
        return Box(r.center - half, r.center + half)
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        hi[i] = linear_max(r, e)
        lo[i] = -linear_max(r, -e)
    if np.any(lo > hi):  # empty polytope
        raise ValueError("the region is empty; no bounding box")
    return Box(lo, hi)


def chebyshev_center(p: HPolytope, radius_cap: float = 1.0):
    """Deepest point of a polytope: maximize r s.t. ``A x + ||a_i|| r <= b``.

    The inradius is capped so unbounded polytopes still yield a finite
    interior point.  Returns ``(point, radius)``; radius 0 means the polytope
    has empty interior (or is empty: point is None then).
    """
    if p.nrows == 0:
        return np.zeros(p.dim), radius_cap
    norms = np.linalg.norm(p.a, axis=1)
    a = np.hstack([p.a, norms[:, None]])
    a = np.vstack([a, np.zeros(p.dim + 1)])
    a[-1, -1] = 1.0  # r <= cap
    b = np.hstack([p.b, radius_cap])
    c = np.zeros(p.dim + 1)
    c[-1] = -1.0
    status, x, _ = _simplex(c, a, b)
    if status is not LpStatus.OPTIMAL or x is None:
        return None, 0.0
    r = max(0.0, float(x[-1]))
    return x[:-1], r


def sample_region(r: Region, n: int, seed: int = 0, rng=None) -> np.ndarray:
    """Draw n points of r (hit-and-run for polytopes, direct for boxes).

    The draws are reproducible for a fixed seed and land inside r except for
    oracle regions, where bounding-box rejection may return fewer points.
    Union pieces are chosen uniformly (not volume-weighted): this sampler
    backs spot checks, not volume estimates.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if isinstance(r, EmptyRegion):
        return np.zeros((0, r.dim))
    if isinstance(r, Box):
        return _box_samples(r, n, rng)
    if isinstance(r, FullRegion):
        raise UnsupportedRepresentationError("cannot sample the full space")
    if isinstance(r, HPolytope):
        return _hit_and_run(r, n, rng)
    if isinstance(r, UnionOfPolytopes):
        alive = [p for p in r.pieces if _poly_feasible(p)]
        if not alive:
            return np.zeros((0, r.dim))
        picks = rng.integers(0, len(alive), size=n)
        out = np.empty((n, r.dim))
        for k, piece in enumerate(alive):
            count = int(np.sum(picks == k))
            if count:
                out[picks == k] = _hit_and_run(piece, count, rng)
        return out
    if isinstance(r, Ellipsoid):
        g = rng.standard_normal((n, r.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        radii = rng.uniform(0.0, 1.0, size=n) ** (1.0 / r.dim)
        ball = g * radii[:, None]
        chol = np.linalg.cholesky(r.shape)
        return r.center + math.sqrt(r.level) * ball @ chol.T
    if isinstance(r, MembershipOracle):
        cand = _box_samples(r.bounds, n, rng)
        mask = np.array([bool(r.predicate(p)) for p in cand])
        return cand[mask]
    raise UnsupportedRepresentationError(type(r).__name__)


def _hit_and_run(p: HPolytope, n: int, rng, burn: int = 20) -> np.ndarray:
    if p.nrows == 0:
        raise UnsupportedRepresentationError("cannot sample an unconstrained polytope")
    x, radius = chebyshev_center(p)
    if x is None:
        return np.zeros((0, p.dim))
    hi_box = bounding_box(p)
    if not (np.all(np.isfinite(hi_box.lower)) and np.all(np.isfinite(hi_box.upper))):
        raise UnsupportedRepresentationError("cannot sample an unbounded polytope")
    if radius <= 1e-12:
        # Degenerate (flat) polytope: hit-and-run cannot move in volume;
        # return the deepest point repeatedly.
        return np.tile(x, (n, 1))
    out = np.empty((n, p.dim))
    total = n + burn
    for k in range(total):
        d = rng.standard_normal(p.dim)
        d /= np.linalg.norm(d)
        denom = p.a @ d
        slack = p.b - p.a @ x
        t_hi = math.inf
        t_lo = -math.inf
        pos = denom > 1e-13
        neg = denom < -1e-13
        if np.any(pos):
            t_hi = float(np.min(slack[pos] / denom[pos]))
        if np.any(neg):
            t_lo = float(np.max(slack[neg] / denom[neg]))
        if not (math.isfinite(t_hi) and math.isfinite(t_lo)):
            raise UnsupportedRepresentationError("cannot sample an unbounded polytope")
        t_lo, t_hi = min(t_lo, 0.0), max(t_hi, 0.0)
        x = x + rng.uniform(t_lo, t_hi) * d
        if k >= burn:
            out[k - burn] = x
    return out


def enumerate_vertices(p: HPolytope, feas_tol: float = 1e-7, max_combos: int = 200_000) -> np.ndarray:
    """Vertices of a bounded polytope by basis enumeration.

    Internal helper (V-representation is not a public feature): used for
    support values over small conditioned polytopes and 2-D polygon dumps.
    """
    a, b = p.a, p.b
    m, d = a.shape
    if m < d:
        raise UnsupportedRepresentationError("polytope is unbounded (too few rows)")
    combos = list(itertools.combinations(range(m), d))
    if len(combos) > max_combos:
        raise UnsupportedRepresentationError("too many row combinations for vertex enumeration")
    idx = np.array(combos)
    mats = a[idx]                      # (K, d, d)
    rhs = b[idx]                       # (K, d)
    dets = np.abs(np.linalg.det(mats))
    scale = np.maximum(1.0, np.max(np.abs(mats), axis=(1, 2)) ** d)
    ok = dets > 1e-10 * scale
    if not np.any(ok):
        return np.zeros((0, d))
    sols = np.linalg.solve(mats[ok], rhs[ok][:, :, None])[:, :, 0]
    feas = np.all(sols @ a.T <= b[None, :] + feas_tol, axis=1)
    pts = sols[feas]
    if pts.shape[0] == 0:
        return pts
    # dedupe within tolerance
    rounded = np.round(pts, 9)
    _, uniq = np.unique(rounded, axis=0, return_index=True)
    return pts[np.sort(uniq)]


def support_values(r: Region, directions: np.ndarray) -> np.ndarray:
    """``linear_max`` for a batch of directions.

    For bounded polytopes with enough directions to amortize the cost, the
    batch is answered from one vertex enumeration; everything else falls back
    to per-direction LPs.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if isinstance(r, HPolytope) and r.nrows > r.dim and dirs.shape[0] > 2 * r.dim:
        bbox = None
        try:
            bbox = bounding_box(r)
        except ValueError:  # empty
            return np.full(dirs.shape[0], -math.inf)
        bounded = bool(np.all(np.isfinite(bbox.lower)) and np.all(np.isfinite(bbox.upper)))
        if bounded:
            try:
                verts = enumerate_vertices(r)
            except UnsupportedRepresentationError:
                verts = None
            if verts is not None and verts.shape[0] > 0:
                return np.max(dirs @ verts.T, axis=1)
    return np.array([linear_max(r, d) for d in dirs])
