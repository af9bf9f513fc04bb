"""Bounded-noise filtering built on region algebra.

Two closed-form applications of the framework:

* Triangulation: with independent observations of one state, the posterior
  is the prior intersected with one information map per observation.
* Set-membership filtering: a hidden state evolves under a bounded transition
  relation and emits bounded-noise observations.  The recursive filter
  alternates predict (join with the transition, project onto the new state)
  and update (intersect with the observation's information map).  Because
  the model is a chain, the recursion's terminal region equals the batch
  posterior computed on the full trajectory network - that equality is the
  module's central test.

A small scenario builder produces rectilinear robot-localization instances:
free space is the bounding box minus axis-aligned obstacles (a union of
boxes by guillotine cuts), and each range sensor becomes a box (optionally
octagonal) relation around the reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry as geo
from .core import ConditionalMap, VariableSignature, information_map, otimes
from .geometry import Box, EmptyRegion, Region, Verdict
from .network import Dag, UncertaintyNetwork, network_posterior
from .serialize import LineCursor, ParseError

__all__ = [
    "NaiveBayesModel",
    "naive_bayes_posterior",
    "DynamicsModel",
    "FilterResult",
    "set_membership_filter",
    "batch_trajectory_posterior",
    "trajectory_network",
    "Sensor",
    "Scenario",
    "ScenarioDocument",
    "free_space",
    "range_relation",
    "build_localization_scenario",
    "scenario_dynamics",
    "count_box_components",
    "parse_scenario",
]


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """One hidden state, many observation maps sharing it as given block."""

    prior: Region
    observation_maps: tuple[ConditionalMap, ...]

    def __post_init__(self):
        maps = tuple(self.observation_maps)
        for m in maps:
            if m.given.dim != self.prior.dim:
                raise geo.DimensionMismatchError(
                    "observation map given-block differs from the prior dimension")
        object.__setattr__(self, "observation_maps", maps)


def naive_bayes_posterior(m: NaiveBayesModel, observations: Sequence) -> Region:
    """Prior intersected with every observation's information map."""
    if len(observations) != len(m.observation_maps):
        raise ValueError(
            f"{len(m.observation_maps)} observation maps but {len(observations)} observations")
    result = m.prior
    for obs_map, y in zip(m.observation_maps, observations):
        result = geo.intersect(result, information_map(obs_map, y))
    return result


@dataclass(frozen=True, eq=False)
class DynamicsModel:
    """Bounded-noise state-space model over a finite horizon.

    ``transitions[t]`` relates state t to state t+1 and ``observations[t]``
    relates state t+1 to measurement t+1 (both 0-indexed lists of length T).
    """

    prior: Region
    transitions: tuple[ConditionalMap, ...]
    observations: tuple[ConditionalMap, ...]

    def __post_init__(self):
        trans = tuple(self.transitions)
        obs = tuple(self.observations)
        if len(trans) != len(obs):
            raise ValueError("need one observation map per transition step")
        d = self.prior.dim
        for m in trans:
            if m.given.dim != d or m.target.dim != d:
                raise geo.DimensionMismatchError("transition map must preserve the state dimension")
        for m in obs:
            if m.given.dim != d:
                raise geo.DimensionMismatchError("observation map given-block must be the state")
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "observations", obs)

    @property
    def horizon(self) -> int:
        return len(self.transitions)

    @property
    def state_dim(self) -> int:
        return self.prior.dim


@dataclass(frozen=True)
class FilterResult:
    """Per-step posteriors; ``first_empty_step`` flags inconsistent data (1-based)."""

    regions: tuple[Region, ...]
    first_empty_step: int | None

    @property
    def consistent(self) -> bool:
        return self.first_empty_step is None


def set_membership_filter(d: DynamicsModel, measurements: Sequence) -> FilterResult:
    """Recursive predict/update; returns the posterior after every step.

    Predict joins the current region with the transition relation and
    projects onto the new state; update intersects with the information map
    of the measurement.  An Empty region is returned in place (with its step
    recorded), not raised: it means the measurement contradicts the model.
    """
    if len(measurements) != d.horizon:
        raise ValueError(f"expected {d.horizon} measurements, got {len(measurements)}")
    state_idx = list(range(d.state_dim, 2 * d.state_dim))
    current = d.prior
    regions: list[Region] = []
    first_empty = None
    for t in range(d.horizon):
        if isinstance(current, EmptyRegion):
            predicted: Region = EmptyRegion(d.state_dim)
        else:
            joined = otimes(current, d.transitions[t])
            predicted = geo.project(joined.uncertainty, state_idx)
        updated = geo.intersect(predicted, information_map(d.observations[t], measurements[t]))
        if first_empty is None and geo.is_empty(updated) is Verdict.TRUE:
            updated = EmptyRegion(d.state_dim)
            first_empty = t + 1
        regions.append(updated)
        current = updated
    return FilterResult(tuple(regions), first_empty)


def trajectory_network(d: DynamicsModel):
    """Chain network over states X_0..X_T and measurements Y_1..Y_T.

    Node ids: X_t -> 2t, Y_t -> 2t + 1, so parents always precede children
    and the canonical order interleaves states and measurements.
    """
    T = d.horizon
    sd = d.state_dim
    nodes = [0] + [k for t in range(1, T + 1) for k in (2 * t, 2 * t + 1)]
    edges = []
    variables = {0: VariableSignature("x0", sd)}
    factors: dict[int, object] = {0: d.prior}
    for t in range(1, T + 1):
        x_id, y_id = 2 * t, 2 * t + 1
        edges.append((2 * (t - 1), x_id))
        edges.append((x_id, y_id))
        variables[x_id] = VariableSignature(f"x{t}", sd)
        variables[y_id] = VariableSignature(f"y{t}", d.observations[t - 1].target.dim)
        factors[x_id] = d.transitions[t - 1]
        factors[y_id] = d.observations[t - 1]
    network = UncertaintyNetwork(Dag(nodes, edges), variables, factors, check_definite=False)
    x_ids = [0] + [2 * t for t in range(1, T + 1)]
    y_ids = [2 * t + 1 for t in range(1, T + 1)]
    return network, x_ids, y_ids


def batch_trajectory_posterior(d: DynamicsModel, measurements: Sequence) -> Region:
    """Posterior over the whole trajectory X_0..X_T given all measurements."""
    if len(measurements) != d.horizon:
        raise ValueError(f"expected {d.horizon} measurements, got {len(measurements)}")
    network, x_ids, y_ids = trajectory_network(d)
    if d.horizon == 0:
        return d.prior
    evidence = {y_ids[t]: measurements[t] for t in range(d.horizon)}
    return network_posterior(network, evidence, x_ids)


# ---------------------------------------------------------------------------
# Localization scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Sensor:
    """A beacon position with a bounded-noise radius."""

    beacon: np.ndarray
    sigma: float

    def __post_init__(self):
        b = geo._freeze(np.asarray(self.beacon, dtype=float).reshape(-1))
        if not (self.sigma > 0.0):
            raise ValueError("sensor noise radius must be positive")
        object.__setattr__(self, "beacon", b)
        object.__setattr__(self, "sigma", float(self.sigma))


@dataclass(frozen=True, eq=False)
class Scenario:
    """Rectilinear world, beacon sensors, and the hidden truth pose.

    The truth is test-harness data: builders never look at it except to
    validate that it lies in free space.
    """

    bounds: Box
    obstacles: tuple[Box, ...]
    sensors: tuple[Sensor, ...]
    truth: np.ndarray | None = None

    def __post_init__(self):
        if self.bounds.dim != 2:
            raise ValueError("scenario worlds are 2-D")
        obstacles = tuple(self.obstacles)
        for o in obstacles:
            if o.dim != 2:
                raise ValueError("obstacles must be 2-D boxes")
        if not self.sensors:
            raise ValueError("at least one sensor is required")
        truth = self.truth
        if truth is not None:
            truth = geo._freeze(np.asarray(truth, dtype=float).reshape(-1))
            for o in obstacles:
                if geo.contains(o, truth):
                    raise ValueError("truth pose lies inside an obstacle")
        object.__setattr__(self, "obstacles", obstacles)
        object.__setattr__(self, "sensors", tuple(self.sensors))
        object.__setattr__(self, "truth", truth)


def _subtract_box(piece: Box, hole: Box) -> list[Box]:
    """Guillotine cut of a hole out of a box: left/right strips full height,
    then bottom/top strips of the middle band.  At most four pieces."""
    lo = np.maximum(piece.lower, hole.lower)
    hi = np.minimum(piece.upper, hole.upper)
    if np.any(lo >= hi):  # no overlap with interior
        return [piece]
    out = []
    if piece.lower[0] < lo[0]:
        out.append(Box([piece.lower[0], piece.lower[1]], [lo[0], piece.upper[1]]))
    if hi[0] < piece.upper[0]:
        out.append(Box([hi[0], piece.lower[1]], [piece.upper[0], piece.upper[1]]))
    if piece.lower[1] < lo[1]:
        out.append(Box([lo[0], piece.lower[1]], [hi[0], lo[1]]))
    if hi[1] < piece.upper[1]:
        out.append(Box([lo[0], hi[1]], [hi[0], piece.upper[1]]))
    return out


def free_space(bounds: Box, obstacles: Sequence[Box]) -> Region:
    """Bounding box minus obstacles, as a union of boxes."""
    pieces = [bounds]
    for hole in obstacles:
        pieces = [part for piece in pieces for part in _subtract_box(piece, hole)]
    if not pieces:
        raise ValueError("free space is empty")
    return geo.union_of(pieces)


def range_relation(sigma: float, octagonal: bool = False) -> Region:
    """Relation ``||y - x|| <= sigma`` over (pose, reading) coordinates.

    The Euclidean ball is over-approximated by the inf-norm box, optionally
    tightened with the four diagonal faces (octagon).  Over-approximation is
    sound: it can only enlarge the posterior, never exclude the truth.
    """
    eye = np.eye(2)
    rows = [np.hstack([-eye, eye]), np.hstack([eye, -eye])]
    rhs = [sigma, sigma, sigma, sigma]
    if octagonal:
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                d = np.array([sx, sy])
                rows.append(np.hstack([-d, d])[None, :])
                rhs.append(math.sqrt(2.0) * sigma)
    return geo.polytope(np.vstack(rows), np.array(rhs))


def build_localization_scenario(s: Scenario, octagonal: bool = False) -> NaiveBayesModel:
    """Naive-Bayes model: prior = free space, one range map per sensor."""
    prior = free_space(s.bounds, s.obstacles)
    pose = VariableSignature("pose", 2)
    maps = tuple(
        ConditionalMap(pose, VariableSignature(f"reading{k}", 2),
                       range_relation(sensor.sigma, octagonal))
        for k, sensor in enumerate(s.sensors))
    return NaiveBayesModel(prior, maps)


def scenario_dynamics(s: Scenario, steps: int, motion_bound: float | None = None,
                      octagonal: bool = False) -> DynamicsModel:
    """Dynamics over the scenario: per-step pose change bounded in inf-norm.

    Without a motion bound the robot is static (exact equality transition),
    which models a standing robot taking repeated readings.  The per-step
    observation stacks one reading block per sensor.
    """
    pose = VariableSignature("pose", 2)
    if motion_bound is None:
        trans_region: Region = geo.polytope(
            np.vstack([np.hstack([-np.eye(2), np.eye(2)]), np.hstack([np.eye(2), -np.eye(2)])]),
            np.zeros(4))
    else:
        if motion_bound < 0:
            raise ValueError("motion bound must be nonnegative")
        trans_region = geo.polytope(
            np.vstack([np.hstack([-np.eye(2), np.eye(2)]), np.hstack([np.eye(2), -np.eye(2)])]),
            np.full(4, float(motion_bound)))
    transition = ConditionalMap(pose, VariableSignature("next", 2), trans_region)

    single = [geo.as_polytope(range_relation(sensor.sigma, octagonal)) for sensor in s.sensors]
    k = len(single)
    rows = []
    rhs = []
    for idx, rel in enumerate(single):
        block = np.zeros((rel.nrows, 2 + 2 * k))
        block[:, :2] = rel.a[:, :2]
        block[:, 2 + 2 * idx:4 + 2 * idx] = rel.a[:, 2:]
        rows.append(block)
        rhs.append(rel.b)
    stacked = geo.polytope(np.vstack(rows), np.hstack(rhs))
    observation = ConditionalMap(pose, VariableSignature("readings", 2 * k), stacked)

    prior = free_space(s.bounds, s.obstacles)
    return DynamicsModel(prior, (transition,) * steps, (observation,) * steps)


def count_box_components(region: Region) -> int:
    """Connected components of a union of boxes (touching counts as connected)."""
    if isinstance(region, EmptyRegion):
        return 0
    if isinstance(region, (Box, geo.HPolytope)):
        pieces = [geo.bounding_box(region)]
    elif isinstance(region, geo.UnionOfPolytopes):
        pieces = []
        for p in region.pieces:
            if geo.is_empty(p) is Verdict.TRUE:
                continue
            pieces.append(geo.bounding_box(p))
    else:
        raise geo.UnsupportedRepresentationError(type(region).__name__)
    if not pieces:
        return 0
    parent = list(range(len(pieces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            lo = np.maximum(pieces[i].lower, pieces[j].lower)
            hi = np.minimum(pieces[i].upper, pieces[j].upper)
            if np.all(lo <= hi + 1e-9):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(i) for i in range(len(pieces))})


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioDocument:
    scenario: Scenario
    measurements: tuple[tuple[int, np.ndarray], ...]
    motion_bound: float | None


def parse_scenario(text: str) -> ScenarioDocument:
    """Parse the scenario file format.

    Sections: ``world`` (bounding box line then obstacle lines, each
    ``xmin ymin xmax ymax``), ``sensors`` (``bx by sigma`` per line),
    optional ``motion`` (one speed bound), optional ``truth`` (``x y``),
    optional ``measurements`` (``t v1 v2 ...`` per line, one value pair per
    sensor).  Parse errors carry line numbers.
    """
    cursor = LineCursor(text)
    bounds = None
    obstacles: list[Box] = []
    sensors: list[Sensor] = []
    measurements: list[tuple[int, np.ndarray]] = []
    motion: float | None = None
    truth = None
    section = None
    while not cursor.at_end():
        line, lineno = cursor.next()
        token = line.split()[0]
        if token in ("world", "sensors", "measurements", "motion", "truth"):
            section = token
            continue
        values = line.split()
        if section == "world":
            vals = _floats(values, lineno, 4)
            box_ = _corner_box(vals, lineno)
            if bounds is None:
                bounds = box_
            else:
                obstacles.append(box_)
        elif section == "sensors":
            vals = _floats(values, lineno, 3)
            try:
                sensors.append(Sensor(vals[:2], vals[2]))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
        elif section == "measurements":
            vals = _floats(values, lineno, None)
            if len(vals) < 3:
                raise ParseError("measurement line needs t and at least one reading", lineno)
            t = int(vals[0])
            if t < 1:
                raise ParseError("measurement step must be >= 1", lineno)
            measurements.append((t, np.array(vals[1:])))
        elif section == "motion":
            motion = _floats(values, lineno, 1)[0]
            if motion < 0:
                raise ParseError("motion bound must be nonnegative", lineno)
        elif section == "truth":
            truth = _floats(values, lineno, 2)
        else:
            raise ParseError(f"content before any section header: {line!r}", lineno)
    if bounds is None:
        raise ParseError("missing world section", cursor.line)
    if not sensors:
        raise ParseError("missing sensors section", cursor.line)
    expected = 2 * len(sensors)
    for t, vals in measurements:
        if vals.shape[0] != expected:
            raise ParseError(
                f"step {t}: expected {expected} measurement values, got {vals.shape[0]}",
                cursor.line)
    measurements.sort(key=lambda tv: tv[0])
    try:
        scenario = Scenario(bounds, tuple(obstacles), tuple(sensors), truth)
    except ValueError as exc:
        raise ParseError(str(exc), cursor.line) from None
    return ScenarioDocument(scenario, tuple(measurements), motion)


def _floats(tokens: list[str], lineno: int, expected: int | None) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise ParseError(f"bad number: {exc}", lineno) from None
    if expected is not None and vals.shape[0] != expected:
        raise ParseError(f"expected {expected} values, got {vals.shape[0]}", lineno)
    return vals


def _corner_box(vals: np.ndarray, lineno: int) -> Box:
    lo = np.minimum(vals[:2], vals[2:])
    hi = np.maximum(vals[:2], vals[2:])
    if np.any(lo >= hi):
        raise ParseError("box has zero area", lineno)
    return Box(lo, hi)
