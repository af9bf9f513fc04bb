"""Uncertainty variables and conditional uncertainty maps.

A variable is a named block of coordinates together with a region of possible
realizations.  Conditional uncertainty is a set-valued map stored as a single
*relation* region in the product space (given block first, target block
second): evaluating the map is a coordinate slice, inverting it is a slice of
the other block, and joining it with a marginal is a product-and-intersect.
Keeping everything as one region makes the two fundamental laws one-liners:

* law of projections - marginals are coordinate projections of the joint and
  conditionals are slices of it;
* symmetry of the joint - building the joint from either factorization gives
  the same set up to block reordering.

Independence in this framework is a set identity (the joint equals the
product of marginals), and conditional independence is the same identity on
every conditioned slice.  "For all x" quantifiers are verified exactly via
projections when the sets are polytopic, and by seeded spot checks (tri-state
verdicts) otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import geometry as geo
from .geometry import (
    DimensionMismatchError,
    EmptyRegion,
    FullRegion,
    HPolytope,
    Region,
    Verdict,
)

__all__ = [
    "VariableSignature",
    "UncertaintyVariable",
    "ConditionalMap",
    "JointVariable",
    "ConditionalValidity",
    "evaluate_map",
    "check_conditional_validity",
    "otimes",
    "marginal",
    "condition",
    "conditioned_joint",
    "bayes_swap_check",
    "information_map",
    "posterior",
    "derived_conditional",
    "is_independent",
    "is_conditionally_independent",
    "pairwise_independent",
    "totally_independent",
]


@dataclass(frozen=True)
class VariableSignature:
    """A variable name plus the dimension of its coordinate block."""

    name: str
    dim: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be nonempty")
        if self.dim < 1:
            raise ValueError("variable dimension must be at least 1")


@dataclass(frozen=True, eq=False)
class UncertaintyVariable:
    """A signature together with its uncertainty set."""

    signature: VariableSignature
    uncertainty: Region

    def __post_init__(self):
        if self.uncertainty.dim != self.signature.dim:
            raise DimensionMismatchError("uncertainty set dimension differs from signature")


@dataclass(frozen=True, eq=False)
class ConditionalMap:
    """Set-valued map ``given -> subsets of target`` stored as a relation.

    The relation region lives in the product space with all ``given``
    coordinates first, then all ``target`` coordinates.  The value at x is
    the slice of the relation at the given block.
    """

    given: VariableSignature
    target: VariableSignature
    relation: Region

    def __post_init__(self):
        if self.relation.dim != self.given.dim + self.target.dim:
            raise DimensionMismatchError(
                "relation dimension must equal given.dim + target.dim")

    @property
    def given_indices(self) -> list[int]:
        return list(range(self.given.dim))

    @property
    def target_indices(self) -> list[int]:
        return list(range(self.given.dim, self.given.dim + self.target.dim))


@dataclass(frozen=True, eq=False)
class JointVariable:
    """Named coordinate blocks plus one region over their concatenation."""

    signatures: tuple[VariableSignature, ...]
    uncertainty: Region

    def __post_init__(self):
        sigs = tuple(self.signatures)
        names = [s.name for s in sigs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in joint: {names}")
        total = sum(s.dim for s in sigs)
        if self.uncertainty.dim != total:
            raise DimensionMismatchError(
                f"joint region has dimension {self.uncertainty.dim}, blocks sum to {total}")
        object.__setattr__(self, "signatures", sigs)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.signatures]

    def signature(self, name: str) -> VariableSignature:
        for s in self.signatures:
            if s.name == name:
                return s
        raise KeyError(f"unknown variable {name!r}")

    def block_indices(self, name: str) -> list[int]:
        start = 0
        for s in self.signatures:
            if s.name == name:
                return list(range(start, start + s.dim))
            start += s.dim
        raise KeyError(f"unknown variable {name!r}")

    def indices_of(self, names: Sequence[str]) -> list[int]:
        out: list[int] = []
        for name in names:
            out.extend(self.block_indices(name))
        return out

    def resolve_names(self, names) -> list[str]:
        """Sequences keep their order; sets fall back to declaration order."""
        if isinstance(names, str):
            names = [names]
        if isinstance(names, (set, frozenset)):
            ordered = [n for n in self.names if n in names]
            missing = set(names) - set(ordered)
        else:
            ordered = list(names)
            missing = set(ordered) - set(self.names)
        if missing:
            raise KeyError(f"unknown variable(s): {sorted(missing)}")
        if len(set(ordered)) != len(ordered):
            raise ValueError("duplicate names")
        return ordered

    def reordered(self, names: Sequence[str]) -> "JointVariable":
        ordered = self.resolve_names(names)
        if set(ordered) != set(self.names):
            raise ValueError("reordering must mention every variable")
        region = geo.project(self.uncertainty, self.indices_of(ordered))
        return JointVariable(tuple(self.signature(n) for n in ordered), region)


def evaluate_map(m: ConditionalMap, x) -> Region:
    """Value of the conditional map at x: a slice of the relation."""
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape[0] != m.given.dim:
        raise DimensionMismatchError(
            f"expected a point of dimension {m.given.dim}, got {v.shape[0]}")
    return geo.slice_region(m.relation, dict(zip(m.given_indices, v)))


def information_map(m: ConditionalMap, y) -> Region:
    """States consistent with observing y: the relation sliced at the target."""
    v = np.asarray(y, dtype=float).reshape(-1)
    if v.shape[0] != m.target.dim:
        raise DimensionMismatchError(
            f"expected a point of dimension {m.target.dim}, got {v.shape[0]}")
    return geo.slice_region(m.relation, dict(zip(m.target_indices, v)))


def posterior(ux: Region, m: ConditionalMap, y) -> Region:
    """Prior intersected with the information of the observation.

    An Empty result is a value, not an error: it signals evidence that is
    impossible under the model.
    """
    return geo.intersect(ux, information_map(m, y))


@dataclass(frozen=True)
class ConditionalValidity:
    """Report for the two defining conditions of a conditional map."""

    nonempty_on_prior: Verdict  # map value nonempty wherever the prior reaches
    within_marginal: Verdict    # map values stay inside the target marginal

    @property
    def valid(self) -> bool:
        return self.nonempty_on_prior.holds and self.within_marginal.holds


def check_conditional_validity(m: ConditionalMap, ux: Region, uy: Region,
                               seed: int = 0) -> ConditionalValidity:
    """Validate a conditional map against marginal sets.

    Condition 1 (definiteness on the prior) holds iff ``ux`` is contained in
    the projection of the relation onto the given block.  Condition 2 holds
    iff the image of ``ux`` under the map is contained in ``uy``.
    """
    if ux.dim != m.given.dim or uy.dim != m.target.dim:
        raise DimensionMismatchError("marginal dimensions do not match the map")
    domain = geo.project(m.relation, m.given_indices)
    cond1 = geo.is_subset(ux, domain, seed=seed)
    restricted = geo.intersect(m.relation, geo.product(ux, FullRegion(m.target.dim)))
    image = geo.project(restricted, m.target_indices) if not isinstance(
        restricted, EmptyRegion) else EmptyRegion(m.target.dim)
    cond2 = geo.is_subset(image, uy, seed=seed)
    return ConditionalValidity(cond1, cond2)


def otimes(ux: Region, m: ConditionalMap) -> JointVariable:
    """Join a marginal with a conditional map: ``(ux x Full) ∩ relation``."""
    if ux.dim != m.given.dim:
        raise DimensionMismatchError("marginal dimension differs from the map's given block")
    joint_region = geo.intersect(geo.product(ux, FullRegion(m.target.dim)), m.relation)
    return JointVariable((m.given, m.target), joint_region)


def marginal(j: JointVariable, names) -> Region:
    """Projection of the joint onto the named blocks (law of projections)."""
    ordered = j.resolve_names(names)
    if not ordered:
        raise ValueError("names must be nonempty")
    return geo.project(j.uncertainty, j.indices_of(ordered))


def conditioned_joint(j: JointVariable, evidence: Mapping[str, object]) -> JointVariable:
    """Slice the joint at the evidence; remaining blocks keep declaration order."""
    if not evidence:
        return j
    fixed: dict[int, float] = {}
    for name, value in evidence.items():
        idx = j.block_indices(name)
        v = np.asarray(value, dtype=float).reshape(-1)
        if v.shape[0] != len(idx):
            raise DimensionMismatchError(
                f"evidence for {name!r} has dimension {v.shape[0]}, expected {len(idx)}")
        fixed.update(zip(idx, v))
    remaining = tuple(s for s in j.signatures if s.name not in evidence)
    if not remaining:
        raise ValueError("evidence must leave at least one variable free")
    region = geo.slice_region(j.uncertainty, fixed)
    return JointVariable(remaining, region)


def condition(j: JointVariable, evidence: Mapping[str, object]) -> Region:
    """Conditional uncertainty set given exact evidence (may be Empty)."""
    return conditioned_joint(j, evidence).uncertainty


def derived_conditional(j: JointVariable, given_names, target_names) -> ConditionalMap:
    """Conditional map recovered from a joint: the relation is the joint itself.

    Slicing the reordered joint at the given block realizes the conditional
    the joint induces; outside the given-marginal the value is Empty.
    """
    given = j.resolve_names(given_names)
    target = j.resolve_names(target_names)
    if set(given) & set(target):
        raise ValueError("given and target overlap")
    if set(given) | set(target) != set(j.names):
        raise ValueError("given and target must cover the joint")
    region = geo.project(j.uncertainty, j.indices_of(given + target))
    g = VariableSignature("|".join(given), sum(j.signature(n).dim for n in given))
    t = VariableSignature("|".join(target), sum(j.signature(n).dim for n in target))
    return ConditionalMap(g, t, region)


def bayes_swap_check(ux: Region, m_y_given_x: ConditionalMap,
                     uy: Region, m_x_given_y: ConditionalMap,
                     seed: int = 0) -> Verdict:
    """Both factorizations build the same joint, up to block reordering."""
    j_xy = otimes(ux, m_y_given_x)
    j_yx = otimes(uy, m_x_given_y)
    if (j_xy.uncertainty.dim != j_yx.uncertainty.dim
            or m_y_given_x.given.dim != m_x_given_y.target.dim
            or m_y_given_x.target.dim != m_x_given_y.given.dim):
        raise DimensionMismatchError("the two factorizations disagree on block sizes")
    dy = m_x_given_y.given.dim
    dx = m_x_given_y.target.dim
    swap = list(range(dy, dy + dx)) + list(range(dy))
    swapped = geo.project(j_yx.uncertainty, swap)
    return geo.regions_equal(j_xy.uncertainty, swapped, seed=seed)


# ---------------------------------------------------------------------------
# Independence
# ---------------------------------------------------------------------------


def _product_factorization_verdict(region: Region, a_idx: list[int], b_idx: list[int],
                                   seed: int = 0) -> Verdict:
    """Does ``region`` (over the a+b coordinates) equal the product of its
    own projections onto a and b?

    The region is always contained in that product, so equality reduces to
    ``product subseteq region``.  For polytopes this is decided exactly: the
    support of the product in direction c splits as ``sup c_a + sup c_b``
    over the region itself, so every row is checked with two support values
    and no explicit projection is formed.
    """
    if isinstance(region, EmptyRegion):
        return Verdict.TRUE  # empty set equals its (empty) product
    if isinstance(region, (HPolytope, geo.Box)):
        p = geo.as_polytope(region)
        if p.nrows == 0:
            return Verdict.TRUE
        dirs_a = np.zeros_like(p.a)
        dirs_b = np.zeros_like(p.a)
        dirs_a[:, a_idx] = p.a[:, a_idx]
        dirs_b[:, b_idx] = p.a[:, b_idx]
        sup_a = geo.support_values(p, dirs_a)
        sup_b = geo.support_values(p, dirs_b)
        return Verdict.from_bool(bool(np.all(sup_a + sup_b <= p.b + geo.EPS_FEAS)))
    # General representations: compare against the explicit product.
    pa = geo.project(region, a_idx)
    pb = geo.project(region, b_idx)
    reordered = geo.project(region, a_idx + b_idx)
    return geo.regions_equal(reordered, geo.product(pa, pb), seed=seed)


def is_independent(j: JointVariable, a, b, seed: int = 0) -> Verdict:
    """Whether the joint factors as the product of the a- and b-marginals."""
    a_names = j.resolve_names(a)
    b_names = j.resolve_names(b)
    if set(a_names) & set(b_names):
        raise ValueError("independence blocks overlap")
    if set(a_names) | set(b_names) != set(j.names):
        raise ValueError("independence blocks must cover the joint")
    return _product_factorization_verdict(
        j.uncertainty, j.indices_of(a_names), j.indices_of(b_names), seed=seed)


def _draw_conditioning_points(j: JointVariable, c_names: list[str], samples: int,
                              seed: int) -> list[np.ndarray]:
    c_marg = marginal(j, c_names)
    pts = geo.sample_region(c_marg, samples, seed=seed)
    return [np.asarray(p) for p in pts]


def is_conditionally_independent(j: JointVariable, a, b, c,
                                 z_samples="auto", seed: int = 0,
                                 samples: int = 50) -> Verdict:
    """Conditional independence of blocks a and b given block c.

    For every conditioning point z the conditioned joint over a+b must equal
    the product of the two single-block conditionals.  With c empty this is
    plain independence of the a/b marginal joint (exact for polytopes).  With
    c nonempty the "for all z" quantifier is spot-checked at the given (or
    auto-drawn) points: each per-point check is exact for polytopes, but the
    overall TRUE is reported as SAMPLED_TRUE.  Any failing point gives a
    certain FALSE.
    """
    a_names = j.resolve_names(a)
    b_names = j.resolve_names(b)
    c_names = j.resolve_names(c) if c else []
    blocks = a_names + b_names + c_names
    if len(set(blocks)) != len(blocks):
        raise ValueError("blocks a, b, c must be disjoint")
    if not a_names or not b_names:
        raise ValueError("blocks a and b must be nonempty")

    if not c_names:
        sub = marginal(j, a_names + b_names)
        subjoint = JointVariable(
            tuple(j.signature(n) for n in a_names + b_names), sub)
        return is_independent(subjoint, a_names, b_names, seed=seed)

    scope = marginal(j, a_names + b_names + c_names)
    scoped = JointVariable(
        tuple(j.signature(n) for n in a_names + b_names + c_names), scope)
    c_marg = marginal(scoped, c_names)

    if isinstance(z_samples, str) and z_samples == "auto":
        zs = _draw_conditioning_points(scoped, c_names, samples, seed)
    else:
        zs = [np.asarray(z, dtype=float).reshape(-1) for z in z_samples]
        for z in zs:
            if not geo.contains(c_marg, z):
                raise ValueError(
                    f"conditioning point {z.tolist()} lies outside the marginal of {c_names}")

    c_dim = sum(scoped.signature(n).dim for n in c_names)
    a_idx = scoped.indices_of(a_names)
    b_idx = scoped.indices_of(b_names)
    c_idx = scoped.indices_of(c_names)
    verdict = Verdict.TRUE
    for z in zs:
        if z.shape[0] != c_dim:
            raise DimensionMismatchError("conditioning point has wrong dimension")
        sliced = geo.slice_region(scope, dict(zip(c_idx, z)))
        # After slicing, a/b indices shift down past the removed c block.
        remap = _shifted_indices(scope.dim, c_idx)
        v = _product_factorization_verdict(
            sliced, [remap[i] for i in a_idx], [remap[i] for i in b_idx], seed=seed)
        if v is Verdict.FALSE:
            return Verdict.FALSE
        verdict = verdict.both(v)
    return verdict.both(Verdict.SAMPLED_TRUE)


def _shifted_indices(dim: int, removed: list[int]) -> dict[int, int]:
    removed_set = set(removed)
    remap = {}
    new = 0
    for old in range(dim):
        if old not in removed_set:
            remap[old] = new
            new += 1
    return remap


def pairwise_independent(j: JointVariable, seed: int = 0) -> Verdict:
    """Every unordered pair's 2-variable marginal joint factors as a product."""
    names = j.names
    if len(names) < 2:
        raise ValueError("pairwise independence needs at least two variables")
    verdict = Verdict.TRUE
    for i in range(len(names)):
        for k in range(i + 1, len(names)):
            pair = [names[i], names[k]]
            sub = JointVariable(
                (j.signature(names[i]), j.signature(names[k])), marginal(j, pair))
            verdict = verdict.both(is_independent(sub, [names[i]], [names[k]], seed=seed))
            if verdict is Verdict.FALSE:
                return verdict
    return verdict


def totally_independent(j: JointVariable, seed: int = 0) -> Verdict:
    """The joint equals the product of all single-variable marginals."""
    if len(j.signatures) < 2:
        raise ValueError("total independence needs at least two variables")
    prod: Region | None = None
    for name in j.names:
        m = marginal(j, [name])
        prod = m if prod is None else geo.product(prod, m)
    return geo.regions_equal(j.uncertainty, prod, seed=seed)
