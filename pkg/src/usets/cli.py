"""Batch command-line front end.

One command per invocation; plain-text output, one logical record per line,
deterministic for a fixed seed so runs can be diffed in golden tests.

Exit codes: 0 success, 1 usage or parse error, 2 inconsistent evidence (an
empty posterior, reported with the word EMPTY on its own line).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import geometry as geo
from . import network as net
from .core import JointVariable, pairwise_independent, totally_independent
from .estimate import (
    EstimateProblem,
    EstimateResult,
    EstimateStatus,
    point_estimate_gaussian,
    point_estimate_lp,
    posterior_set,
)
from .files import parse_network_document
from .filters import scenario_dynamics, parse_scenario, set_membership_filter
from .geometry import EmptyRegion, Region, Verdict
from .serialize import ParseError, format_region

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so exit codes stay ours."""

    def error(self, message):
        raise _UsageError(message)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x) + 0.0, ".12g")


def _parse_evidence(items: list[str]) -> dict[int, np.ndarray]:
    out: dict[int, np.ndarray] = {}
    for item in items or []:
        if "=" not in item:
            raise _UsageError(f"evidence must be node=v1,v2 (got {item!r})")
        key, _, vals = item.partition("=")
        try:
            node = int(key)
            vec = np.array([float(v) for v in vals.split(",") if v != ""])
        except ValueError:
            raise _UsageError(f"bad evidence item {item!r}") from None
        if vec.size == 0:
            raise _UsageError(f"evidence item {item!r} has no values")
        out[node] = vec
    return out


def _parse_nodes(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise _UsageError(f"bad node list {text!r}") from None


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from None


def _verdict_word(v: Verdict) -> str:
    return {"true": "yes", "false": "no", "sampled-true": "probably"}[v.value]


def _emit_region(out, region: Region, vertices: bool = False, label: str | None = None):
    if label:
        out.write(label + "\n")
    out.write(format_region(region))
    if vertices and region.dim == 2 and not isinstance(region, EmptyRegion):
        for k, loop in enumerate(_polygon_loops(region)):
            flat = " ".join(_fmt(c) for xy in loop for c in xy)
            prefix = f"vertices{'' if label is None else ' ' + label.replace(' ', '=')}"
            out.write(f"{prefix} piece={k} {flat}\n")


def _polygon_loops(region: Region) -> list[list[np.ndarray]]:
    """2-D vertex loops, one per bounded polytopic piece, CCW starting at the
    lexicographically smallest vertex."""
    if isinstance(region, geo.UnionOfPolytopes):
        pieces = list(region.pieces)
    else:
        try:
            pieces = [geo.as_polytope(region)]
        except geo.UnsupportedRepresentationError:
            return []
    loops = []
    for p in pieces:
        try:
            verts = geo.enumerate_vertices(p)
        except geo.UnsupportedRepresentationError:
            continue
        if verts.shape[0] == 0:
            continue
        loops.append(_order_loop(verts))
    return loops


def _order_loop(verts: np.ndarray) -> list[np.ndarray]:
    center = verts.mean(axis=0)
    angles = np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0])
    order = np.argsort(angles, kind="stable")
    ring = [verts[i] for i in order]
    start = min(range(len(ring)), key=lambda i: (ring[i][0], ring[i][1]))
    return ring[start:] + ring[:start]


def _build_parser() -> _Parser:
    parser = _Parser(prog="usets", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    parser.add_argument("-o", "--output", default=None, help="write output to a file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-i", "--input", required=(name != "figures"),
                       help="input network/scenario file")
        return p

    p = add("marginal", "project the joint onto a node set")
    p.add_argument("--nodes", required=True, help="comma-separated node ids")

    p = add("condition", "slice the joint at exact evidence")
    p.add_argument("--evidence", action="append", default=[], help="node=v1,v2")

    p = add("posterior", "condition then project onto the query")
    p.add_argument("--evidence", action="append", default=[], help="node=v1,v2")
    p.add_argument("--query", default=None, help="comma-separated node ids (default: rest)")

    p = add("dsep", "d-separation query on the DAG")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--c", default="")

    p = add("independence", "pairwise / total independence of the joint")
    p.add_argument("--mode", choices=["pairwise", "total"], default="total")

    p = add("estimate", "scaling-variable point estimate")
    p.add_argument("--evidence", action="append", default=[], help="node=v1,v2")
    p.add_argument("--query", default=None, help="comma-separated node ids (default: rest)")
    p.add_argument("--backend", choices=["lp", "gaussian"], default="lp")

    p = add("filter", "set-membership filter over a scenario file")
    p.add_argument("--evidence", action="append", default=[],
                   help="ignored when the scenario file carries measurements")
    p.add_argument("--format", choices=["regions", "vertices"], default="regions")

    p = add("figures", "emit worked-example data (fig2, fig3, fig4)")
    p.add_argument("name", choices=["fig2", "fig3", "fig4"])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usets: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = sys.stdout
    close_out = False
    try:
        if args.output:
            out = open(args.output, "w", encoding="utf-8")
            close_out = True
        return _dispatch(args, out)
    except (_UsageError, ParseError, ValueError, KeyError, OSError,
            geo.DimensionMismatchError, geo.UnsupportedRepresentationError) as exc:
        print(f"usets: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if close_out:
            out.close()


def _dispatch(args, out) -> int:
    if args.command == "marginal":
        doc = parse_network_document(_read(args.input))
        jv = doc.require_joint()
        nodes = _parse_nodes(args.nodes)
        names = [doc.variables[i].name for i in nodes]
        from .core import marginal
        region = marginal(jv, names)
        return _finish_region(out, region)

    if args.command == "condition":
        doc = parse_network_document(_read(args.input))
        jv = doc.require_joint()
        evidence = _merged_evidence(doc, args)
        if not evidence:
            raise _UsageError("condition needs --evidence or a file evidence section")
        from .core import condition
        named = {doc.variables[i].name: v for i, v in evidence.items()}
        region = condition(jv, named)
        return _finish_region(out, region)

    if args.command == "posterior":
        doc = parse_network_document(_read(args.input))
        network = doc.require_network()
        evidence = _merged_evidence(doc, args)
        query = (_parse_nodes(args.query) if args.query
                 else [i for i in network.dag.nodes if i not in evidence])
        region = net.network_posterior(network, evidence, query)
        return _finish_region(out, region)

    if args.command == "dsep":
        doc = parse_network_document(_read(args.input))
        q = net.DSepQuery(_parse_nodes(args.a), _parse_nodes(args.b),
                          _parse_nodes(args.c) if args.c else ())
        separated = net.d_separated(doc.dag, q)
        out.write(("d-separated" if separated else "connected") + "\n")
        return EXIT_OK

    if args.command == "independence":
        doc = parse_network_document(_read(args.input))
        jv = doc.require_joint()
        pw = pairwise_independent(jv, seed=args.seed)
        out.write(f"pairwise: {_verdict_word(pw)}\n")
        if args.mode == "total":
            tot = totally_independent(jv, seed=args.seed)
            out.write(f"total: {_verdict_word(tot)}\n")
        return EXIT_OK

    if args.command == "estimate":
        doc = parse_network_document(_read(args.input))
        evidence = _merged_evidence(doc, args)
        query = (frozenset(_parse_nodes(args.query)) if args.query
                 else frozenset(i for i in doc.dag.nodes if i not in evidence))
        if args.backend == "gaussian":
            problem = EstimateProblem(doc.require_gaussian(), evidence, query)
            result = point_estimate_gaussian(problem)
        else:
            problem = EstimateProblem(doc.require_network(), evidence, query)
            result = point_estimate_lp(problem)
        _emit_estimate(out, result, query)
        return EXIT_OK if result.status is EstimateStatus.OPTIMAL else EXIT_USAGE

    if args.command == "filter":
        doc = parse_scenario(_read(args.input))
        if args.evidence and doc.measurements:
            print("usets: warning: file measurements override --evidence", file=sys.stderr)
        if not doc.measurements:
            raise _UsageError("scenario file has no measurements section")
        steps = max(t for t, _ in doc.measurements)
        by_step = dict(doc.measurements)
        missing = [t for t in range(1, steps + 1) if t not in by_step]
        if missing:
            raise _UsageError(f"missing measurements for steps {missing}")
        model = scenario_dynamics(doc.scenario, steps, doc.motion_bound)
        result = set_membership_filter(model, [by_step[t] for t in range(1, steps + 1)])
        empty_seen = False
        for t, region in enumerate(result.regions, start=1):
            if isinstance(region, EmptyRegion):
                out.write(f"step t={t}\nEMPTY\n")
                empty_seen = True
            else:
                _emit_region(out, region, vertices=(args.format == "vertices"),
                             label=f"step t={t}")
        return EXIT_EMPTY if empty_seen else EXIT_OK

    if args.command == "figures":
        return _figures(args.name, out, args.seed)

    raise _UsageError(f"unknown command {args.command!r}")  # pragma: no cover


def _merged_evidence(doc, args) -> dict[int, np.ndarray]:
    flags = _parse_evidence(getattr(args, "evidence", []))
    if doc.evidence:
        if flags:
            print("usets: warning: file evidence overrides --evidence flags",
                  file=sys.stderr)
        return dict(doc.evidence)
    return flags


def _finish_region(out, region: Region) -> int:
    if isinstance(region, EmptyRegion) or geo.is_empty(region) is Verdict.TRUE:
        out.write("EMPTY\n")
        return EXIT_EMPTY
    out.write(format_region(region))
    return EXIT_OK


def _emit_estimate(out, result: EstimateResult, query) -> None:
    out.write(f"status {result.status.value}\n")
    if result.objective is not None:
        out.write(f"objective {_fmt(result.objective)}\n")
    for node in sorted(result.x_hat):
        vals = " ".join(_fmt(v) for v in result.x_hat[node])
        out.write(f"x {node} {vals}\n")
    for node in sorted(result.beta):
        out.write(f"beta {node} {_fmt(result.beta[node])}\n")
    if result.non_unique:
        out.write("non-unique\n")


def _figures(name: str, out, seed: int) -> int:
    if name == "fig2":
        diamond = geo.polytope(
            [[-1, -1], [-1, 1], [1, -1], [1, 1]], [-2.5, 2.5, 2.5, 7.5])
        for xy in _order_loop(geo.enumerate_vertices(diamond)):
            out.write(f"{_fmt(xy[0])} {_fmt(xy[1])}\n")
        return EXIT_OK
    if name == "fig3":
        tetra = geo.polytope(
            [[1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1]], [2, 0, 0, 0])
        out.write(format_region(tetra))
        return EXIT_OK
    if name == "fig4":
        from .core import ConditionalMap, VariableSignature
        square = geo.polytope(
            np.vstack([np.hstack([-np.eye(2), np.eye(2)]),
                       np.hstack([np.eye(2), -np.eye(2)])]), np.ones(4))
        sig = lambda nm: VariableSignature(nm, 2)
        dag = net.Dag([1, 2, 3, 4], [(1, 2), (1, 3), (1, 4)])
        network = net.UncertaintyNetwork(
            dag, {i: sig(f"x{i}") for i in dag.nodes},
            {1: geo.FullRegion(2),
             **{i: ConditionalMap(sig(f"p{i}"), sig(f"x{i}"), square) for i in (2, 3, 4)}})
        evidence = {2: np.array([0.0, 0.0]), 3: np.array([1.0, 0.0]),
                    4: np.array([5.0, 4.0])}
        problem = EstimateProblem(network, evidence, frozenset({1}))
        region = posterior_set(problem)
        if isinstance(region, EmptyRegion) or geo.is_empty(region) is Verdict.TRUE:
            out.write("posterior EMPTY\n")
        else:
            _emit_region(out, region, label="posterior")
        _emit_estimate(out, point_estimate_lp(problem), {1})
        return EXIT_OK
    raise _UsageError(f"unknown figure {name!r}")  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
