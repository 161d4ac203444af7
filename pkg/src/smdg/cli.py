"""Command-line interface.

Exit codes: 0 success / affirmative verdict, 1 negative verdict, 2 degenerate
(functionally determined query or zero-probability selection), 3 proof not
found, 64 usage error, 65 invalid input. All commands are deterministic:
identical inputs produce bit-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import canon, enumeration, io as graph_io, model as model_mod, oracle, project, rewrite, sep
from .graph import GraphError, PartitionedDag, SmDG
from .model import ModelError, SelectedOutError
from .project import NotLiftableError

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_DEGENERATE = 2
EXIT_NOT_FOUND = 3
EXIT_USAGE = 64
EXIT_INVALID = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphError(f"cannot read {path}: {exc}") from exc


def _emit(text: str, out: Optional[str], quiet: bool) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        if not quiet:
            print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _graph_text(value, fmt: str) -> str:
    return graph_io.to_dot(value) if fmt == "dot" else graph_io.dumps(value)


def _dag_arg(path: str) -> PartitionedDag:
    value = graph_io.graph_from_obj(_read_json(path))
    if not isinstance(value, PartitionedDag):
        raise GraphError(f"{path} holds an smDG where a partitioned DAG was expected")
    return value


def _smdg_arg(path: str) -> SmDG:
    value = graph_io.graph_from_obj(_read_json(path))
    if not isinstance(value, SmDG):
        raise GraphError(f"{path} holds a partitioned DAG where an smDG was expected")
    return value


# --- subcommands -------------------------------------------------------------


def _cmd_canon(args) -> int:
    d = _dag_arg(args.graph)
    report = canon.canonicalize(d)
    if args.report:
        steps = [{"op": name, "args": list(params)} for name, params in report.steps]
        _emit(json.dumps(steps, indent=2) + "\n", args.report, args.quiet)
    _emit(_graph_text(report.output, args.format), args.output, args.quiet)
    if args.check and report.output != d:
        return EXIT_NEGATIVE
    return EXIT_OK


def _cmd_project(args) -> int:
    d = _dag_arg(args.graph)
    _emit(_graph_text(project.slp(d), args.format), args.output, args.quiet)
    return EXIT_OK


def _cmd_lift(args) -> int:
    g = _smdg_arg(args.graph)
    try:
        d = project.lift(g)
    except NotLiftableError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NEGATIVE
    _emit(_graph_text(d, args.format), args.output, args.quiet)
    return EXIT_OK


def _cmd_equiv_oad(args) -> int:
    d1, d2 = _dag_arg(args.graph1), _dag_arg(args.graph2)
    equivalent = project.observe_and_do_equivalent(d1, d2)
    if not args.quiet:
        print("equivalent" if equivalent else "not equivalent")
    return EXIT_OK if equivalent else EXIT_NEGATIVE


def _split_names(text: Optional[str]) -> list[str]:
    if not text:
        return []
    return [part for part in text.split(",") if part]


def _cmd_sep(args) -> int:
    value = graph_io.graph_from_obj(_read_json(args.graph))
    query = sep.SeparationQuery.of(
        _split_names(args.x), _split_names(args.y), _split_names(args.z)
    )
    if args.criterion == "sm":
        if not isinstance(value, SmDG):
            raise GraphError("criterion sm needs an smDG input")
        verdict = sep.sm_separated(value, query)
    elif args.criterion == "D":
        if not isinstance(value, PartitionedDag):
            raise GraphError("criterion D needs a partitioned DAG input")
        verdict = sep.D_separated(value, query)
    else:
        if not isinstance(value, PartitionedDag):
            raise GraphError("criterion d needs a partitioned DAG input")
        verdict = (
            sep.Verdict.SEPARATED if sep.d_separated(value, query) else sep.Verdict.CONNECTED
        )
    print(verdict.value)
    return {
        sep.Verdict.SEPARATED: EXIT_OK,
        sep.Verdict.CONNECTED: EXIT_NEGATIVE,
        sep.Verdict.DETERMINED: EXIT_DEGENERATE,
    }[verdict]


def _cmd_eval(args) -> int:
    m = model_mod.model_from_obj(_read_json(args.model))
    q = model_mod.prob_table_from_obj(_read_json(args.q)) if args.q else None
    try:
        if args.mode == "smo":
            res = model_mod.smo_distribution(m)
            payload = {
                "distribution": model_mod.prob_table_to_obj(res.dist),
                "selection_probability": str(res.selection_probability),
            }
        elif args.mode == "smi":
            if q is None:
                raise ModelError("eval smi needs --q")
            res = model_mod.smi_distribution(m, q)
            if res.status != "ok":
                print("selected-out: the intervention removes all data", file=sys.stderr)
                return EXIT_DEGENERATE
            payload = {
                "q": model_mod.prob_table_to_obj(res.q),
                "distribution": model_mod.prob_table_to_obj(res.dist),
                "selection_probability": str(res.selection_probability),
            }
        else:
            z = _split_names(args.z)
            res = model_mod.observe_or_do_distribution(m, z, q)
            payload = {
                "distribution": model_mod.prob_table_to_obj(res.dist),
                "selection_probability": str(res.selection_probability),
            }
    except SelectedOutError as exc:
        print(f"selected-out: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output, args.quiet)
    return EXIT_OK


def _cmd_equiv_obs(args) -> int:
    g1, g2 = _smdg_arg(args.graph1), _smdg_arg(args.graph2)
    res = rewrite.search_equivalence(g1, g2, depth=args.depth)
    if res.proof is None:
        print(res.diagnostic, file=sys.stderr)
        return EXIT_NOT_FOUND
    steps = [
        {"rule": s.rule, "params": _jsonable(s.params), "direction": s.direction}
        for s in res.proof.steps
    ]
    _emit(json.dumps(steps, indent=2) + "\n", args.proof, args.quiet)
    return EXIT_OK


def _jsonable(value):
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in value]
    return value


def _parse_support_points(items) -> list[oracle.SupportPoint]:
    return [
        oracle.SupportPoint.of(entry["assignment"], entry.get("intervened", ()))
        for entry in items
    ]


def _cmd_oracle_support(args) -> int:
    structure = _read_json(args.structure)
    fs = oracle.FactorizationStructure.of(structure["variables"], structure["factors"])
    query_obj = _read_json(args.query)
    query = oracle.SupportQuery.of(
        _parse_support_points(query_obj.get("required", [])),
        _parse_support_points(query_obj.get("forbidden", [])),
    )
    res = oracle.support_feasible(fs, query)
    if res.feasible:
        payload = {
            "feasible": True,
            "positive_cells": sorted(
                [name, list(key)] for name, key in res.witness
            ),
        }
    else:
        payload = {
            "feasible": False,
            "certificate": {
                "assignment": dict(res.certificate.assignment),
                "intervened": sorted(res.certificate.intervened),
            },
        }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output, args.quiet)
    return EXIT_OK if res.feasible else EXIT_NEGATIVE


def _cmd_oracle_witness(args) -> int:
    d = graph_io.graph_from_obj(_read_json(args.graph))
    kind = args.kind
    if kind == "self-loop":
        if not isinstance(d, PartitionedDag):
            raise GraphError("self-loop witnesses need a partitioned DAG input")
        model = oracle.witness_self_loop(d)
        expected = {
            "kind": "self-loop",
            "natural_zero_given_selection": "0",
            "natural_zero_given_selection_do_0": "0",
            "natural_zero_given_selection_do_1": "1/4",
        }
        payload = {"model": model_mod.model_to_obj(_plainify(model)), "expected": expected}
    elif kind == "edge":
        pair = _split_names(args.pair)
        if len(pair) != 2:
            a, b = _first_visible_edge(d)
        else:
            a, b = pair
        data, plain, special = oracle.witness_directed_edge(a, b)
        expected = {
            "kind": "edge",
            "tail": data.tail,
            "head": data.head,
            "do_tail_copies": True,
            "do_head_leaves_tail_zero": True,
        }
        payload = {
            "plain_model": model_mod.model_to_obj(plain),
            "special_model": model_mod.model_to_obj(special),
            "expected": expected,
        }
    elif kind == "marginal":
        face = _split_names(args.face) or _default_marginal_face(d)
        model = oracle.witness_marginal_face(face)
        expected = {
            "kind": "marginal",
            "face": sorted(set(face)),
            "selected_distribution": "half all-zero, half all-one; marginals "
            "invariant under interventions on members",
        }
        payload = {"model": model_mod.model_to_obj(model), "expected": expected}
    else:
        face = _split_names(args.face) or _default_selected_face(d)
        model = oracle.witness_selected_face(face)
        expected = {
            "kind": "selected",
            "face": sorted(set(face)),
            "selected_distribution": "uniform over even-parity assignments "
            "under independent fair interventions",
        }
        payload = {"model": model_mod.model_to_obj(model), "expected": expected}
    if args.expected:
        _emit(json.dumps(payload["expected"], indent=2, sort_keys=True) + "\n",
              args.expected, args.quiet)
        payload = {k: v for k, v in payload.items() if k != "expected"}
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.output, args.quiet)
    return EXIT_OK


def _plainify(model):
    """Re-index tuple-valued domains to 0..k-1 so the model serializes."""
    domains = {}
    kernels = {}
    zeros = {}
    mapping = {}
    for v, dom in model.domains:
        mapping[v] = {value: i for i, value in enumerate(dom)}
        domains[v] = tuple(range(len(dom)))
    for v, kern in model.kernels:
        rows = {}
        for key, vec in kern.rows:
            new_key = tuple(mapping[p][val] for p, val in zip(kern.parents, key))
            rows[new_key] = vec
        kernels[v] = model_mod.KernelTable.of(kern.parents, rows)
    for v, zero in model.selected_zeros:
        zeros[v] = mapping[v][zero]
    return model_mod.DiscreteModel.of(model.dag, domains, kernels, zeros)


def _first_visible_edge(d):
    if isinstance(d, PartitionedDag):
        for a, b in d.edges:
            if a in d.visible and b in d.visible:
                return a, b
    else:
        for a, b in sorted(d.edges):
            return a, b
    raise GraphError("no visible edge to witness; pass --pair a,b")


def _default_marginal_face(d):
    if isinstance(d, SmDG):
        faces = d.marginal_system.sorted_faces()
        if faces:
            return list(faces[0])
    else:
        for m in sorted(d.marginalized):
            vis = sorted(d.children_of(m) & d.visible)
            if vis:
                return vis
    raise GraphError("no marginal face to witness; pass --face v1,v2")


def _default_selected_face(d):
    if isinstance(d, SmDG):
        faces = d.selected_system.sorted_faces()
        if faces:
            return list(faces[0])
    else:
        for s in sorted(d.selected):
            vis = sorted(d.parents_of(s) & d.visible)
            if vis:
                return vis
    raise GraphError("no selected face to witness; pass --face v1,v2")


def _cmd_enumerate(args) -> int:
    if args.kind == "smdgs":
        bounds = enumeration.SmdgBounds.default_for(args.n_visible)
        if args.max_edges is not None:
            bounds = enumeration.SmdgBounds(
                max_edges=args.max_edges,
                max_face_size=bounds.max_face_size,
                systems=bounds.systems,
            )
        stream = enumeration.enumerate_smdgs(
            args.n_visible, bounds, liftable_only=args.liftable_only
        )
        for g in stream:
            sys.stdout.write(json.dumps(graph_io.smdg_to_obj(g), sort_keys=True) + "\n")
    else:
        stream = enumeration.enumerate_partitioned_dags(
            args.n_visible, args.n_marginalized, args.n_selected
        )
        for d in stream:
            sys.stdout.write(json.dumps(graph_io.dag_to_obj(d), sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="smdg", description=__doc__)
    parser.add_argument("--format", choices=["json", "dot"], default="json")
    parser.add_argument("--seed", type=int, default=0,
                        help="reserved for randomized subcommands; outputs are deterministic")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", help="canonicalize a partitioned DAG")
    p.add_argument("graph")
    p.add_argument("-o", "--output")
    p.add_argument("--report", help="write the rewrite steps to this path")
    p.add_argument("--check", action="store_true",
                   help="exit 1 when the input is not already canonical")
    p.set_defaults(fn=_cmd_canon)

    p = sub.add_parser("project", help="selected-latent projection of a DAG")
    p.add_argument("graph")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_project)

    p = sub.add_parser("lift", help="canonical DAG of a liftable smDG")
    p.add_argument("graph")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_lift)

    p = sub.add_parser("equiv-oad", help="interventional equivalence of two DAGs")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.set_defaults(fn=_cmd_equiv_oad)

    p = sub.add_parser("sep", help="separation verdicts")
    p.add_argument("graph")
    p.add_argument("--criterion", choices=["d", "D", "sm"], required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--z", default="")
    p.set_defaults(fn=_cmd_sep)

    p = sub.add_parser("eval", help="exact selected distributions of a model")
    p.add_argument("mode", choices=["smo", "smi", "ood"])
    p.add_argument("model")
    p.add_argument("--q", help="intervention distribution (JSON)")
    p.add_argument("--z", default="", help="intervened variables for ood")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("equiv-obs", help="search an observational-equivalence proof")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--proof", help="write the proof steps to this path")
    p.set_defaults(fn=_cmd_equiv_obs)

    p_oracle = sub.add_parser("oracle", help="support decisions and witness models")
    oracle_sub = p_oracle.add_subparsers(dest="oracle_command", required=True)
    p = oracle_sub.add_parser("support")
    p.add_argument("structure")
    p.add_argument("query")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_oracle_support)
    p = oracle_sub.add_parser("witness")
    p.add_argument("kind", choices=["self-loop", "edge", "marginal", "selected"])
    p.add_argument("graph")
    p.add_argument("-o", "--output")
    p.add_argument("--expected", help="write the expected data to this path")
    p.add_argument("--pair", help="tail,head for edge witnesses")
    p.add_argument("--face", help="comma-separated face members")
    p.set_defaults(fn=_cmd_oracle_witness)

    p = sub.add_parser("enumerate", help="stream small graphs as NDJSON")
    p.add_argument("kind", choices=["dags", "smdgs"])
    p.add_argument("--n-visible", type=int, required=True)
    p.add_argument("--n-marginalized", type=int, default=1)
    p.add_argument("--n-selected", type=int, default=1)
    p.add_argument("--max-edges", type=int, default=None)
    p.add_argument("--liftable-only", action="store_true")
    p.set_defaults(fn=_cmd_enumerate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (GraphError, ModelError, oracle.OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
