"""Batch command-line front end.

Exit codes are a stable contract:

  0  clean run
  1  type violations (forbidden transitions, bad weights, duplicate links)
  2  parse errors (syntax, unknown labels, unresolved endpoints)
  3  I/O failure
  4  usage error, including an unknown export format
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .analysis import absorbing_regions, classify_roles, self_loops, supernodes, trace, trace_is_legal
from .core import (
    AliasTable,
    DuplicateLink,
    ForbiddenTransition,
    Graph,
    InvalidWeight,
    LinkFamily,
    SSTError,
    UnknownAlias,
)
from .export import GraphDocumentError, display_names, from_json, to_csv, to_dot, to_json
from .inference import infer_all
from .lint import lint
from .matrix import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SINGULAR_TOL,
    ZeroMatrix,
    adjacency,
    check_factorization,
    flow_weights,
    join_report,
    node_entropy_delta,
    principal_eigenvector,
    singularity_report,
)
from .notation import BuildErrors, NotationErrors, alias_table_from, build, parse

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_TYPE, EXIT_PARSE, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3, 4
FORMATS = ("dot", "json", "csv-adjacency")
FAMILY_CHOICES = ("L", "C", "E", "N", "all")
_PARSE_CODES = {"UndeclaredEndpoint", "AmbiguousEndpoint", "UnknownAlias", "ParseError", "DocumentError"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means parse errors here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Failure(Exception):
    """Carries an exit code and the diagnostics that explain it."""

    def __init__(self, code: int, diagnostics: list[dict]) -> None:
        super().__init__(code)
        self.code = code
        self.diagnostics = diagnostics


# -- loading ------------------------------------------------------------------

def _io_fail(path: str, exc: Exception) -> Failure:
    return Failure(EXIT_IO, [{"code": "IOError", "message": f"{path}: {exc}", "line": None,
                              "column": None, "offending_text": "", "rule": None}])


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _io_fail(path, exc) from None


def _diag(code: str, message: str, line=None, column=None, text="", rule=None) -> dict:
    return {"code": code, "message": message, "line": line, "column": column,
            "offending_text": text, "rule": rule}


def _find_pyproject(start: Path) -> Path | None:
    for d in (start, *start.parents):
        p = d / "pyproject.toml"
        if p.is_file():
            return p
    return None


def _alias_file(path: str) -> AliasTable:
    try:
        return alias_table_from(_read(path), path)
    except NotationErrors as exc:
        raise Failure(EXIT_PARSE, [
            _diag("ParseError", f"{path}: {e.message}", e.line, e.column, e.offending_text) for e in exc.errors
        ]) from None


def resolve_aliases(flag: str | None, cwd: Path | None = None) -> AliasTable:
    """defaults < pyproject [tool.sst.aliases] < $SST_ALIASES file < --aliases file"""
    table = AliasTable.default()
    pyproject = _find_pyproject(cwd or Path.cwd())
    if pyproject is not None:
        try:
            cfg = tomllib.loads(pyproject.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError) as exc:
            raise _io_fail(str(pyproject), exc) from None
        except tomllib.TOMLDecodeError as exc:
            raise Failure(EXIT_PARSE, [_diag("ParseError", f"{pyproject}: {exc}")]) from None
        entries = cfg.get("tool", {}).get("sst", {}).get("aliases", {})
        extra = AliasTable()
        for label, typ in entries.items():
            try:
                extra.register(label, typ)
            except (ValueError, SSTError) as exc:
                raise Failure(EXIT_PARSE, [_diag("ParseError", f"{pyproject}: alias {label!r}: {exc}")]) from None
        table = table.overlay(extra)
    env = os.environ.get("SST_ALIASES")
    if env:
        table = table.overlay(_alias_file(env))
    if flag:
        table = table.overlay(_alias_file(flag))
    return table


def load_graph(path: str, aliases: AliasTable) -> tuple[Graph, int]:
    """Graph plus statement count; raises Failure with diagnostics."""
    text = _read(path)
    if text.lstrip().startswith("{"):
        try:
            g = from_json(text, aliases)
        except GraphDocumentError as exc:
            raise Failure(EXIT_PARSE, [_diag("DocumentError", str(exc))]) from None
        except UnknownAlias as exc:
            raise Failure(EXIT_PARSE, [_diag("UnknownAlias", str(exc))]) from None
        except ForbiddenTransition as exc:
            raise Failure(EXIT_TYPE, [_diag("ForbiddenTransition", str(exc), rule=exc.rule)]) from None
        except (InvalidWeight, DuplicateLink) as exc:
            raise Failure(EXIT_TYPE, [_diag(type(exc).__name__, str(exc))]) from None
        except SSTError as exc:
            raise Failure(EXIT_PARSE, [_diag("DocumentError", str(exc))]) from None
        return g, len(g.nodes) + len(g.links)
    try:
        doc = parse(text, path)
    except NotationErrors as exc:
        raise Failure(EXIT_PARSE, [
            _diag("ParseError", e.message, e.line, e.column, e.offending_text) for e in exc.errors
        ]) from None
    try:
        g = build(doc, aliases)
    except BuildErrors as exc:
        diags = [d.as_dict() for d in exc.diagnostics]
        code = EXIT_PARSE if any(d.code in _PARSE_CODES for d in exc.diagnostics) else EXIT_TYPE
        raise Failure(code, diags) from None
    return g, len(doc.statements)


# -- reports ------------------------------------------------------------------

def _families(choice: str) -> list[LinkFamily]:
    return list(LinkFamily) if choice == "all" else [LinkFamily(choice)]


def _family_filter(choice: str) -> LinkFamily | None:
    return None if choice == "all" else LinkFamily(choice)


def _names(g: Graph, ids) -> list[str]:
    names = display_names(g)
    order = {n.id: i for i, n in enumerate(g.ordered_nodes())}
    return [names[i] for i in sorted(ids, key=order.__getitem__)]


def section_validate(g: Graph, statements: int, args) -> dict:
    return {"statements": statements, "nodes": len(g.nodes), "links": len(g.links)}


def section_rank(g: Graph, args) -> dict:
    if not g.nodes:
        return {"warnings": ["graph is empty; nothing to rank"], "scores": []}
    A = adjacency(g, _family_filter(args.family))
    try:
        res = principal_eigenvector(A, args.damping, args.tol, args.max_iter)
    except ZeroMatrix:
        return {"warnings": ["no links of the requested family; nothing to rank"], "scores": []}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = display_names(g)
    warnings = list(res.warnings)
    if res.absorbing and not res.damped:
        warnings.append("suggestion: rerun with --damping 0.85")
    return {
        "family": args.family,
        "damping": args.damping,
        "tol": args.tol,
        "eigenvalue": res.eigenvalue,
        "iterations": res.iterations,
        "residual": res.residual,
        "converged": res.converged,
        "degenerate": res.degenerate,
        "absorbing": [names[n] for n in res.absorbing],
        "warnings": warnings,
        "scores": [{"node": names[n], "score": float(x)} for n, x in zip(res.vector.node_order, res.vector.values)],
    }


def section_entropy(g: Graph, args) -> dict:
    names = display_names(g)
    rows = []
    for fam in _families(args.family):
        for n in g.ordered_nodes():
            inc, out = flow_weights(g, n.id, fam)
            if not inc and not out:
                continue
            rows.append({
                "node": names[n.id], "family": fam.value,
                "in_degree": len(inc), "out_degree": len(out),
                "delta": node_entropy_delta(g, n.id, fam),
            })
    return {"family": args.family, "nodes": rows}


def section_analyze(g: Graph, args) -> dict:
    names = display_names(g)
    out: dict[str, Any] = {"roles": [], "absorbing_regions": [], "supernodes": [], "singularity": [],
                           "self_loops": [g.describe(l) for l in self_loops(g)]}
    for fam in _families(args.family):
        for r in classify_roles(g, fam):
            out["roles"].append({"node": names[r.node], "family": fam.value, "roles": sorted(r.roles),
                                 "in_degree": r.in_degree, "out_degree": r.out_degree})
        for reg in absorbing_regions(g, fam):
            out["absorbing_regions"].append({"family": fam.value, "nodes": _names(g, reg.nodes)})
        for grp in supernodes(g, fam):
            out["supernodes"].append({
                "family": fam.value, "members": _names(g, grp.members), "partial": grp.partial,
                "differing_families": [f.value for f in grp.differing_families],
                "weights_differ": grp.weights_differ,
            })
        A = adjacency(g, fam)
        if A.size:
            rep = singularity_report(A)
            out["singularity"].append({
                "family": fam.value, "determinant": float(rep.determinant), "invertible": rep.invertible,
                "zero_rows": [names[n] for n in rep.zero_rows], "zero_cols": [names[n] for n in rep.zero_cols],
            })
    if args.trace_from is not None:
        start = g.find(args.trace_from)
        if start is None:
            raise UsageError(f"--trace-from: no unique node named {args.trace_from!r}")
        out["traces"] = [
            {"family": t.family.value, "path": [names[n] for n in t.path], "termination": t.termination,
             "terminal": t.terminal, "terminal_as_expected": t.terminal_as_expected,
             "legal": trace_is_legal(g, t)}
            for fam in _families(args.family)
            for t in trace(g, start, fam, args.direction, args.budget)
            if len(t.path) > 1
        ]
    return out


def section_infer(g: Graph, args) -> dict:
    return {"hypotheses": [h.as_dict(g) for h in infer_all(g)]}


def section_lint(g: Graph, args) -> dict:
    return {"warnings": [w.as_dict(g) for w in lint(g)]}


def section_skeleton(args) -> dict:
    return {"factorization": check_factorization().as_dict(), "join": join_report()}


def make_report(command: str, input_name: str | None, diagnostics: list[dict],
                sections: dict, exit_code: int, timestamp: bool = True) -> dict:
    report: dict[str, Any] = {"tool_version": __version__}
    if timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    report.update({
        "command": command,
        "input": input_name,
        "exit_code": exit_code,
        "diagnostics": diagnostics,
        "sections": sections,
    })
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--aliases", metavar="FILE",
                        help="extra alias file (overrides $SST_ALIASES and [tool.sst.aliases] in pyproject.toml)")
    common.add_argument("-o", "--output", metavar="FILE", help="write output here instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit generated_at from the report header")

    p = _Parser(prog="sst", description="Validate and analyse typed semantic graphs.",
                epilog="exit codes: 0 clean, 1 type violations, 2 parse errors, 3 I/O failure, 4 usage error")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help: str, with_file: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help, description=help,
                            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        if with_file:
            sp.add_argument("file", help=".sst notation file or JSON graph document")
        return sp

    add("validate", "parse and type-check a graph file")

    sp = add("export", "write the graph as DOT, canonical JSON or a CSV adjacency matrix")
    sp.add_argument("--format", default="json", help=f"one of {', '.join(FORMATS)}")
    sp.add_argument("--family", choices=FAMILY_CHOICES, default="all", help="restrict to one link family")

    sp = add("rank", "importance ranking from the principal eigenvector")
    sp.add_argument("--damping", type=float, default=None,
                    help="damping factor d in (0,1]; without it absorbing nodes make the ranking degenerate")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance")
    sp.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="iteration cap")
    sp.add_argument("--family", choices=FAMILY_CHOICES, default="all", help="link family to rank over")

    sp = add("entropy", "per-node entropy change between inflow and outflow")
    sp.add_argument("--family", choices=FAMILY_CHOICES, default="all", help="link family")

    sp = add("analyze", f"roles, absorbing regions, supernodes and singularity (tolerance {SINGULAR_TOL:g})")
    sp.add_argument("--family", choices=FAMILY_CHOICES, default="all", help="link family")
    sp.add_argument("--trace-from", metavar="NAME", default=None, help="also trace chains from this node")
    sp.add_argument("--direction", choices=("forward", "backward"), default="forward", help="trace direction")
    sp.add_argument("--budget", type=int, default=10_000, help="hop budget for tracing")

    add("infer", "possibility hypotheses suggested by the graph structure")
    add("lint", "warnings for legal but suspicious patterns")
    add("skeleton", "factorization and join-matrix checks of the type skeleton", with_file=False)
    return p


SECTIONS = {
    "validate": None,
    "rank": section_rank,
    "entropy": section_entropy,
    "analyze": section_analyze,
    "infer": section_infer,
    "lint": section_lint,
}


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    stamp = not args.no_timestamp
    try:
        if args.command == "skeleton":
            _emit(dumps_report(make_report("skeleton", None, [], {"skeleton": section_skeleton(args)}, 0, stamp)),
                  args.output)
            return EXIT_OK
        if args.command == "export" and args.format not in FORMATS:
            print(f"sst export: unknown format {args.format!r} (choose from {', '.join(FORMATS)})", file=sys.stderr)
            return EXIT_USAGE
        aliases = resolve_aliases(args.aliases)
        g, statements = load_graph(args.file, aliases)
        if args.command == "export":
            fam = _family_filter(args.family)
            if args.format == "dot":
                text = to_dot(g, fam)
            elif args.format == "csv-adjacency":
                text = to_csv(g, fam)
            else:
                text = to_json(g if fam is None else _restrict(g, fam))
            _emit(text, args.output)
            return EXIT_OK
        if args.command == "validate":
            payload = section_validate(g, statements, args)
        else:
            payload = SECTIONS[args.command](g, args)
        report = make_report(args.command, args.file, [], {args.command: payload}, EXIT_OK, stamp)
        _emit(dumps_report(report), args.output)
        return EXIT_OK
    except Failure as f:
        for d in f.diagnostics:
            where = f"{args.file}:{d['line']}:{d['column']}: " if d.get("line") else ""
            rule = f" [{d['rule']}]" if d.get("rule") else ""
            print(f"{where}{d['code']}: {d['message']}{rule}", file=sys.stderr)
        if args.command != "export":
            report = make_report(args.command, getattr(args, "file", None), f.diagnostics, {}, f.code, stamp)
            try:
                _emit(dumps_report(report), args.output)
            except OSError:
                pass
        return f.code
    except UsageError as exc:
        print(f"sst {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sst: {exc}", file=sys.stderr)
        return EXIT_IO


def _restrict(g: Graph, family: LinkFamily) -> Graph:
    h = Graph(g.aliases)
    for n in g.nodes:
        h.add_node(n.proper_name, n.meta, n.attributes)
    for l in g.links:
        if l.family is family:
            h.add_link(h.find(g.node(l.src).proper_name, g.node(l.src).meta), l.typ,
                       h.find(g.node(l.dst).proper_name, g.node(l.dst).meta), l.weight, label=l.label)
    return h


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
