"""Warnings for graphs that type-check but are probably not what was meant.

The transition table only decides whether a link is possible.  These checks
look at slightly larger patterns that are legal yet suspicious.
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .core import Graph, Link, LinkFamily, MetaType
from .inference import PARTIAL_WARNING, flag_invalid_generalizations, infer_equivalence

RULES = (
    "self-loop",
    "thing-likeness",
    "ungrounded-concept",
    "upward-generalization",
    "partial-equivalence",
)


@dataclass(frozen=True)
class LintWarning:
    rule: str
    message: str
    nodes: tuple[int, ...]
    line: int | None = None

    def as_dict(self, g: Graph) -> dict:
        return {
            "rule": self.rule,
            "message": self.message,
            "nodes": [g.node(n).proper_name for n in self.nodes],
            "line": self.line,
        }


def _line(g: Graph, link: Link) -> int | None:
    return g.origins.get(link.quad)


def _self_loops(g: Graph) -> list[LintWarning]:
    return [
        LintWarning("self-loop", f"{g.describe(l)} links a node to itself", (l.src,), _line(g, l))
        for l in g.ordered_links() if l.src == l.dst
    ]


def _thing_likeness(g: Graph) -> list[LintWarning]:
    out = []
    for l in g.ordered_links():
        if l.family is LinkFamily.N and l.src != l.dst and g.node(l.src).meta is MetaType.THING:
            out.append(LintWarning(
                "thing-likeness",
                f"{g.describe(l)}: two distinct things are compared directly; "
                "a likeness usually belongs to concepts such as their appearance",
                (l.src, l.dst), _line(g, l),
            ))
    return out


def _ungrounded(g: Graph) -> list[LintWarning]:
    ug = nx.Graph()
    for l in g.links:
        ug.add_edge(l.src, l.dst)
    out = []
    pos = {n.id: i for i, n in enumerate(g.ordered_nodes())}
    comps = sorted(nx.connected_components(ug), key=lambda c: min(pos[n] for n in c))
    for comp in comps:
        if all(g.node(n).meta is MetaType.CONCEPT for n in comp):
            members = tuple(sorted(comp, key=pos.__getitem__))
            lines = sorted(
                ln for l in g.links if l.src in comp
                if (ln := _line(g, l)) is not None
            )
            out.append(LintWarning(
                "ungrounded-concept",
                "concepts linked only to other concepts, with no event or thing to anchor them",
                members, lines[0] if lines else None,
            ))
    return out


def _upward(g: Graph) -> list[LintWarning]:
    out = []
    for l in g.ordered_links():
        if l.family is not LinkFamily.E:
            continue
        h = flag_invalid_generalizations(g, (l.src, l.typ, l.dst))
        if h is None:
            continue
        a, p = h.subjects
        note = " (all members share it: induction, not deduction)" if "unanimous members" in h.annotations else ""
        out.append(LintWarning(
            "upward-generalization",
            f"{g.describe(l)}: property of the container appears to be generalized from "
            f"its members{note}",
            (a, p), _line(g, l),
        ))
    return out


def _partial(g: Graph) -> list[LintWarning]:
    return [
        LintWarning(
            "partial-equivalence",
            f"{', '.join(g.node(n).proper_name for n in h.subjects)}: {PARTIAL_WARNING} "
            f"({'; '.join(h.annotations)})",
            h.subjects,
        )
        for h in infer_equivalence(g) if PARTIAL_WARNING in h.annotations
    ]


def lint(g: Graph) -> list[LintWarning]:
    """Run every check; warnings are ordered by rule, then source line."""
    found = _self_loops(g) + _thing_likeness(g) + _ungrounded(g) + _upward(g) + _partial(g)
    rank = {r: i for i, r in enumerate(RULES)}
    return sorted(found, key=lambda w: (rank[w.rule], w.line if w.line is not None else -1, w.nodes))
