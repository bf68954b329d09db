"""Possibility inference: structural patterns that suggest what *might* hold.

Nothing here adds links to a graph.  Each generator returns hypotheses that
name the links they were read from, so a caller can always trace a suggestion
back to the statements that produced it.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .analysis import supernodes
from .core import Graph, Link, LinkFamily, MetaType, SignedLinkType

KINDS = (
    "might-be-near",
    "event-copresence",
    "might-have-property",
    "functional-equivalence",
    "invalid-generalization",
)
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}

PARTIAL_WARNING = "partial but not complete equivalence"
UNANIMOUS = "unanimous members"


@dataclass(frozen=True)
class Hypothesis:
    kind: str
    subjects: tuple[int, ...]
    basis: tuple[Link, ...]
    tier: str = "possible"
    scale: int | None = None
    annotations: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.tier not in ("possible", "invalid"):
            raise ValueError(f"unknown tier {self.tier!r}")
        if (self.tier == "invalid") != (self.kind == "invalid-generalization"):
            raise ValueError("only invalid-generalization hypotheses carry the invalid tier")

    @property
    def sort_key(self) -> tuple:
        return (
            _KIND_RANK[self.kind],
            self.subjects,
            -1 if self.scale is None else self.scale,
            tuple((l.src, l.typ.sort_key, l.dst, l.label) for l in self.basis),
        )

    def as_dict(self, g: Graph) -> dict:
        def name(nid: int) -> str:
            return g.node(nid).proper_name

        return {
            "kind": self.kind,
            "tier": self.tier,
            "subjects": [name(n) for n in self.subjects],
            "scale": None if self.scale is None else name(self.scale),
            "basis": [
                {"src": name(l.src), "label": l.label, "type": str(l.typ), "dst": name(l.dst)}
                for l in self.basis
            ],
            "annotations": list(self.annotations),
        }


def _sorted(hs: Iterable[Hypothesis]) -> list[Hypothesis]:
    return sorted(hs, key=lambda h: h.sort_key)


def _first_links(g: Graph, family: LinkFamily) -> dict[tuple[int, int], Link]:
    """First stored link (in canonical order) for each forward-read pair."""
    out: dict[tuple[int, int], Link] = {}
    for link in g.ordered_links():
        if link.family is not family:
            continue
        fwd = link.canonical()
        out.setdefault((fwd.src, fwd.dst), link)
    return out


def _members(g: Graph) -> dict[int, dict[int, Link]]:
    """container -> {member -> supporting link}, self-containment ignored."""
    table: dict[int, dict[int, Link]] = defaultdict(dict)
    for (a, m), link in _first_links(g, LinkFamily.C).items():
        if a != m:
            table[a][m] = link
    return table


def _near_pairs(g: Graph) -> dict[frozenset[int], Link]:
    out: dict[frozenset[int], Link] = {}
    for (a, b), link in _first_links(g, LinkFamily.N).items():
        if a != b:
            out.setdefault(frozenset((a, b)), link)
    return out


def infer_proximity(g: Graph) -> list[Hypothesis]:
    """Members of a common container might be near one another at its scale."""
    near = _near_pairs(g)
    hs = []
    for a, members in _members(g).items():
        for x, y in combinations(sorted(members), 2):
            if frozenset((x, y)) in near:
                continue
            hs.append(Hypothesis("might-be-near", (x, y), (members[x], members[y]), scale=a))
    return _sorted(hs)


def infer_event_copresence(g: Graph) -> list[Hypothesis]:
    """Things taking part in the same event were together on that occasion."""
    hs = []
    for e, members in _members(g).items():
        if g.node(e).meta is not MetaType.EVENT:
            continue
        things = sorted(m for m in members if g.node(m).meta is MetaType.THING)
        for x, y in combinations(things, 2):
            hs.append(Hypothesis("event-copresence", (x, y), (members[x], members[y]), scale=e))
    return _sorted(hs)


def infer_property_inheritance(g: Graph) -> list[Hypothesis]:
    """Properties passed down from containers and across one NEAR hop.

    Only downward inheritance is proposed: a container never acquires a
    property from its members here.
    """
    props = _first_links(g, LinkFamily.E)
    has: dict[int, dict[int, Link]] = defaultdict(dict)
    for (x, p), link in props.items():
        has[x][p] = link
    hs = []
    for a, members in _members(g).items():
        for p, plink in has.get(a, {}).items():
            for m, clink in members.items():
                if m == p or p in has.get(m, {}):
                    continue
                hs.append(Hypothesis(
                    "might-have-property", (m, p), (plink, clink),
                    scale=a, annotations=("inherited from container",),
                ))
    for pair, nlink in _near_pairs(g).items():
        x, y = sorted(pair)
        for src, dst in ((x, y), (y, x)):
            for p, plink in has.get(src, {}).items():
                if dst == p or p in has.get(dst, {}):
                    continue
                hs.append(Hypothesis(
                    "might-have-property", (dst, p), (plink, nlink),
                    annotations=("shared by a near node",),
                ))
    return _sorted(hs)


def _as_forward_e(g: Graph, proposed: Sequence) -> tuple[int, int] | None:
    src, typ, dst = proposed
    if not isinstance(typ, SignedLinkType):
        typ = g.aliases.resolve(typ)
    if typ.family is not LinkFamily.E:
        return None
    return (src, dst) if typ.orientation > 0 else (dst, src)


def flag_invalid_generalizations(
    g: Graph,
    proposed: Sequence,
    independent_basis: Iterable[Link] = (),
) -> Hypothesis | None:
    """Judge a would-be ``container expresses P`` link justified by members.

    ``proposed`` is a ``(src, type_or_label, dst)`` triple of node ids.  The
    result is an invalid-tier hypothesis when some member of the container
    expresses P, or None when the pattern does not apply: the proposal is not
    an expresses link, no member supports it, or an independent basis is given.
    """
    pair = _as_forward_e(g, proposed)
    if pair is None or any(True for _ in independent_basis):
        return None
    a, p = pair
    members = _members(g).get(a, {})
    props = _first_links(g, LinkFamily.E)
    backing = sorted(m for m in members if (m, p) in props)
    if not backing:
        return None
    basis = []
    for m in backing:
        basis += [props[(m, p)], members[m]]
    notes = ["upward generalization from member properties"]
    if len(backing) == len(members):
        notes.append(UNANIMOUS)
    return Hypothesis(
        "invalid-generalization", (a, p), tuple(basis),
        tier="invalid", scale=a, annotations=tuple(notes),
    )


def infer_equivalence(g: Graph) -> list[Hypothesis]:
    """Functional equivalence from identical link signatures, family by family."""
    hs = []
    for family in LinkFamily:
        for grp in supernodes(g, family):
            basis = tuple(
                l for l in g.ordered_links()
                if l.family is family and (l.src in grp.members or l.dst in grp.members)
            )
            notes = [f"family {family.value}"]
            if grp.partial:
                notes.append(PARTIAL_WARNING)
                notes += [f"differs in {f.value}" for f in grp.differing_families]
                if grp.weights_differ:
                    notes.append("link weights differ")
            hs.append(Hypothesis(
                "functional-equivalence", tuple(sorted(grp.members)), basis,
                annotations=tuple(notes),
            ))
    return _sorted(hs)


def infer_all(g: Graph) -> list[Hypothesis]:
    return _sorted(
        infer_proximity(g) + infer_event_copresence(g)
        + infer_property_inheritance(g) + infer_equivalence(g)
    )
