"""Typed graph model and the event/thing/concept transition algebra.

Nodes carry one of three meta-types and links one of four families.  Every
link is checked against the transition table before it is stored, so a
``Graph`` can never hold an illegal association.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterable, Iterator, Mapping


class SSTError(Exception):
    """Base class for graph construction errors."""


class UnknownAlias(SSTError, KeyError):
    def __init__(self, label: str) -> None:
        super().__init__(label)
        self.label = label

    def __str__(self) -> str:
        return f"unknown link alias {self.label!r}"


class UnknownNode(SSTError, KeyError):
    def __str__(self) -> str:
        return f"unknown node {self.args[0]!r}"


class InvalidWeight(SSTError, ValueError):
    pass


class DuplicateLink(SSTError, ValueError):
    pass


class ForbiddenTransition(SSTError):
    """Raised when a link's endpoint meta-types do not admit its type."""

    def __init__(self, src_meta: MetaType, typ: SignedLinkType, dst_meta: MetaType, rule: str) -> None:
        self.src_meta = src_meta
        self.typ = typ
        self.dst_meta = dst_meta
        self.rule = rule
        super().__init__(f"{src_meta.value} ({typ}) {dst_meta.value} is forbidden: {rule}")


class MetaType(str, Enum):
    EVENT = "event"
    THING = "thing"
    CONCEPT = "concept"

    @property
    def symbol(self) -> str:
        return self.value[0]

    @property
    def rank(self) -> int:
        return _META_RANK[self]

    @classmethod
    def parse(cls, text: str) -> MetaType:
        key = text.strip().lower()
        for m in cls:
            if key in (m.value, m.symbol):
                return m
        raise ValueError(f"unknown meta-type {text!r}")


_META_RANK = {MetaType.EVENT: 0, MetaType.THING: 1, MetaType.CONCEPT: 2}


class LinkFamily(str, Enum):
    """The four association families, ordered NEAR=0 .. EXPRESSES=3."""

    N = "N"
    L = "L"
    C = "C"
    E = "E"

    @property
    def rank(self) -> int:
        return _FAMILY_RANK[self]

    @property
    def long_name(self) -> str:
        return _FAMILY_NAMES[self]

    @property
    def symmetric(self) -> bool:
        return self is LinkFamily.N


_FAMILY_RANK = {LinkFamily.N: 0, LinkFamily.L: 1, LinkFamily.C: 2, LinkFamily.E: 3}
_FAMILY_NAMES = {
    LinkFamily.N: "near",
    LinkFamily.L: "leads to",
    LinkFamily.C: "contains",
    LinkFamily.E: "expresses",
}


@dataclass(frozen=True, order=False)
class SignedLinkType:
    """A link family with an orientation of +1, -1, or 0 (NEAR only)."""

    family: LinkFamily
    orientation: int

    def __post_init__(self) -> None:
        if self.family is LinkFamily.N:
            if self.orientation != 0:
                raise ValueError("NEAR links are symmetric (orientation 0)")
        elif self.orientation not in (1, -1):
            raise ValueError(f"{self.family.value} links need orientation +1 or -1")

    @classmethod
    def parse(cls, text: str) -> SignedLinkType:
        token = text.strip()
        if token in ("N", "0", "N0"):
            return NEAR
        m = re.fullmatch(r"([+-])([LCE])", token)
        if not m:
            raise ValueError(f"not a signed link type: {text!r}")
        return cls(LinkFamily(m.group(2)), 1 if m.group(1) == "+" else -1)

    def negate(self) -> SignedLinkType:
        if self.orientation == 0:
            return self
        return SignedLinkType(self.family, -self.orientation)

    @property
    def forward(self) -> SignedLinkType:
        return self if self.orientation >= 0 else self.negate()

    @property
    def sign(self) -> str:
        return {1: "+", -1: "-", 0: "0"}[self.orientation]

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.family.rank, -self.orientation)

    def __str__(self) -> str:
        if self.orientation == 0:
            return self.family.value
        return f"{self.sign}{self.family.value}"


NEAR = SignedLinkType(LinkFamily.N, 0)
PLUS_L = SignedLinkType(LinkFamily.L, 1)
MINUS_L = SignedLinkType(LinkFamily.L, -1)
PLUS_C = SignedLinkType(LinkFamily.C, 1)
MINUS_C = SignedLinkType(LinkFamily.C, -1)
PLUS_E = SignedLinkType(LinkFamily.E, 1)
MINUS_E = SignedLinkType(LinkFamily.E, -1)

ALL_TYPES: tuple[SignedLinkType, ...] = (PLUS_L, MINUS_L, PLUS_C, MINUS_C, PLUS_E, MINUS_E, NEAR)


def forward_type(family: LinkFamily) -> SignedLinkType:
    return NEAR if family is LinkFamily.N else SignedLinkType(family, 1)


# ---------------------------------------------------------------------------
# Transition table
# ---------------------------------------------------------------------------

_e, _t, _c = MetaType.EVENT, MetaType.THING, MetaType.CONCEPT

#: Every explicitly permitted transition with its explanation.  Reverse
#: readings are generated below, so e.g. ``t (-C) e`` follows from ``e (+C) t``.
TABLE_ROWS: tuple[tuple[MetaType, SignedLinkType, MetaType, str], ...] = (
    (_e, PLUS_L, _e, "An event can be followed by or lead to another event"),
    (_e, MINUS_L, _e, "An event can be followed by or lead to another event"),
    (_e, PLUS_C, _e, "An event can contain or be part of another event"),
    (_e, MINUS_C, _e, "An event can contain or be part of another event"),
    (_e, NEAR, _e, "An event can be similar to another event by any criterion"),
    (_e, PLUS_C, _t, "An event as a region of spacetime can contain a thing for its duration"),
    (_e, PLUS_E, _c, "An event can express a property or concept"),
    (_t, MINUS_C, _e, "A thing can be part of an event, but an event cannot be part of a thing"),
    (_t, PLUS_C, _t, "A thing can contain or be part of another thing"),
    (_t, MINUS_C, _t, "A thing can contain or be part of another thing"),
    (_t, PLUS_E, _c, "A thing can express a concept as an attribute"),
    (_t, NEAR, _t, "A thing can be close to or like another thing"),
    (_c, PLUS_E, _e, "A concept can refer to an event as an attribute"),
    (_c, MINUS_E, _e, "A concept can be an attribute of an event"),
    (_c, MINUS_E, _t, "Concepts can only be attributes expressed by things"),
    (_c, PLUS_E, _c, "A concept can have properties or be a property of something else"),
    (_c, MINUS_E, _c, "A concept can have properties or be a property of something else"),
    (_c, NEAR, _c, "A concept can be similar to another concept"),
)


def _close_under_reversal(rows: Iterable[tuple[MetaType, SignedLinkType, MetaType, str]]):
    table: dict[tuple[MetaType, SignedLinkType, MetaType], str] = {}
    for src, typ, dst, why in rows:
        table.setdefault((src, typ, dst), why)
    for (src, typ, dst), why in list(table.items()):
        table.setdefault((dst, typ.negate(), src), why)
    return table


ALLOWED: Mapping[tuple[MetaType, SignedLinkType, MetaType], str] = _close_under_reversal(TABLE_ROWS)


def allowed_transition(src_meta: MetaType, typ: SignedLinkType, dst_meta: MetaType) -> bool:
    return (src_meta, typ, dst_meta) in ALLOWED


def violated_rule(src_meta: MetaType, typ: SignedLinkType, dst_meta: MetaType) -> str | None:
    """Name the modelling rule a forbidden transition breaks, or None if legal."""
    if allowed_transition(src_meta, typ, dst_meta):
        return None
    fam = typ.family
    src, dst = (src_meta, dst_meta) if typ.orientation >= 0 else (dst_meta, src_meta)
    if fam is LinkFamily.N:
        return "Nearness only relates nodes of the same meta-type (N_e, N_t, N_c)"
    if fam is LinkFamily.L:
        return "Only events can lead to events"
    if fam is LinkFamily.C:
        if _c in (src, dst):
            return "Concepts may be expressed but not contained"
        return "A thing can be part of an event, but an event cannot be part of a thing"
    if dst is _t:
        return "Things may be contained but not expressed"
    return "Events and things express concepts, not events"


def join_types(first: LinkFamily, second: LinkFamily) -> frozenset[MetaType]:
    """Meta-types that can sit between a ``first`` arrow and a following ``second`` arrow."""
    a, b = forward_type(first), forward_type(second)
    return frozenset(
        m
        for m in MetaType
        if any(allowed_transition(s, a, m) for s in MetaType)
        and any(allowed_transition(m, b, d) for d in MetaType)
    )


def all_combinations() -> Iterator[tuple[MetaType, SignedLinkType, MetaType]]:
    return product(MetaType, ALL_TYPES, MetaType)


# ---------------------------------------------------------------------------
# Aliases
# ---------------------------------------------------------------------------

def normalize_label(label: str) -> str:
    return " ".join(label.split()).lower()


#: Default label per type, used when a link is created from a bare type.
CANONICAL_LABELS: Mapping[SignedLinkType, str] = {
    PLUS_L: "leads to",
    MINUS_L: "comes from",
    PLUS_C: "contains",
    MINUS_C: "is part of",
    PLUS_E: "expresses",
    MINUS_E: "is expressed by",
    NEAR: "is near",
}

_DEFAULT_ALIASES: dict[str, SignedLinkType] = {
    # NEAR
    "is close to": NEAR,
    "is similar to": NEAR,
    "sounds like": NEAR,
    "is correlated with": NEAR,
    "is like": NEAR,
    "looks like": NEAR,
    "resembles": NEAR,
    "sometimes confused with": NEAR,
    # LEADS TO
    "enables": PLUS_L,
    "depends on": MINUS_L,
    "causes": PLUS_L,
    "is caused by": MINUS_L,
    "precedes": PLUS_L,
    "follows": MINUS_L,
    "to the left of": PLUS_L,
    "to the right of": MINUS_L,
    "led to": PLUS_L,
    # CONTAINS
    "is a part of": MINUS_C,
    "occupies": MINUS_C,
    "surrounds": PLUS_C,
    "inside": MINUS_C,
    "generalizes": PLUS_C,
    "is an aspect of": MINUS_C,
    "exemplifies": MINUS_C,
    # EXPRESSES
    "has name or value": PLUS_E,
    "is the value of property": MINUS_E,
    "has property": PLUS_E,
    "is a property of": MINUS_E,
    "expresses attribute": PLUS_E,
    "is an attribute expressed by": MINUS_E,
    "promises": PLUS_E,
    "has approximation": PLUS_E,
    "approximates": MINUS_E,
    "has prop": PLUS_E,
    "has the property": PLUS_E,
    "may have property": PLUS_E,
    "has the attribute": PLUS_E,
    "has property of mapping to": PLUS_E,
    "is an example of": PLUS_E,
    "refers to": PLUS_E,
    "is about": PLUS_E,
}
for _typ, _label in CANONICAL_LABELS.items():
    _DEFAULT_ALIASES.setdefault(_label, _typ)


class AliasTable:
    """Case- and whitespace-insensitive map from link labels to signed types."""

    def __init__(self, entries: Mapping[str, SignedLinkType] | None = None) -> None:
        self._entries: dict[str, SignedLinkType] = {}
        for label, typ in (entries or {}).items():
            self.register(label, typ)

    @classmethod
    def default(cls) -> AliasTable:
        return cls(_DEFAULT_ALIASES)

    def register(self, label: str, typ: SignedLinkType | str) -> None:
        key = normalize_label(label)
        if not key:
            raise ValueError("alias label must not be empty")
        if isinstance(typ, str):
            typ = SignedLinkType.parse(typ)
        self._entries[key] = typ

    def resolve(self, label: str) -> SignedLinkType:
        key = normalize_label(label)
        try:
            return self._entries[key]
        except KeyError:
            pass
        try:
            return SignedLinkType.parse(label)
        except ValueError:
            raise UnknownAlias(label) from None

    def get(self, label: str) -> SignedLinkType | None:
        try:
            return self.resolve(label)
        except UnknownAlias:
            return None

    def copy(self) -> AliasTable:
        return AliasTable(self._entries)

    def overlay(self, other: AliasTable) -> AliasTable:
        merged = self.copy()
        merged._entries.update(other._entries)
        return merged

    def difference(self, base: AliasTable) -> dict[str, SignedLinkType]:
        """Entries absent from ``base`` or mapped differently there."""
        return {k: v for k, v in sorted(self._entries.items()) if base._entries.get(k) != v}

    def __contains__(self, label: object) -> bool:
        return isinstance(label, str) and normalize_label(label) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def items(self):
        return sorted(self._entries.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AliasTable) and self._entries == other._entries

    def __repr__(self) -> str:
        return f"AliasTable({len(self)} entries)"


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

@dataclass
class Node:
    id: int
    proper_name: str
    meta: MetaType
    attributes: dict[str, str] = field(default_factory=dict)

    @property
    def key(self) -> tuple[str, MetaType]:
        return (self.proper_name, self.meta)

    @property
    def sort_key(self) -> tuple[int, str]:
        return (self.meta.rank, self.proper_name)


@dataclass(frozen=True)
class Link:
    src: int
    dst: int
    typ: SignedLinkType
    label: str
    weight: float = 1.0

    @property
    def family(self) -> LinkFamily:
        return self.typ.family

    @property
    def quad(self) -> tuple[int, SignedLinkType, int, str]:
        return (self.src, self.typ, self.dst, normalize_label(self.label))

    def canonical(self) -> Link:
        """The same association read along its forward (+) orientation."""
        return reverse(self) if self.typ.orientation < 0 else self


def reverse(link: Link) -> Link:
    return Link(link.dst, link.src, link.typ.negate(), link.label, link.weight)


class Graph:
    """Nodes keyed by (proper name, meta-type) plus a validated link multiset."""

    def __init__(self, aliases: AliasTable | None = None) -> None:
        self.aliases = aliases if aliases is not None else AliasTable.default()
        self._nodes: dict[int, Node] = {}
        self._by_key: dict[tuple[str, MetaType], int] = {}
        self._links: list[Link] = []
        self._quads: set[tuple[int, SignedLinkType, int, str]] = set()
        # link quad -> source line, filled in by the notation builder
        self.origins: dict[tuple[int, SignedLinkType, int, str], int] = {}

    # -- nodes ---------------------------------------------------------
    def add_node(self, proper_name: str, meta: MetaType | str, attributes: Mapping[str, str] | None = None) -> int:
        if not proper_name or not proper_name.strip():
            raise SSTError("proper name must not be empty")
        meta = MetaType.parse(meta) if isinstance(meta, str) else meta
        key = (proper_name, meta)
        if key in self._by_key:
            nid = self._by_key[key]
            self._nodes[nid].attributes.update(attributes or {})
            return nid
        nid = len(self._nodes)
        self._nodes[nid] = Node(nid, proper_name, meta, dict(attributes or {}))
        self._by_key[key] = nid
        return nid

    def node(self, nid: int) -> Node:
        try:
            return self._nodes[nid]
        except KeyError:
            raise UnknownNode(nid) from None

    def find(self, proper_name: str, meta: MetaType | str | None = None) -> int | None:
        if meta is not None:
            meta = MetaType.parse(meta) if isinstance(meta, str) else meta
            return self._by_key.get((proper_name, meta))
        hits = [nid for (name, _), nid in self._by_key.items() if name == proper_name]
        return hits[0] if len(hits) == 1 else None

    @property
    def nodes(self) -> list[Node]:
        return list(self._nodes.values())

    def ordered_nodes(self) -> list[Node]:
        """Nodes sorted by (meta-type, proper name), the canonical order."""
        return sorted(self._nodes.values(), key=lambda n: n.sort_key)

    def __contains__(self, nid: object) -> bool:
        return nid in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    # -- links ---------------------------------------------------------
    def add_link(
        self,
        src: int,
        label_or_type: str | SignedLinkType,
        dst: int,
        weight: float = 1.0,
        *,
        label: str | None = None,
    ) -> Link:
        s, d = self.node(src), self.node(dst)
        if isinstance(label_or_type, SignedLinkType):
            typ = label_or_type
            label = label if label is not None else CANONICAL_LABELS[typ]
        else:
            typ = self.aliases.resolve(label_or_type)
            label = " ".join(label_or_type.split())
        weight = float(weight)
        if not math.isfinite(weight) or weight < 0:
            raise InvalidWeight(f"link weight must be a finite non-negative number, got {weight}")
        rule = violated_rule(s.meta, typ, d.meta)
        if rule is not None:
            raise ForbiddenTransition(s.meta, typ, d.meta, rule)
        link = Link(src, dst, typ, label, weight)
        if link.quad in self._quads:
            raise DuplicateLink(f"duplicate link {s.proper_name!r} ({label}) {d.proper_name!r}")
        self._quads.add(link.quad)
        self._links.append(link)
        return link

    @property
    def links(self) -> list[Link]:
        return list(self._links)

    def ordered_links(self) -> list[Link]:
        pos = {n.id: i for i, n in enumerate(self.ordered_nodes())}
        return sorted(
            self._links,
            key=lambda l: (pos[l.src], l.typ.sort_key, pos[l.dst], normalize_label(l.label), l.weight),
        )

    def links_of(self, family: LinkFamily) -> list[Link]:
        return [l for l in self._links if l.family is family]

    def validate(self) -> list[str]:
        """Re-check every stored link; returns a message per problem."""
        problems = []
        for l in self._links:
            if l.src not in self._nodes or l.dst not in self._nodes:
                problems.append(f"dangling link {l}")
                continue
            rule = violated_rule(self._nodes[l.src].meta, l.typ, self._nodes[l.dst].meta)
            if rule:
                problems.append(rule)
        return problems

    def describe(self, link: Link) -> str:
        s, d = self._nodes[link.src], self._nodes[link.dst]
        return f"{s.proper_name!r} ({link.label}) {d.proper_name!r}"

    def __repr__(self) -> str:
        return f"Graph({len(self._nodes)} nodes, {len(self._links)} links)"


def isomorphic(a: Graph, b: Graph) -> bool:
    """Equality of two graphs up to node ids (nodes are keyed by name and meta)."""

    def signature(g: Graph):
        nodes = sorted((n.proper_name, n.meta.value, tuple(sorted(n.attributes.items()))) for n in g.nodes)
        links = sorted(
            (
                g.node(l.src).proper_name, g.node(l.src).meta.value, str(l.typ),
                g.node(l.dst).proper_name, g.node(l.dst).meta.value, normalize_label(l.label), l.weight,
            )
            for l in g.links
        )
        return nodes, links

    return signature(a) == signature(b)
