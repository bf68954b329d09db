"""Graph documents: canonical JSON (both ways), Graphviz DOT and CSV adjacency."""
from __future__ import annotations

import csv
import io
import json
from typing import Any

from .core import (
    AliasTable,
    Graph,
    LinkFamily,
    MetaType,
    SignedLinkType,
    SSTError,
)
from .matrix import adjacency

_SIGN_TO_ORIENTATION = {"+": 1, "-": -1, "0": 0}

DOT_EDGE_STYLE = {
    LinkFamily.L: 'color="black", style="solid"',
    LinkFamily.C: 'color="blue", style="dashed"',
    LinkFamily.E: 'color="darkgreen", style="solid"',
    LinkFamily.N: 'color="gray", style="dotted", dir="none"',
}
DOT_NODE_SHAPE = {
    MetaType.EVENT: "ellipse",
    MetaType.THING: "box",
    MetaType.CONCEPT: "hexagon",
}


class GraphDocumentError(SSTError):
    """The JSON text is not a well-formed graph document."""


def display_names(g: Graph) -> dict[int, str]:
    """Proper names, suffixed with ``:meta`` only where a name is reused."""
    counts: dict[str, int] = {}
    for n in g.nodes:
        counts[n.proper_name] = counts.get(n.proper_name, 0) + 1
    return {
        n.id: n.proper_name if counts[n.proper_name] == 1 else f"{n.proper_name}:{n.meta.value}"
        for n in g.nodes
    }


# -- JSON ---------------------------------------------------------------------

def to_document(g: Graph) -> dict[str, Any]:
    nodes = [
        {"name": n.proper_name, "meta": n.meta.value, "attrs": dict(sorted(n.attributes.items()))}
        for n in g.ordered_nodes()
    ]
    links = []
    for l in g.ordered_links():
        s, d = g.node(l.src), g.node(l.dst)
        links.append({
            "src": s.proper_name,
            "src_meta": s.meta.value,
            "dst": d.proper_name,
            "dst_meta": d.meta.value,
            "family": l.family.value,
            "sign": l.typ.sign,
            "label": l.label,
            "weight": l.weight,
        })
    aliases = {k: str(v) for k, v in sorted(g.aliases.difference(AliasTable.default()).items())}
    return {"nodes": nodes, "links": links, "aliases": aliases}


def to_json(g: Graph) -> str:
    return json.dumps(to_document(g), indent=2, ensure_ascii=False) + "\n"


def _field(obj: dict, key: str, kind: type | tuple[type, ...], where: str):
    if key not in obj:
        raise GraphDocumentError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise GraphDocumentError(f"{where}: field {key!r} has the wrong type")
    return value


def from_document(doc: Any, base_aliases: AliasTable | None = None) -> Graph:
    """Rebuild a graph; type violations surface as the usual core exceptions."""
    if not isinstance(doc, dict):
        raise GraphDocumentError("graph document must be a JSON object")
    base = base_aliases if base_aliases is not None else AliasTable.default()
    local = AliasTable()
    for label, typ in _field(doc, "aliases", dict, "document").items() if "aliases" in doc else ():
        try:
            local.register(label, typ)
        except (ValueError, SSTError) as exc:
            raise GraphDocumentError(f"alias {label!r}: {exc}") from None
    g = Graph(base.overlay(local))
    for i, n in enumerate(_field(doc, "nodes", list, "document")):
        where = f"nodes[{i}]"
        if not isinstance(n, dict):
            raise GraphDocumentError(f"{where}: expected an object")
        try:
            meta = MetaType.parse(_field(n, "meta", str, where))
        except ValueError as exc:
            raise GraphDocumentError(f"{where}: {exc}") from None
        attrs = n.get("attrs", {})
        if not isinstance(attrs, dict) or not all(isinstance(v, str) for v in attrs.values()):
            raise GraphDocumentError(f"{where}: attrs must map names to strings")
        g.add_node(_field(n, "name", str, where), meta, attrs)
    for i, l in enumerate(_field(doc, "links", list, "document")):
        where = f"links[{i}]"
        if not isinstance(l, dict):
            raise GraphDocumentError(f"{where}: expected an object")

        def endpoint(side: str) -> int:
            name = _field(l, side, str, where)
            meta = l.get(f"{side}_meta")
            nid = g.find(name, meta) if meta is not None else g.find(name)
            if nid is None:
                raise GraphDocumentError(f"{where}: no unique node named {name!r}")
            return nid

        src, dst = endpoint("src"), endpoint("dst")
        try:
            family = LinkFamily(_field(l, "family", str, where))
            orientation = _SIGN_TO_ORIENTATION[_field(l, "sign", str, where)]
            typ = SignedLinkType(family, orientation)
        except (KeyError, ValueError) as exc:
            raise GraphDocumentError(f"{where}: bad link type ({exc})") from None
        weight = l.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise GraphDocumentError(f"{where}: weight must be a number")
        g.add_link(src, typ, dst, weight, label=_field(l, "label", str, where))
    return g


def from_json(text: str, base_aliases: AliasTable | None = None) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphDocumentError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_document(doc, base_aliases)


# -- DOT ----------------------------------------------------------------------

def _dot_str(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(g: Graph, family: LinkFamily | None = None) -> str:
    """Graphviz text; arrows follow each link's forward reading."""
    names = display_names(g)
    ids = {n.id: f"n{i}" for i, n in enumerate(g.ordered_nodes())}
    out = ["digraph sst {"]
    for n in g.ordered_nodes():
        out.append(f"  {ids[n.id]} [label={_dot_str(names[n.id])}, shape={DOT_NODE_SHAPE[n.meta]}];")
    for l in g.ordered_links():
        if family is not None and l.family is not family:
            continue
        fwd = l.canonical()
        attrs = f"label={_dot_str(l.label)}, {DOT_EDGE_STYLE[l.family]}"
        if l.weight != 1.0:
            attrs += f", weight={l.weight!r}"
        out.append(f"  {ids[fwd.src]} -> {ids[fwd.dst]} [{attrs}];")
    out.append("}")
    return "\n".join(out) + "\n"


# -- CSV ----------------------------------------------------------------------

def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def to_csv(g: Graph, family: LinkFamily | None = None) -> str:
    """Adjacency matrix: one header row of names, then one row per source node."""
    A = adjacency(g, family)
    names = display_names(g)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([names[nid] for nid in A.node_order])
    for row in A.entries:
        w.writerow([_num(x) for x in row])
    return buf.getvalue()
