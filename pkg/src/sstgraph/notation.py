"""Line-oriented ``.sst`` notation: parser, graph builder and serializers.

Grammar, one statement per line::

    # comment
    alias "<label>" = <+L|-L|+C|-C|+E|-E|N>
    node "<name>" : <event|thing|concept> [key="value" ...]
    "<src>"[:<meta>] (<label>) "<dst>"[:<meta>] [weight <real>]

Strings escape ``\\"`` and ``\\\\``.  A trailing ``# ...`` on a statement line is
kept as a separate comment statement.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from .core import (
    AliasTable,
    DuplicateLink,
    ForbiddenTransition,
    Graph,
    InvalidWeight,
    MetaType,
    SignedLinkType,
    SSTError,
    UnknownAlias,
    normalize_label,
)

_META_WORDS = {m.value: m for m in MetaType}


@dataclass
class AliasDecl:
    label: str
    typ: SignedLinkType
    line: int = field(default=0, compare=False)


@dataclass
class NodeDecl:
    proper_name: str
    meta: MetaType
    attrs: dict[str, str] = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass
class LinkDecl:
    src_name: str
    src_meta: MetaType | None
    label: str
    dst_name: str
    dst_meta: MetaType | None
    weight: float | None = None
    line: int = field(default=0, compare=False)
    # 1-based columns of the source, label and target tokens
    columns: tuple[int, int, int] = field(default=(1, 1, 1), compare=False)


@dataclass
class Comment:
    text: str
    line: int = field(default=0, compare=False)


Statement = Union[AliasDecl, NodeDecl, LinkDecl, Comment]


@dataclass
class Document:
    statements: list[Statement]
    source_name: str = "<string>"


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    message: str
    offending_text: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message} ({self.offending_text!r})"


@dataclass(frozen=True)
class Diagnostic:
    """A build-time problem tied to a source location."""

    code: str
    message: str
    line: int
    column: int = 1
    offending_text: str = ""
    rule: str | None = None

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.message}"

    def as_dict(self) -> dict:
        out = {
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "column": self.column,
            "offending_text": self.offending_text,
        }
        if self.rule is not None:
            out["rule"] = self.rule
        return out


class NotationErrors(SSTError):
    def __init__(self, errors: list[ParseError]) -> None:
        self.errors = errors
        super().__init__(f"{len(errors)} parse error(s); first: {errors[0]}")


class BuildErrors(SSTError):
    def __init__(self, diagnostics: list[Diagnostic], graph: Graph) -> None:
        self.diagnostics = diagnostics
        self.graph = graph
        super().__init__(f"{len(diagnostics)} build error(s); first: {diagnostics[0]}")


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str  # STR, LABEL, WORD, PUNCT, COMMENT
    value: str
    col: int  # 1-based
    raw: str


class _LexError(Exception):
    def __init__(self, col: int, message: str, text: str) -> None:
        self.col, self.message, self.text = col, message, text


_WORD = re.compile(r'[^\s"():=#]+')
_PUNCT = re.compile(r"[:=]+")


def _lex_line(line: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(line)
    while i < n:
        ch = line[i]
        if ch.isspace():
            i += 1
        elif ch == "#":
            toks.append(_Tok("COMMENT", line[i + 1:], i + 1, line[i:]))
            break
        elif ch == '"':
            j, buf = i + 1, []
            while True:
                if j >= n:
                    raise _LexError(i + 1, "unterminated string", line[i:])
                c = line[j]
                if c == "\\":
                    if j + 1 < n and line[j + 1] in '"\\':
                        buf.append(line[j + 1])
                        j += 2
                        continue
                    raise _LexError(j + 1, "invalid escape in string", line[j:j + 2])
                if c == '"':
                    break
                buf.append(c)
                j += 1
            toks.append(_Tok("STR", "".join(buf), i + 1, line[i:j + 1]))
            i = j + 1
        elif ch == "(":
            j = line.find(")", i + 1)
            if j < 0:
                raise _LexError(i + 1, "unterminated link label", line[i:])
            toks.append(_Tok("LABEL", line[i + 1:j], i + 1, line[i:j + 1]))
            i = j + 1
        elif ch == ")":
            raise _LexError(i + 1, "unbalanced ')'", ")")
        else:
            m = (_PUNCT if ch in ":=" else _WORD).match(line, i)
            toks.append(_Tok("PUNCT" if ch in ":=" else "WORD", m.group(), i + 1, m.group()))
            i = m.end()
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Cursor:
    def __init__(self, toks: list[_Tok], line: str) -> None:
        self.toks, self.pos, self.line = toks, 0, line

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, kind: str, value: str | None = None, what: str = "") -> _Tok:
        tok = self.peek()
        if tok is None or tok.kind != kind or (value is not None and tok.value != value):
            expected = what or (repr(value) if value else kind.lower())
            if tok is None:
                raise _LexError(len(self.line) + 1 if self.line else 1, f"expected {expected}, found end of line", "")
            raise _LexError(tok.col, f"expected {expected}", tok.raw)
        self.pos += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (value is None or tok.value == value)


def _meta(cur: _Cursor) -> MetaType:
    tok = cur.take("WORD", what="meta-type")
    if tok.value not in _META_WORDS:
        raise _LexError(tok.col, "unknown meta-type keyword (expected event, thing or concept)", tok.raw)
    return _META_WORDS[tok.value]


def _parse_statement(cur: _Cursor, lineno: int) -> Statement:
    first = cur.peek()
    assert first is not None
    if first.kind == "WORD" and first.value == "alias":
        cur.pos += 1
        label = cur.take("STR", what="quoted alias label")
        if not normalize_label(label.value):
            raise _LexError(label.col, "empty alias label", label.raw)
        cur.take("PUNCT", "=")
        tok = cur.take("WORD", what="link type")
        try:
            typ = SignedLinkType.parse(tok.value)
        except ValueError:
            raise _LexError(tok.col, "unknown link type (expected +L, -L, +C, -C, +E, -E or N)", tok.raw) from None
        return AliasDecl(label.value, typ, line=lineno)
    if first.kind == "WORD" and first.value == "node":
        cur.pos += 1
        name = cur.take("STR", what="quoted node name")
        if not name.value.strip():
            raise _LexError(name.col, "empty node name", name.raw)
        cur.take("PUNCT", ":")
        meta = _meta(cur)
        attrs: dict[str, str] = {}
        while cur.at("WORD"):
            key = cur.take("WORD")
            cur.take("PUNCT", "=")
            attrs[key.value] = cur.take("STR", what="quoted attribute value").value
        return NodeDecl(name.value, meta, attrs, line=lineno)
    if first.kind == "STR":
        src = cur.take("STR")
        src_meta = None
        if cur.at("PUNCT", ":"):
            cur.pos += 1
            src_meta = _meta(cur)
        label = cur.take("LABEL", what="parenthesised link label")
        if not normalize_label(label.value):
            raise _LexError(label.col, "empty link label", label.raw)
        dst = cur.take("STR", what="quoted target name")
        dst_meta = None
        if cur.at("PUNCT", ":"):
            cur.pos += 1
            dst_meta = _meta(cur)
        weight = None
        if cur.at("WORD", "weight"):
            cur.pos += 1
            tok = cur.take("WORD", what="weight value")
            try:
                weight = float(tok.value)
            except ValueError:
                weight = math.nan
            if not math.isfinite(weight):
                raise _LexError(tok.col, "malformed weight", tok.raw)
        for tok in (src, dst):
            if not tok.value.strip():
                raise _LexError(tok.col, "empty node name", tok.raw)
        return LinkDecl(
            src.value, src_meta, label.value.strip(), dst.value, dst_meta, weight,
            line=lineno, columns=(src.col, label.col, dst.col),
        )
    raise _LexError(first.col, "expected 'alias', 'node' or a quoted link source", first.raw)


def parse(source: str, source_name: str = "<string>") -> Document:
    """Parse notation text; raises NotationErrors listing every bad line."""
    statements: list[Statement] = []
    errors: list[ParseError] = []
    for lineno, line in enumerate(source.split("\n"), start=1):
        line = line.rstrip("\r")
        try:
            toks = _lex_line(line)
        except _LexError as exc:
            errors.append(ParseError(lineno, exc.col, exc.message, exc.text))
            continue
        comment = None
        if toks and toks[-1].kind == "COMMENT":
            comment = Comment(toks.pop().value.rstrip(), line=lineno)
        if toks:
            cur = _Cursor(toks, line)
            try:
                stmt = _parse_statement(cur, lineno)
                extra = cur.peek()
                if extra is not None:
                    raise _LexError(extra.col, "unexpected trailing text", extra.raw)
            except _LexError as exc:
                errors.append(ParseError(lineno, exc.col, exc.message, exc.text))
                continue
            statements.append(stmt)
        if comment is not None:
            statements.append(comment)
    if errors:
        raise NotationErrors(errors)
    return Document(statements, source_name)


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------

def build(doc: Document, base_aliases: AliasTable | None = None) -> Graph:
    """Turn a parsed document into a validated graph.

    Document aliases shadow ``base_aliases`` wherever they appear in the file.
    Endpoints must be declared on an earlier line or carry an inline meta-type.
    Every problem is collected; BuildErrors carries them with the partial graph.
    """
    local = AliasTable()
    for stmt in doc.statements:
        if isinstance(stmt, AliasDecl):
            local.register(stmt.label, stmt.typ)
    base = base_aliases if base_aliases is not None else AliasTable.default()
    g = Graph(base.overlay(local))
    diags: list[Diagnostic] = []
    declared: dict[str, list[int]] = {}

    def remember(name: str, nid: int) -> None:
        ids = declared.setdefault(name, [])
        if nid not in ids:
            ids.append(nid)

    def endpoint(name: str, meta: MetaType | None, stmt: LinkDecl, col: int) -> int | None:
        if meta is not None:
            nid = g.add_node(name, meta)
            remember(name, nid)
            return nid
        ids = declared.get(name, [])
        if len(ids) == 1:
            return ids[0]
        if not ids:
            diags.append(Diagnostic(
                "UndeclaredEndpoint", f"node {name!r} is not declared and has no inline meta-type",
                stmt.line, col, f'"{name}"'))
        else:
            diags.append(Diagnostic(
                "AmbiguousEndpoint", f"node {name!r} is declared with several meta-types; add an inline meta",
                stmt.line, col, f'"{name}"'))
        return None

    for stmt in doc.statements:
        if isinstance(stmt, NodeDecl):
            remember(stmt.proper_name, g.add_node(stmt.proper_name, stmt.meta, stmt.attrs))
        elif isinstance(stmt, LinkDecl):
            scol, lcol, dcol = stmt.columns
            src = endpoint(stmt.src_name, stmt.src_meta, stmt, scol)
            dst = endpoint(stmt.dst_name, stmt.dst_meta, stmt, dcol)
            if src is None or dst is None:
                continue
            weight = 1.0 if stmt.weight is None else stmt.weight
            try:
                link = g.add_link(src, stmt.label, dst, weight)
                g.origins[link.quad] = stmt.line
            except UnknownAlias as exc:
                diags.append(Diagnostic("UnknownAlias", str(exc), stmt.line, lcol, f"({stmt.label}"))
            except ForbiddenTransition as exc:
                diags.append(Diagnostic(
                    "ForbiddenTransition",
                    f"{stmt.src_name!r} ({stmt.label}) {stmt.dst_name!r}: "
                    f"{exc.src_meta.value} ({exc.typ}) {exc.dst_meta.value} is not allowed",
                    stmt.line, lcol, f"({stmt.label}", rule=exc.rule))
            except (InvalidWeight, DuplicateLink) as exc:
                code = "InvalidWeight" if isinstance(exc, InvalidWeight) else "DuplicateLink"
                diags.append(Diagnostic(code, str(exc), stmt.line, scol, f'"{stmt.src_name}'))
    if diags:
        raise BuildErrors(diags, g)
    return g


def load(source: str, source_name: str = "<string>", base_aliases: AliasTable | None = None) -> Graph:
    return build(parse(source, source_name), base_aliases)


def alias_table_from(source: str, source_name: str = "<aliases>") -> AliasTable:
    """Collect the alias declarations of a notation file into a table."""
    table = AliasTable()
    for stmt in parse(source, source_name).statements:
        if isinstance(stmt, AliasDecl):
            table.register(stmt.label, stmt.typ)
    return table


# ---------------------------------------------------------------------------
# Serializers
# ---------------------------------------------------------------------------

def quote(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise ValueError(f"line breaks cannot be written in notation strings: {text!r}")
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label(text: str) -> str:
    if ")" in text or "\n" in text or not normalize_label(text):
        raise ValueError(f"label cannot be written in notation: {text!r}")
    return f"({text})"


def _weight(w: float) -> str:
    return repr(float(w))


def format_statement(stmt: Statement) -> str:
    if isinstance(stmt, Comment):
        return "#" + stmt.text
    if isinstance(stmt, AliasDecl):
        return f"alias {quote(stmt.label)} = {stmt.typ}"
    if isinstance(stmt, NodeDecl):
        attrs = "".join(f" {k}={quote(v)}" for k, v in stmt.attrs.items())
        return f"node {quote(stmt.proper_name)} : {stmt.meta.value}{attrs}"
    parts = [quote(stmt.src_name) + (f":{stmt.src_meta.value}" if stmt.src_meta else "")]
    parts.append(_label(stmt.label))
    parts.append(quote(stmt.dst_name) + (f":{stmt.dst_meta.value}" if stmt.dst_meta else ""))
    if stmt.weight is not None:
        parts.append(f"weight {_weight(stmt.weight)}")
    return " ".join(parts)


def serialize_document(doc: Document) -> str:
    return "".join(format_statement(s) + "\n" for s in doc.statements)


def serialize(g: Graph) -> str:
    """Deterministic notation text for a graph.

    Nodes come in (meta-type, name) order and links in (source, family,
    target, label) order; only aliases that differ from the default table are
    written out.
    """
    default = AliasTable.default()
    aliases = dict(g.aliases.difference(default))
    table = default.overlay(AliasTable(aliases))
    for link in g.links:
        if table.get(link.label) != link.typ:
            key = normalize_label(link.label)
            if key in aliases and aliases[key] != link.typ:
                raise ValueError(f"label {link.label!r} is used with two different link types")
            aliases[key] = link.typ
            table.register(key, link.typ)

    nodes = g.ordered_nodes()
    counts: dict[str, int] = {}
    for n in nodes:
        counts[n.proper_name] = counts.get(n.proper_name, 0) + 1

    def ref(nid: int) -> str:
        n = g.node(nid)
        return quote(n.proper_name) + (f":{n.meta.value}" if counts[n.proper_name] > 1 else "")

    lines = [f"# sst graph: {len(nodes)} nodes, {len(g.links)} links"]
    lines += [f"alias {quote(label)} = {typ}" for label, typ in sorted(aliases.items())]
    lines += [format_statement(NodeDecl(n.proper_name, n.meta, dict(sorted(n.attributes.items())))) for n in nodes]
    for link in g.ordered_links():
        line = f"{ref(link.src)} {_label(link.label)} {ref(link.dst)}"
        if link.weight != 1.0:
            line += f" weight {_weight(link.weight)}"
        lines.append(line)
    return "\n".join(lines) + "\n"
