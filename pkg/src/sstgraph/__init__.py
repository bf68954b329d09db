"""Typed semantic graphs: events, things and concepts joined by four link families."""
from __future__ import annotations

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AliasTable,
    DuplicateLink,
    ForbiddenTransition,
    Graph,
    InvalidWeight,
    Link,
    LinkFamily,
    MetaType,
    Node,
    SignedLinkType,
    SSTError,
    UnknownAlias,
    UnknownNode,
    allowed_transition,
    isomorphic,
    join_types,
    reverse,
)
from .notation import build, load, parse, serialize  # noqa: E402

__all__ = [
    "AliasTable", "DuplicateLink", "ForbiddenTransition", "Graph", "InvalidWeight", "Link",
    "LinkFamily", "MetaType", "Node", "SignedLinkType", "SSTError", "UnknownAlias", "UnknownNode",
    "allowed_transition", "isomorphic", "join_types", "reverse",
    "build", "load", "parse", "serialize",
]
