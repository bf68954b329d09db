"""Random graph generators and brute-force oracles shared by the tests.

The oracles deliberately avoid the package's own helpers: they work from the
raw link list, or from the transition rows in the fixtures, so that a bug in
the library cannot be mirrored in its own check.
"""
from __future__ import annotations

import json
import random
import string
from itertools import combinations, product
from pathlib import Path

from hypothesis import strategies as st

from sstgraph.core import (
    ALL_TYPES,
    CANONICAL_LABELS,
    Graph,
    LinkFamily,
    MetaType,
    SignedLinkType,
    allowed_transition,
)

FIXTURES = Path(__file__).parent / "fixtures"
METAS = list(MetaType)
META_BY_SYMBOL = {"e": MetaType.EVENT, "t": MetaType.THING, "c": MetaType.CONCEPT}


def fixture_rows() -> set[tuple[MetaType, SignedLinkType, MetaType]]:
    """Allowed triples read from the hand-typed table fixture."""
    data = json.loads((FIXTURES / "table3.json").read_text())
    rows = data["printed_rows"] + data["added_by_reversal"]
    return {(META_BY_SYMBOL[s], SignedLinkType.parse(t), META_BY_SYMBOL[d]) for s, t, d in rows}


# -- random legal graphs -------------------------------------------------------

_LEGAL = [(s, t, d) for s in METAS for t in ALL_TYPES for d in METAS if allowed_transition(s, t, d)]


def random_graph(
    rng: random.Random,
    n_nodes: int,
    n_links: int,
    *,
    families: tuple[LinkFamily, ...] = tuple(LinkFamily),
    self_loops: bool = True,
    weights: tuple[float, ...] = (1.0,),
) -> Graph:
    """A legal graph built by rejection: only allowed triples are ever added."""
    g = Graph()
    ids = []
    for i in range(n_nodes):
        ids.append(g.add_node(f"n{i}", rng.choice(METAS)))
    for _ in range(n_links * 4):
        if len(g.links) >= n_links:
            break
        s, d = rng.choice(ids), rng.choice(ids)
        if s == d and not self_loops:
            continue
        ms, md = g.node(s).meta, g.node(d).meta
        options = [t for t in ALL_TYPES if t.family in families and allowed_transition(ms, t, md)]
        if not options:
            continue
        t = rng.choice(options)
        quad_exists = any(l.src == s and l.dst == d and l.typ == t for l in g.links)
        if quad_exists:
            continue
        g.add_link(s, t, d, rng.choice(weights))
    return g


def _is_type_token(text: str) -> bool:
    try:
        SignedLinkType.parse(text.strip())
    except ValueError:
        return False
    return True


_name_chars = st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r")
names = st.text(_name_chars, min_size=1, max_size=12).filter(lambda s: s.strip() != "")
labels = st.text(
    st.characters(blacklist_categories=("Cs", "Zl", "Zp", "Cc"), blacklist_characters="()\n\r"),
    min_size=1, max_size=10,
).filter(lambda s: s.strip() != "" and not _is_type_token(s))
attr_keys = st.text(string.ascii_letters + "_", min_size=1, max_size=6).filter(lambda k: k not in ("weight",))


@st.composite
def legal_graphs(draw, max_nodes: int = 7, max_links: int = 12) -> Graph:
    g = Graph()
    node_specs = draw(st.lists(
        st.tuples(names, st.sampled_from(METAS), st.dictionaries(attr_keys, names, max_size=2)),
        min_size=0, max_size=max_nodes, unique_by=lambda x: (x[0], x[1]),
    ))
    ids = [g.add_node(n, m, a) for n, m, a in node_specs]
    if not ids:
        return g
    for _ in range(draw(st.integers(0, max_links))):
        s, d = draw(st.sampled_from(ids)), draw(st.sampled_from(ids))
        ms, md = g.node(s).meta, g.node(d).meta
        options = [t for t in ALL_TYPES if allowed_transition(ms, t, md)]
        if not options:
            continue
        t = draw(st.sampled_from(options))
        label = draw(st.one_of(st.just(CANONICAL_LABELS[t]), labels))
        weight = draw(st.sampled_from([1.0, 0.5, 2.0, 0.0, 1e-3, 3.25]))
        if g.aliases.get(label) not in (None, t):
            continue  # label already means a different type
        if any(l.quad == (s, t, d, " ".join(label.split()).lower()) for l in g.links):
            continue
        if g.aliases.get(label) is None:
            g.aliases.register(label, t)
        g.add_link(s, label, d, weight)
    return g


# -- brute-force oracles ---------------------------------------------------------

def forward_pairs(g: Graph, family: LinkFamily) -> set[tuple[int, int]]:
    """(src, dst) read forward; NEAR contributes both directions."""
    out = set()
    for l in g.links:
        if l.typ.family is not family:
            continue
        a, b = (l.src, l.dst) if l.typ.orientation >= 0 else (l.dst, l.src)
        out.add((a, b))
        if family is LinkFamily.N:
            out.add((b, a))
    return out


def oracle_might_be_near(g: Graph) -> set[tuple[int, int, int]]:
    contains = forward_pairs(g, LinkFamily.C)
    near = forward_pairs(g, LinkFamily.N)
    ids = [n.id for n in g.nodes]
    found = set()
    for a, b, c in product(ids, repeat=3):
        if b < c and a not in (b, c) and (a, b) in contains and (a, c) in contains and (b, c) not in near:
            found.add((b, c, a))
    return found


def oracle_copresence(g: Graph) -> set[tuple[int, int, int]]:
    contains = forward_pairs(g, LinkFamily.C)
    ids = [n.id for n in g.nodes]
    found = set()
    for e, x, y in product(ids, repeat=3):
        if (
            g.node(e).meta is MetaType.EVENT
            and g.node(x).meta is MetaType.THING and g.node(y).meta is MetaType.THING
            and x < y and (e, x) in contains and (e, y) in contains
        ):
            found.add((x, y, e))
    return found


def oracle_inheritance(g: Graph) -> set[tuple[int, int, int | None]]:
    contains = forward_pairs(g, LinkFamily.C)
    expresses = forward_pairs(g, LinkFamily.E)
    near = forward_pairs(g, LinkFamily.N)
    ids = [n.id for n in g.nodes]
    found = set()
    for a, m, p in product(ids, repeat=3):
        if a != m and m != p and (a, m) in contains and (a, p) in expresses and (m, p) not in expresses:
            found.add((m, p, a))
    for x, y, p in product(ids, repeat=3):
        if x != y and y != p and (x, y) in near and (x, p) in expresses and (y, p) not in expresses:
            found.add((y, p, None))
    return found


def oracle_supernodes(g: Graph, family: LinkFamily) -> set[frozenset[int]]:
    pairs = forward_pairs(g, family)
    touched = {x for p in pairs for x in p}

    def sig(n):
        return (frozenset(a for a, b in pairs if b == n), frozenset(b for a, b in pairs if a == n))

    groups: list[set[int]] = []
    for a, b in combinations(sorted(touched), 2):
        if sig(a) == sig(b):
            for grp in groups:
                if a in grp:
                    grp.add(b)
                    break
            else:
                groups.append({a, b})
    return {frozenset(g_) for g_ in groups}


def oracle_equivalence(g: Graph) -> set[tuple[str, frozenset[int]]]:
    return {(f.value, grp) for f in LinkFamily for grp in oracle_supernodes(g, f)}


