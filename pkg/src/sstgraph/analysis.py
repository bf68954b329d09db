"""Structural diagnostics over one link family at a time.

Every analysis reads links in their forward orientation; NEAR links count in
both directions.  Degrees are counts of distinct neighbours, so parallel links
with different labels do not inflate a node's role.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from .core import Graph, LinkFamily, MetaType, join_types

ROLE_NAMES = ("source", "sink", "appointed", "appointing", "hub", "authority", "central")

TERMINAL_DESCRIPTIONS = {
    LinkFamily.L: (MetaType.EVENT, "final event"),
    LinkFamily.C: (MetaType.THING, "atomic thing (component)"),
    LinkFamily.E: (MetaType.CONCEPT, "atomic concept (property)"),
}


class FamilyView:
    """Neighbour sets of one family, optionally read against the arrows."""

    def __init__(self, g: Graph, family: LinkFamily, *, reverse: bool = False) -> None:
        self.family = family
        self.out: dict[int, set[int]] = defaultdict(set)
        self.inn: dict[int, set[int]] = defaultdict(set)
        for link in g.links_of(family):
            fwd = link.canonical()
            pairs = [(fwd.src, fwd.dst)]
            if family is LinkFamily.N:
                pairs.append((fwd.dst, fwd.src))
            for s, d in pairs:
                if reverse:
                    s, d = d, s
                self.out[s].add(d)
                self.inn[d].add(s)
        self.nodes = sorted(set(self.out) | set(self.inn), key=lambda nid: g.node(nid).sort_key)


@dataclass(frozen=True)
class NodeRole:
    node: int
    family: LinkFamily
    roles: frozenset[str]
    in_degree: int
    out_degree: int


def _quotient(view: FamilyView, groups: Iterable[Iterable[int]]):
    rep: dict[int, int] = {}
    for grp in groups:
        members = sorted(grp)
        for m in members:
            rep[m] = members[0]
    mult: dict[int, int] = defaultdict(int)
    out: dict[int, set[int]] = defaultdict(set)
    inn: dict[int, set[int]] = defaultdict(set)
    for n in view.nodes:
        r = rep.get(n, n)
        mult[r] += 1
        out[r] |= {rep.get(m, m) for m in view.out.get(n, ())}
        inn[r] |= {rep.get(m, m) for m in view.inn.get(n, ())}
    order = [n for n in view.nodes if rep.get(n, n) == n]
    return order, out, inn, mult


def classify_roles(
    g: Graph,
    family: LinkFamily,
    *,
    collapse: Iterable[Iterable[int]] = (),
) -> list[NodeRole]:
    """Degree-based roles for every node touching ``family``.

    ``collapse`` merges each given group into its lowest id before counting.
    A merged node stands for all its members: as a neighbour it counts once
    per member, while its own degree is that of any one member.  For groups of
    exact duplicates this leaves every other node's roles unchanged.
    """
    view = FamilyView(g, family)
    order, out, inn, mult = _quotient(view, collapse)

    def degree(nbrs: set[int]) -> int:
        return sum(mult[m] for m in nbrs)

    indeg = {n: degree(inn[n]) for n in order}
    outdeg = {n: degree(out[n]) for n in order}
    appointed = {n for n in order if indeg[n] >= 2}
    records = []
    for n in order:
        roles = set()
        if indeg[n] == 0 and outdeg[n] > 0:
            roles.add("source")
        if outdeg[n] == 0 and indeg[n] > 0:
            roles.add("sink")
        if n in appointed:
            roles |= {"appointed", "hub"}
            backing = sum(mult[m] for m in inn[n] if m in appointed)
            if 2 * backing >= indeg[n]:
                roles.add("central")
        if outdeg[n] >= 2:
            roles |= {"appointing", "authority"}
        records.append(NodeRole(n, family, frozenset(roles), indeg[n], outdeg[n]))
    return records


@dataclass(frozen=True)
class AbsorbingRegion:
    nodes: frozenset[int]
    family: LinkFamily


def absorbing_regions(g: Graph, family: LinkFamily, *, reverse: bool = False) -> list[AbsorbingRegion]:
    """Terminal strongly connected components of the family subgraph.

    With ``reverse`` the arrows are read backwards, turning sources into the
    absorbing ends.
    """
    view = FamilyView(g, family, reverse=reverse)
    dg = nx.DiGraph()
    dg.add_nodes_from(view.nodes)
    dg.add_edges_from((s, d) for s, ds in view.out.items() for d in ds)
    cond = nx.condensation(dg)
    regions = [
        AbsorbingRegion(frozenset(cond.nodes[c]["members"]), family)
        for c in cond.nodes
        if cond.out_degree(c) == 0
    ]
    pos = {nid: i for i, nid in enumerate(view.nodes)}
    return sorted(regions, key=lambda r: min(pos[n] for n in r.nodes))


@dataclass(frozen=True)
class SupernodeGroup:
    members: frozenset[int]
    family: LinkFamily
    signature: tuple[tuple[int, ...], tuple[int, ...]]
    partial: bool
    differing_families: tuple[LinkFamily, ...] = ()
    weights_differ: bool = False


def _signatures(g: Graph, family: LinkFamily) -> tuple[FamilyView, dict[int, tuple]]:
    view = FamilyView(g, family)
    sig = {
        n: (tuple(sorted(view.inn.get(n, ()))), tuple(sorted(view.out.get(n, ()))))
        for n in view.nodes
    }
    return view, sig


def _weight_profile(g: Graph, family: LinkFamily, node: int) -> tuple:
    prof: dict[tuple[str, int], float] = defaultdict(float)
    for link in g.links_of(family):
        fwd = link.canonical()
        if fwd.src == node:
            prof[("out", fwd.dst)] += link.weight
        if fwd.dst == node:
            prof[("in", fwd.src)] += link.weight
    return tuple(sorted(prof.items()))


def supernodes(g: Graph, family: LinkFamily) -> list[SupernodeGroup]:
    """Groups of nodes with identical in/out neighbour sets for ``family``.

    Each group is then compared across the other three families; any family
    where members disagree is listed and marks the group partial, as do
    differing link weights within ``family`` itself.
    """
    view, sig = _signatures(g, family)
    buckets: dict[tuple, list[int]] = defaultdict(list)
    for n in view.nodes:
        buckets[sig[n]].append(n)
    others = {f: _signatures(g, f)[1] for f in LinkFamily if f is not family}
    groups = []
    for signature, members in buckets.items():
        if len(members) < 2:
            continue
        differing = tuple(
            f for f in LinkFamily
            if f is not family and len({others[f].get(m, ((), ())) for m in members}) > 1
        )
        weights_differ = len({_weight_profile(g, family, m) for m in members}) > 1
        groups.append(SupernodeGroup(
            frozenset(members), family, signature,
            partial=bool(differing) or weights_differ,
            differing_families=differing,
            weights_differ=weights_differ,
        ))
    pos = {nid: i for i, nid in enumerate(view.nodes)}
    return sorted(groups, key=lambda grp: min(pos[m] for m in grp.members))


@dataclass(frozen=True)
class ChainTrace:
    path: tuple[int, ...]
    family: LinkFamily
    termination: str  # terminated-at-sink | cycle-detected | budget-exhausted
    terminal: str = ""
    terminal_as_expected: bool = True


def _terminal(g: Graph, family: LinkFamily, node: int) -> tuple[str, bool]:
    if family not in TERMINAL_DESCRIPTIONS:
        return "no termination requirement", True
    expected, text = TERMINAL_DESCRIPTIONS[family]
    meta = g.node(node).meta
    if meta is expected:
        return text, True
    return f"{text}; ends on a {meta.value} instead", False


def trace(
    g: Graph,
    start: int,
    family: LinkFamily,
    direction: str = "forward",
    budget: int = 10_000,
) -> list[ChainTrace]:
    """Enumerate maximal paths of one family from ``start`` by depth-first search.

    ``budget`` caps the number of hops taken over the whole enumeration.  NEAR
    walks never step straight back over the node they just came from.
    """
    g.node(start)
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    view = FamilyView(g, family, reverse=direction == "backward")
    order = {n.id: i for i, n in enumerate(g.ordered_nodes())}
    traces: list[ChainTrace] = []
    hops = 0
    stack: list[tuple[int, ...]] = [(start,)]
    while stack:
        path = stack.pop()
        here = path[-1]
        nxt = sorted(view.out.get(here, ()), key=order.__getitem__)
        if family is LinkFamily.N and len(path) >= 2:
            nxt = [n for n in nxt if n != path[-2]]
        if not nxt:
            text, ok = _terminal(g, family, here)
            traces.append(ChainTrace(path, family, "terminated-at-sink", text, ok))
            continue
        if hops + len(nxt) > budget:
            stack.append(path)
            traces.extend(ChainTrace(p, family, "budget-exhausted") for p in reversed(stack))
            break
        hops += len(nxt)
        children = []
        for n in nxt:
            if n in path:
                traces.append(ChainTrace(path + (n,), family, "cycle-detected"))
            else:
                children.append(path + (n,))
        stack.extend(reversed(children))
    return traces


def trace_is_legal(g: Graph, t: ChainTrace) -> bool:
    """Every interior node of ``t`` may join two arrows of its family."""
    allowed = join_types(t.family, t.family)
    return all(g.node(n).meta in allowed for n in t.path[1:-1])


def self_loops(g: Graph) -> list:
    return [l for l in g.links if l.src == l.dst]
