from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import forward_pairs, oracle_supernodes, random_graph
from sstgraph.analysis import (
    absorbing_regions,
    classify_roles,
    supernodes,
    trace,
    trace_is_legal,
)
from sstgraph.core import PLUS_L, Graph, LinkFamily, MetaType, UnknownNode, join_types
from sstgraph.notation import load

E, T, C = MetaType.EVENT, MetaType.THING, MetaType.CONCEPT
L = LinkFamily.L


def confluence():
    g = Graph()
    sink, a, b = (g.add_node(n, E) for n in ("0", "1", "2"))
    g.add_link(a, PLUS_L, sink)
    g.add_link(b, PLUS_L, sink)
    return g, sink, a, b


def roles_by_node(g, fam):
    return {r.node: r.roles for r in classify_roles(g, fam)}


def test_confluence_roles():
    g, sink, a, b = confluence()
    roles = roles_by_node(g, L)
    assert {"sink", "appointed"} <= roles[sink]
    assert roles[a] == roles[b] == {"source"}


def test_two_cycle_has_no_sources_or_sinks():
    g = load('"a":event (leads to) "b":event\n"b" (leads to) "a"')
    for roles in roles_by_node(g, L).values():
        assert not roles & {"source", "sink"}


def test_central_needs_appointed_appointers():
    src = "\n".join([
        '"x1":event (leads to) "h1":event', '"x2":event (leads to) "h1"',
        '"y1":event (leads to) "h2":event', '"y2":event (leads to) "h2"',
        '"h1" (leads to) "top":event', '"h2" (leads to) "top"',
    ])
    g = load(src)
    roles = roles_by_node(g, L)
    assert "central" in roles[g.find("top")]
    assert "central" not in roles[g.find("h1")]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_roles_match_degree_counting(seed):
    g = random_graph(random.Random(seed), 7, 12)
    for fam in LinkFamily:
        pairs = forward_pairs(g, fam)
        touched = {x for p in pairs for x in p}
        records = roles_by_node(g, fam)
        assert set(records) == touched
        for n in touched:
            indeg = len({a for a, b in pairs if b == n})
            outdeg = len({b for a, b in pairs if a == n})
            r = records[n]
            assert ("source" in r) == (indeg == 0 and outdeg > 0)
            assert ("sink" in r) == (outdeg == 0 and indeg > 0)
            assert ("appointed" in r) == (indeg >= 2)
            assert ("appointing" in r) == (outdeg >= 2)
            assert not {"source", "sink"} <= r


# -- absorbing --------------------------------------------------------------------

def test_absorbing_examples():
    g, sink, a, b = confluence()
    assert [r.nodes for r in absorbing_regions(g, L)] == [frozenset({sink})]
    cyc = load('"a":event (leads to) "b":event\n"b" (leads to) "c":event\n"c" (leads to) "a"')
    assert [len(r.nodes) for r in absorbing_regions(cyc, L)] == [3]
    chain = load('"a":event (leads to) "b":event\n"b" (leads to) "c":event')
    assert [r.nodes for r in absorbing_regions(chain, L)] == [frozenset({chain.find("c")})]
    assert [r.nodes for r in absorbing_regions(chain, L, reverse=True)] == [frozenset({chain.find("a")})]


def _reach(pairs, n):
    seen, todo = {n}, [n]
    while todo:
        x = todo.pop()
        for a, b in pairs:
            if a == x and b not in seen:
                seen.add(b)
                todo.append(b)
    return seen


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_absorbing_regions_match_reachability(seed):
    g = random_graph(random.Random(seed), 7, 10)
    for fam in LinkFamily:
        pairs = forward_pairs(g, fam)
        touched = {x for p in pairs for x in p}
        regions = absorbing_regions(g, fam)
        covered = set()
        for r in regions:
            for n in r.nodes:
                assert _reach(pairs, n) == set(r.nodes)
            covered |= r.nodes
        # a node is in a terminal component iff everything it reaches reaches back
        expect = {n for n in touched if all(n in _reach(pairs, m) for m in _reach(pairs, n))}
        assert covered == expect


# -- supernodes --------------------------------------------------------------------

def test_supernode_examples():
    src = "\n".join([
        '"A":thing (contains) "B1":thing', '"A" (contains) "B2":thing',
        '"B1" (contains) "C":thing', '"B2" (contains) "C"',
    ])
    g = load(src)
    (grp,) = supernodes(g, LinkFamily.C)
    assert grp.members == {g.find("B1"), g.find("B2")} and not grp.partial
    g2 = load(src + '\n"B1" (has property) "blue":concept')
    (grp2,) = supernodes(g2, LinkFamily.C)
    assert grp2.partial and grp2.differing_families == (LinkFamily.E,)


def test_weight_difference_marks_partial():
    g = load('"A":thing (contains) "B1":thing\n"A" (contains) "B2":thing weight 2')
    (grp,) = supernodes(g, LinkFamily.C)
    assert grp.partial and grp.weights_differ and grp.differing_families == ()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_supernodes_match_pairwise_oracle(seed):
    g = random_graph(random.Random(seed), 7, 9)
    for fam in LinkFamily:
        assert {grp.members for grp in supernodes(g, fam)} == oracle_supernodes(g, fam)


# -- traces -----------------------------------------------------------------------

def test_butterfly_trace(fixtures):
    g = load((fixtures / "butterfly.sst").read_text())
    (t,) = trace(g, g.find("egg"), L)
    assert [g.node(n).proper_name for n in t.path] == ["egg", "caterpillar", "a butterfly", "tree"]
    assert t.termination == "terminated-at-sink" and t.terminal == "final event"
    assert trace_is_legal(g, t)


def test_property_chain_ends_on_atomic_concept(fixtures):
    g = load((fixtures / "chains.sst").read_text())
    (t,) = trace(g, g.find("diagram"), LinkFamily.E)
    assert [g.node(n).proper_name for n in t.path] == ["diagram", "visual", "colour", "blue", "f", "Hz"]
    assert t.terminal == "atomic concept (property)" and t.terminal_as_expected
    (c,) = trace(g, g.find("Mark"), LinkFamily.C)
    assert g.node(c.path[-1]).proper_name == "quarks" and c.terminal == "atomic thing (component)"
    (n,) = trace(g, g.find("Horsefly"), LinkFamily.N)
    assert g.node(n.path[-1]).proper_name == "angel" and n.terminal == "no termination requirement"


def test_cycle_detected_after_three_hops():
    g = load('"a":event (leads to) "b":event\n"b" (leads to) "c":event\n"c" (leads to) "a"')
    (t,) = trace(g, g.find("a"), L)
    assert t.termination == "cycle-detected" and len(t.path) == 4 and t.path[0] == t.path[-1]


def test_budget_and_errors():
    g = load('"a":event (leads to) "b":event\n"b" (leads to) "c":event')
    (t,) = trace(g, g.find("a"), L, budget=1)
    assert t.termination == "budget-exhausted"
    with pytest.raises(UnknownNode):
        trace(g, 99, L)
    with pytest.raises(ValueError):
        trace(g, g.find("a"), L, budget=0)


def test_backward_trace():
    g = load('"a":event (leads to) "b":event\n"b" (leads to) "c":event')
    (t,) = trace(g, g.find("c"), L, direction="backward")
    assert [g.node(n).proper_name for n in t.path] == ["c", "b", "a"]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_trace_legality(seed):
    g = random_graph(random.Random(seed), 6, 10)
    for fam in LinkFamily:
        pairs = forward_pairs(g, fam)
        for n in g.nodes:
            for t in trace(g, n.id, fam, budget=200):
                for a, b in zip(t.path, t.path[1:]):
                    assert (a, b) in pairs
                assert all(g.node(m).meta in join_types(fam, fam) for m in t.path[1:-1])
                assert trace_is_legal(g, t)


def test_contracting_exact_duplicates_keeps_other_roles():
    g = Graph()
    a, c = g.add_node("A", E), g.add_node("C", E)
    bs = [g.add_node(f"B{i}", E) for i in range(3)]
    for b in bs:
        g.add_link(a, PLUS_L, b)
        g.add_link(b, PLUS_L, c)
    before = roles_by_node(g, L)
    after = {r.node: r.roles for r in classify_roles(g, L, collapse=[bs])}
    for n in (a, c):
        assert before[n] == after[n]
