from __future__ import annotations

import random

import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    oracle_copresence,
    oracle_equivalence,
    oracle_inheritance,
    oracle_might_be_near,
    random_graph,
)
from sstgraph.core import Graph, LinkFamily, MetaType
from sstgraph.inference import (
    PARTIAL_WARNING,
    UNANIMOUS,
    Hypothesis,
    flag_invalid_generalizations,
    infer_all,
    infer_equivalence,
    infer_event_copresence,
    infer_property_inheritance,
    infer_proximity,
)
from sstgraph.notation import load, serialize


def names(g, h):
    return tuple(g.node(n).proper_name for n in h.subjects)


def test_shared_container_suggests_nearness():
    g = load('"A":thing (contains) "B":thing\n"A" (contains) "C":thing')
    (h,) = infer_proximity(g)
    assert names(g, h) == ("B", "C") and h.scale == g.find("A") and len(h.basis) == 2


def test_single_member_and_existing_near_link():
    assert infer_proximity(load('"A":thing (contains) "B":thing')) == []
    g = load('"A":thing (contains) "B":thing\n"A" (contains) "C":thing\n"B" (is near) "C"')
    assert infer_proximity(g) == []


def test_cluedo_copresence(fixtures):
    g = load((fixtures / "cluedo.sst").read_text())
    (h,) = infer_event_copresence(g)
    assert set(names(g, h)) == {"professor plumb", "ms scarlet"}
    assert g.node(h.scale).proper_name == "plumb murders scarlet"


def test_copresence_needs_shared_event():
    g = load('"e1":event (contains) "x":thing\n"e2":event (contains) "y":thing')
    assert infer_event_copresence(g) == []
    assert infer_event_copresence(load('"e1":event (contains) "x":thing')) == []


def test_syllogism_inherits_downward(fixtures):
    g = load((fixtures / "syllogism.sst").read_text())
    hs = infer_property_inheritance(g)
    assert [names(g, h) for h in hs] == [("Mark", "annoying")]


def test_near_node_might_share_property():
    g = load('"X":thing (has property) "P":concept\n"X" (is near) "Y":thing')
    (h,) = infer_property_inheritance(g)
    assert names(g, h) == ("Y", "P")


def test_no_properties_no_inheritance():
    assert infer_property_inheritance(load('"A":thing (contains) "B":thing')) == []


def test_invalid_generalization(fixtures):
    g = load((fixtures / "syllogism.sst").read_text())
    humans, tired = g.find("humans"), g.find("tired")
    h = flag_invalid_generalizations(g, (humans, "has property", tired))
    assert h is not None and h.tier == "invalid" and h.kind == "invalid-generalization"
    # Mark is the only member, so the members are unanimous
    assert UNANIMOUS in h.annotations
    assert flag_invalid_generalizations(g, (humans, "has property", tired), independent_basis=[g.links[0]]) is None


def test_unanimity_follows_member_enumeration():
    src = '"club":thing (contains) "a":thing\n"club" (contains) "b":thing\n"a" (has property) "tall":concept\n'
    g = load(src)
    h = flag_invalid_generalizations(g, (g.find("club"), "has property", g.find("tall")))
    assert h is not None and UNANIMOUS not in h.annotations
    g = load(src + '"b" (has property) "tall"\n')
    h = flag_invalid_generalizations(g, (g.find("club"), "has property", g.find("tall")))
    assert UNANIMOUS in h.annotations


def test_generalization_rule_does_not_apply():
    g = load('"humans":thing (contains) "Mark":thing\nnode "tired" : concept')
    assert flag_invalid_generalizations(g, (g.find("humans"), "has property", g.find("tired"))) is None
    assert flag_invalid_generalizations(g, (g.find("humans"), "contains", g.find("Mark"))) is None


def test_equivalence_full_and_partial():
    base = '"A":thing (contains) "B1":thing\n"A" (contains) "B2":thing\n"B1" (contains) "C":thing\n"B2" (contains) "C"\n'
    g = load(base)
    (h,) = infer_equivalence(g)
    assert set(names(g, h)) == {"B1", "B2"} and PARTIAL_WARNING not in h.annotations
    g = load(base + '"B1" (has property) "blue":concept\n')
    (h,) = infer_equivalence(g)
    assert PARTIAL_WARNING in h.annotations
    assert infer_equivalence(load('"A":thing (contains) "B":thing')) == []


def test_invalid_tier_reserved_for_generalization():
    with pytest.raises(ValueError):
        Hypothesis("might-be-near", (0, 1), (), tier="invalid")


# -- properties ----------------------------------------------------------------------

def _triples(hs):
    return {(h.subjects[0], h.subjects[1], h.scale) for h in hs}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_generators_equal_exhaustive_enumeration(seed):
    g = random_graph(random.Random(seed), 8, 12)
    assert _triples(infer_proximity(g)) == oracle_might_be_near(g)
    assert _triples(infer_event_copresence(g)) == oracle_copresence(g)
    assert _triples(infer_property_inheritance(g)) == oracle_inheritance(g)
    eq = {(h.annotations[0].split()[-1], frozenset(h.subjects)) for h in infer_equivalence(g)}
    assert eq == oracle_equivalence(g)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_basis_soundness_and_non_mutation(seed):
    g = random_graph(random.Random(seed), 7, 10, self_loops=False)
    before = serialize(g)
    hs = infer_all(g)
    assert serialize(g) == before
    links = g.links
    for h in hs:
        for b in h.basis:
            assert b in links
        if h.kind == "functional-equivalence":
            continue
        for drop in h.basis:
            rest = Graph(g.aliases.copy())
            for n in g.nodes:
                rest.add_node(n.proper_name, n.meta, n.attributes)
            for l in links:
                if l != drop:
                    rest.add_link(l.src, l.typ, l.dst, l.weight, label=l.label)
            assert h not in infer_all(rest)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_inheritance_only_goes_downward(seed):
    g = random_graph(random.Random(seed), 7, 12)
    for h in infer_property_inheritance(g):
        member = h.subjects[0]
        for b in h.basis:
            if b.family is LinkFamily.C:
                assert b.canonical().dst == member


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_deterministic_ordering(seed):
    g = random_graph(random.Random(seed), 7, 12)
    hs = infer_all(g)
    assert hs == sorted(hs, key=lambda h: h.sort_key)
    assert hs == infer_all(g)


def test_meta_constraints_of_copresence():
    g = Graph()
    e = g.add_node("scene", MetaType.EVENT)
    sub = g.add_node("sub-event", MetaType.EVENT)
    x = g.add_node("x", MetaType.THING)
    g.add_link(e, "contains", sub)
    g.add_link(e, "contains", x)
    assert infer_event_copresence(g) == []
