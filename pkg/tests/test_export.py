from __future__ import annotations

import csv
import io
import json

import pytest
from hypothesis import given, settings

from helpers import legal_graphs
from sstgraph.core import ForbiddenTransition, LinkFamily, isomorphic
from sstgraph.export import GraphDocumentError, from_json, to_csv, to_document, to_dot, to_json
from sstgraph.notation import load


def test_document_field_names(fixtures):
    doc = to_document(load((fixtures / "cluedo.sst").read_text()))
    assert list(doc) == ["nodes", "links", "aliases"]
    assert list(doc["nodes"][0]) == ["name", "meta", "attrs"]
    assert {"src", "dst", "family", "sign", "label", "weight"} <= set(doc["links"][0])


@settings(max_examples=100, deadline=None)
@given(legal_graphs())
def test_json_round_trip_is_byte_stable(g):
    text = to_json(g)
    back = from_json(text)
    assert isomorphic(g, back)
    assert to_json(back) == text


def test_json_import_rejects_bad_documents():
    with pytest.raises(GraphDocumentError):
        from_json("{")
    with pytest.raises(GraphDocumentError):
        from_json('{"nodes": [{"name": "a"}], "links": []}')
    bad = {"nodes": [{"name": "a", "meta": "concept", "attrs": {}}, {"name": "b", "meta": "thing", "attrs": {}}],
           "links": [{"src": "a", "dst": "b", "family": "C", "sign": "+", "label": "contains", "weight": 1}],
           "aliases": {}}
    with pytest.raises(ForbiddenTransition):
        from_json(json.dumps(bad))


def test_butterfly_dot(fixtures):
    dot = to_dot(load((fixtures / "butterfly.sst").read_text()))
    assert dot.count("shape=ellipse") == 4
    assert dot.count("->") == 3


def test_dot_styles_per_family():
    g = load('"a":thing (is near) "b":thing\n"a" (contains) "c":thing\n"a" (has property) "p":concept')
    dot = to_dot(g)
    assert 'dir="none"' in dot and 'style="dashed"' in dot and "darkgreen" in dot
    assert "hexagon" in dot and "box" in dot
    only_c = to_dot(g, LinkFamily.C)
    assert only_c.count("->") == 1


def test_confluence_csv_matches_printed_matrix_up_to_order(fixtures):
    g = load((fixtures / "confluence.sst").read_text())
    rows = list(csv.reader(io.StringIO(to_csv(g))))
    header, body = rows[0], [[float(x) for x in r] for r in rows[1:]]
    sink = header.index("sink")
    order = [sink] + [i for i in range(3) if i != sink]
    permuted = [[body[i][j] for j in order] for i in order]
    assert permuted == [[0, 0, 0], [1, 0, 0], [1, 0, 0]]
