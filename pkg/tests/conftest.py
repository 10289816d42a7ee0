"""Shared fixtures: small hand-built graphs, a toy taxonomy, toy embeddings."""

import json

import pytest

from etmatch.graph import graph_from_dict
from etmatch.lexical import load_embeddings, load_taxonomy


@pytest.fixture
def chain_graph():
    # entity -> person -> athlete, "name" attached directly to person
    return graph_from_dict(
        {
            "graph_id": "chain",
            "properties": [{"id": "p_name", "label": "name"}],
            "etypes": [
                {"id": "entity", "label": "entity", "properties": [], "parents": []},
                {"id": "person", "label": "person", "properties": ["p_name"], "parents": ["entity"]},
                {"id": "athlete", "label": "athlete", "properties": [], "parents": ["person"]},
            ],
        }
    )


@pytest.fixture
def diamond_graph():
    # two paths from the root to "leaf": direct (depth 2) and via "mid" (depth 3)
    return graph_from_dict(
        {
            "graph_id": "diamond",
            "properties": [],
            "etypes": [
                {"id": "root", "label": "root", "properties": [], "parents": []},
                {"id": "mid", "label": "mid", "properties": [], "parents": ["root"]},
                {"id": "side", "label": "side", "properties": [], "parents": ["root"]},
                {"id": "leaf", "label": "leaf", "properties": [], "parents": ["root", "mid"]},
            ],
        }
    )


@pytest.fixture
def sharing_graphs():
    # A: "name" describes two etypes; B: "name" describes one etype.
    graph_a = graph_from_dict(
        {
            "graph_id": "A",
            "properties": [
                {"id": "a_name", "label": "name"},
                {"id": "a_age", "label": "age"},
            ],
            "etypes": [
                {"id": "ea", "label": "person", "properties": ["a_name", "a_age"], "parents": []},
                {"id": "e2", "label": "place", "properties": ["a_name"], "parents": []},
            ],
        }
    )
    graph_b = graph_from_dict(
        {
            "graph_id": "B",
            "properties": [
                {"id": "b_name", "label": "name"},
                {"id": "b_birth", "label": "birthdate"},
            ],
            "etypes": [
                {"id": "eb", "label": "human", "properties": ["b_name", "b_birth"], "parents": []},
            ],
        }
    )
    return graph_a, graph_b


@pytest.fixture
def layered_graphs():
    # depth-4 chains; "shared tag" first appears at layer 2 in A, layer 4 in B
    def chain(gid, tag_at, filler_label):
        etypes = []
        props = [
            {"id": f"{gid}_tag", "label": "shared tag"},
            {"id": f"{gid}_fill", "label": filler_label},
        ]
        for i in range(1, 5):
            direct = []
            if i == tag_at:
                direct = [f"{gid}_tag", f"{gid}_fill"]
            etypes.append(
                {
                    "id": f"{gid}{i}",
                    "label": f"{gid} level {i}",
                    "properties": direct,
                    "parents": [] if i == 1 else [f"{gid}{i - 1}"],
                }
            )
        return graph_from_dict({"graph_id": gid, "properties": props, "etypes": etypes})

    return chain("va", 2, "beta"), chain("vb", 4, "gamma")


TAXONOMY_TEXT = """dog\tanimal
cat\tanimal
animal\tentity
paper\tentity
synonym\tconference paper\tpaper
"""

EMBEDDINGS_TEXT = """3 2
alpha 1 0
beta 0 1
gamma 1 1
"""


@pytest.fixture
def toy_taxonomy(tmp_path):
    path = tmp_path / "taxonomy.tsv"
    path.write_text(TAXONOMY_TEXT, encoding="utf-8")
    return load_taxonomy(path)


@pytest.fixture
def toy_embeddings(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text(EMBEDDINGS_TEXT, encoding="utf-8")
    return load_embeddings(path)


def write_graph_file(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path
