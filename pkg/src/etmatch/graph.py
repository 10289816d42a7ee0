"""Etype graph data model, ingestion, and derived statistics.

An etype graph is a rooted inheritance hierarchy of entity types, each
associated with a set of properties. Graphs are immutable after
construction and safe to share across threads.

File format (UTF-8 JSON)::

    {
      "graph_id": "cmt",
      "properties": [{"id": "p1", "label": "hasName", "weight": 1.0}, ...],
      "etypes": [{"id": "e1", "label": "Person",
                  "properties": ["p1"], "parents": []}, ...]
    }

``weight`` is optional and defaults to 1.0. Unknown fields are rejected in
strict mode and ignored with a warning otherwise.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import ParseError, ValidationError
from .strings import normalize_label

log = logging.getLogger(__name__)

_PROPERTY_FIELDS = {"id", "label", "weight"}
_ETYPE_FIELDS = {"id", "label", "properties", "parents"}
_TOP_FIELDS = {"graph_id", "properties", "etypes"}


@dataclass(frozen=True)
class Property:
    """A property that can describe etypes; weight must lie in [0, 1]."""

    id: str
    label: str
    weight: float = 1.0


@dataclass(frozen=True)
class Etype:
    """An entity type with its directly declared properties and parents."""

    id: str
    label: str
    property_ids: frozenset[str] = field(default_factory=frozenset)
    parent_ids: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True)
class EtypeGraph:
    """A validated etype hierarchy.

    ``etypes`` and ``properties`` are id-keyed mappings sorted by id;
    ``max_depth`` is the largest layer over all etypes (roots sit at
    layer 1).
    """

    graph_id: str
    etypes: Mapping[str, Etype]
    properties: Mapping[str, Property]
    subclass_edges: frozenset[tuple[str, str]]
    max_depth: int

    def etype(self, etype_id: str) -> Etype:
        try:
            return self.etypes[etype_id]
        except KeyError:
            raise KeyError(f"unknown etype id {etype_id!r} in graph {self.graph_id!r}") from None

    def root_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.etypes.values() if not e.parent_ids)


@dataclass(frozen=True)
class GraphOptions:
    """Ingestion options; ``strict`` rejects unknown fields instead of warning."""

    strict: bool = False


@dataclass(frozen=True)
class GraphStats:
    """Derived per-graph statistics consumed by the similarity metrics.

    ``n_of`` maps a property id to the number of etypes it describes,
    ``min_layer_of`` to the smallest layer among those etypes. Both cover
    exactly the properties associated with at least one etype. When
    ``include_inherited`` is true, an etype is described by its direct
    properties and everything inherited from its ancestors.
    """

    graph_id: str
    include_inherited: bool
    layer_of: Mapping[str, int]
    prop_closure: Mapping[str, frozenset[str]]
    n_of: Mapping[str, int]
    min_layer_of: Mapping[str, int]
    max_depth: int


def _check_unknown_fields(obj: dict, allowed: set[str], what: str, path: str, strict: bool) -> None:
    unknown = sorted(set(obj) - allowed)
    if not unknown:
        return
    msg = f"unknown field(s) {unknown} in {what}"
    if strict:
        raise ParseError(msg, path=path)
    log.warning("%s: %s (ignored)", path, msg)


def _require(obj: dict, key: str, what: str, path: str):
    if key not in obj:
        raise ParseError(f"missing field {key!r} in {what}", path=path)
    return obj[key]


def _compute_layers(etypes: Mapping[str, Etype]) -> dict[str, int]:
    """Shortest-path depth from any root, with roots at layer 1.

    Multiple inheritance resolves to ``1 + min`` over parent layers.
    Raises ValidationError when the parent relation contains a cycle.
    """
    children: dict[str, list[str]] = {eid: [] for eid in etypes}
    pending = {eid: len(e.parent_ids) for eid, e in etypes.items()}
    for e in etypes.values():
        for pid in e.parent_ids:
            children[pid].append(e.id)

    layers: dict[str, int] = {}
    frontier = sorted(eid for eid, n in pending.items() if n == 0)
    for eid in frontier:
        layers[eid] = 1
    queue = list(frontier)
    while queue:
        eid = queue.pop(0)
        for child in children[eid]:
            cur = layers.get(child)
            cand = layers[eid] + 1
            if cur is None or cand < cur:
                layers[child] = cand
            pending[child] -= 1
            if pending[child] == 0:
                queue.append(child)
    unresolved = sorted(eid for eid in etypes if eid not in layers or pending[eid] > 0)
    if unresolved:
        raise ValidationError(f"cycle in subclass hierarchy involving etype(s) {unresolved}")
    return layers


def _build_graph(graph_id: str, properties: list[Property], etypes: list[Etype]) -> EtypeGraph:
    prop_index: dict[str, Property] = {}
    for p in properties:
        if p.id in prop_index:
            raise ValidationError(f"duplicate property id {p.id!r}")
        if not (0.0 <= p.weight <= 1.0):
            raise ValidationError(f"property {p.id!r} weight {p.weight} outside [0, 1]")
        if not p.label:
            raise ValidationError(f"property {p.id!r} label is empty after normalization")
        prop_index[p.id] = p

    etype_index: dict[str, Etype] = {}
    for e in etypes:
        if e.id in etype_index:
            raise ValidationError(f"duplicate etype id {e.id!r}")
        if not e.label:
            raise ValidationError(f"etype {e.id!r} label is empty after normalization")
        etype_index[e.id] = e
    for e in etypes:
        if e.id in e.parent_ids:
            raise ValidationError(f"etype {e.id!r} lists itself as parent (cycle)")
        for pid in sorted(e.property_ids):
            if pid not in prop_index:
                raise ValidationError(f"etype {e.id!r} references dangling property {pid!r}")
        for parent in sorted(e.parent_ids):
            if parent not in etype_index:
                raise ValidationError(f"etype {e.id!r} references unknown parent {parent!r}")

    layers = _compute_layers(etype_index)
    max_depth = max(layers.values(), default=1)
    edges = frozenset(
        (e.id, parent) for e in etype_index.values() for parent in e.parent_ids
    )
    return EtypeGraph(
        graph_id=graph_id,
        etypes=MappingProxyType({eid: etype_index[eid] for eid in sorted(etype_index)}),
        properties=MappingProxyType({pid: prop_index[pid] for pid in sorted(prop_index)}),
        subclass_edges=edges,
        max_depth=max_depth,
    )


def graph_from_dict(data: dict, source: str = "<memory>", options: GraphOptions = GraphOptions()) -> EtypeGraph:
    """Validate a parsed graph document and build the immutable model."""
    if not isinstance(data, dict):
        raise ParseError("top-level value must be an object", path=source)
    _check_unknown_fields(data, _TOP_FIELDS, "graph document", source, options.strict)
    graph_id = _require(data, "graph_id", "graph document", source)
    if not isinstance(graph_id, str) or not graph_id:
        raise ParseError("graph_id must be a non-empty string", path=source)

    properties = []
    raw_props = _require(data, "properties", "graph document", source)
    if not isinstance(raw_props, list):
        raise ParseError("'properties' must be a list", path=source)
    for i, obj in enumerate(raw_props):
        what = f"properties[{i}]"
        if not isinstance(obj, dict):
            raise ParseError(f"{what} must be an object", path=source)
        _check_unknown_fields(obj, _PROPERTY_FIELDS, what, source, options.strict)
        pid = _require(obj, "id", what, source)
        label = _require(obj, "label", what, source)
        weight = obj.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise ParseError(f"{what}: weight must be a number", path=source)
        properties.append(Property(id=str(pid), label=normalize_label(str(label)), weight=float(weight)))

    etypes = []
    raw_etypes = _require(data, "etypes", "graph document", source)
    if not isinstance(raw_etypes, list):
        raise ParseError("'etypes' must be a list", path=source)
    for i, obj in enumerate(raw_etypes):
        what = f"etypes[{i}]"
        if not isinstance(obj, dict):
            raise ParseError(f"{what} must be an object", path=source)
        _check_unknown_fields(obj, _ETYPE_FIELDS, what, source, options.strict)
        eid = _require(obj, "id", what, source)
        label = _require(obj, "label", what, source)
        prop_ids = obj.get("properties", [])
        parent_ids = obj.get("parents", [])
        if not isinstance(prop_ids, list) or not isinstance(parent_ids, list):
            raise ParseError(f"{what}: 'properties' and 'parents' must be lists", path=source)
        etypes.append(
            Etype(
                id=str(eid),
                label=normalize_label(str(label)),
                property_ids=frozenset(str(p) for p in prop_ids),
                parent_ids=frozenset(str(p) for p in parent_ids),
            )
        )
    return _build_graph(graph_id, properties, etypes)


def load_graph(path: str | Path, options: GraphOptions = GraphOptions()) -> EtypeGraph:
    """Load and validate an etype graph from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read graph file: {exc}", path=str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc
    return graph_from_dict(data, source=str(path), options=options)


def graph_to_dict(graph: EtypeGraph) -> dict:
    """Canonical document form: sorted ids, normalized labels, explicit weights."""
    return {
        "graph_id": graph.graph_id,
        "properties": [
            {"id": p.id, "label": p.label, "weight": p.weight}
            for p in graph.properties.values()
        ],
        "etypes": [
            {
                "id": e.id,
                "label": e.label,
                "properties": sorted(e.property_ids),
                "parents": sorted(e.parent_ids),
            }
            for e in graph.etypes.values()
        ],
    }


def save_graph(graph: EtypeGraph, path: str | Path) -> None:
    """Write the canonical JSON form; ``load_graph`` round-trips it exactly."""
    Path(path).write_text(
        json.dumps(graph_to_dict(graph), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _ancestors(etypes: Mapping[str, Etype], eid: str, cache: dict[str, frozenset[str]]) -> frozenset[str]:
    cached = cache.get(eid)
    if cached is not None:
        return cached
    acc: set[str] = set()
    for parent in etypes[eid].parent_ids:
        acc.add(parent)
        acc |= _ancestors(etypes, parent, cache)
    result = frozenset(acc)
    cache[eid] = result
    return result


def compute_stats(graph: EtypeGraph, include_inherited: bool = True) -> GraphStats:
    """Populate layer depths, property closures, and shareability counts."""
    layers = _compute_layers(graph.etypes)
    anc_cache: dict[str, frozenset[str]] = {}
    closures: dict[str, frozenset[str]] = {}
    for eid, e in graph.etypes.items():
        if include_inherited:
            inherited: set[str] = set(e.property_ids)
            for aid in _ancestors(graph.etypes, eid, anc_cache):
                inherited |= graph.etypes[aid].property_ids
            closures[eid] = frozenset(inherited)
        else:
            closures[eid] = e.property_ids

    n_of: dict[str, int] = {}
    min_layer_of: dict[str, int] = {}
    for eid, props in closures.items():
        for pid in props:
            n_of[pid] = n_of.get(pid, 0) + 1
            layer = layers[eid]
            if pid not in min_layer_of or layer < min_layer_of[pid]:
                min_layer_of[pid] = layer

    return GraphStats(
        graph_id=graph.graph_id,
        include_inherited=include_inherited,
        layer_of=MappingProxyType(dict(sorted(layers.items()))),
        prop_closure=MappingProxyType({eid: closures[eid] for eid in sorted(closures)}),
        n_of=MappingProxyType(dict(sorted(n_of.items()))),
        min_layer_of=MappingProxyType(dict(sorted(min_layer_of.items()))),
        max_depth=max(layers.values(), default=1),
    )


def layer(stats: GraphStats, etype_id: str) -> int:
    """Layer of an etype: shortest-path depth from a root, roots at 1."""
    try:
        return stats.layer_of[etype_id]
    except KeyError:
        raise KeyError(f"unknown etype id {etype_id!r} in graph {stats.graph_id!r}") from None
