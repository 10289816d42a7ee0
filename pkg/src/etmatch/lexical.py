"""Language-based similarity: taxonomy depth similarity and word embeddings.

Both resources are user-supplied files, immutable after load, and optional
at the pipeline level (lookups that miss fall back to fixed scores so
feature vectors stay total).

Taxonomy file: UTF-8 TSV with ``child<TAB>parent`` edge lines and optional
``synonym<TAB>term<TAB>concept`` lines. Embedding file: UTF-8 text with an
optional ``count dim`` header line followed by ``token v1 v2 ... vd``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import ParseError, ValidationError
from .strings import normalize_label


@dataclass(frozen=True)
class Taxonomy:
    """A single-rooted concept DAG with shortest-path depths (root = 1)."""

    nodes: frozenset[str]
    parents_of: Mapping[str, frozenset[str]]
    depth_of: Mapping[str, int]
    root: str
    lookup: Mapping[str, str]  # normalized concept label or synonym -> concept id


@dataclass(frozen=True)
class EmbeddingTable:
    """Token vectors of one shared dimension; no NaN or infinite entries."""

    dimension: int
    vectors: Mapping[str, np.ndarray]


def load_taxonomy(path: str | Path) -> Taxonomy:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read taxonomy file: {exc}", path=str(path)) from exc

    parents: dict[str, set[str]] = {}
    synonyms: dict[str, str] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = line.split("\t")
        if cells[0] == "synonym":
            if len(cells) != 3:
                raise ParseError("synonym line must be 'synonym<TAB>term<TAB>concept'", str(path), lineno)
            synonyms[normalize_label(cells[1])] = cells[2]
            continue
        if len(cells) != 2:
            raise ParseError("edge line must be 'child<TAB>parent'", str(path), lineno)
        child, parent = cells
        parents.setdefault(parent, set())
        parents.setdefault(child, set()).add(parent)

    for term, concept in synonyms.items():
        if concept not in parents:
            raise ParseError(f"synonym {term!r} points to unknown concept {concept!r}", str(path))

    return build_taxonomy(parents, synonyms)


def build_taxonomy(parents: Mapping[str, set[str] | frozenset[str]], synonyms: Mapping[str, str] | None = None) -> Taxonomy:
    """Validate a child->parents map and compute shortest-path depths."""
    roots = sorted(c for c, ps in parents.items() if not ps)
    if not parents:
        raise ValidationError("taxonomy is empty")
    if len(roots) != 1:
        raise ValidationError(f"taxonomy must have exactly one root, found {roots}")
    root = roots[0]

    depth: dict[str, int] = {root: 1}
    pending = {c: len(ps) for c, ps in parents.items()}
    queue = [root]
    children: dict[str, list[str]] = {c: [] for c in parents}
    for child, ps in parents.items():
        for p in ps:
            if p not in parents:
                raise ValidationError(f"edge references unknown parent concept {p!r}")
            children[p].append(child)
    while queue:
        node = queue.pop(0)
        for child in children[node]:
            cand = depth[node] + 1
            if child not in depth or cand < depth[child]:
                depth[child] = cand
            pending[child] -= 1
            if pending[child] == 0:
                queue.append(child)
    missing = sorted(c for c in parents if c not in depth or pending.get(c, 0) > 0)
    if missing:
        raise ValidationError(f"taxonomy concepts unreachable from root or cyclic: {missing}")

    lookup: dict[str, str] = {}
    for concept in parents:
        lookup.setdefault(normalize_label(concept), concept)
    for term, concept in (synonyms or {}).items():
        lookup[term] = concept

    return Taxonomy(
        nodes=frozenset(parents),
        parents_of=MappingProxyType({c: frozenset(ps) for c, ps in sorted(parents.items())}),
        depth_of=MappingProxyType(dict(sorted(depth.items()))),
        root=root,
        lookup=MappingProxyType(dict(sorted(lookup.items()))),
    )


def _ancestors_and_self(tax: Taxonomy, concept: str) -> set[str]:
    seen = {concept}
    stack = [concept]
    while stack:
        for parent in tax.parents_of[stack.pop()]:
            if parent not in seen:
                seen.add(parent)
                stack.append(parent)
    return seen


def wu_palmer_sim(tax: Taxonomy, c1: str, c2: str) -> float:
    """2 * depth(dca) / (depth(c1) + depth(c2)) for the deepest common ancestor."""
    if c1 not in tax.nodes:
        raise KeyError(f"unknown concept {c1!r}")
    if c2 not in tax.nodes:
        raise KeyError(f"unknown concept {c2!r}")
    common = _ancestors_and_self(tax, c1) & _ancestors_and_self(tax, c2)
    dca_depth = max(tax.depth_of[c] for c in common)
    return 2.0 * dca_depth / (tax.depth_of[c1] + tax.depth_of[c2])


def map_label_to_concept(tax: Taxonomy, label: str) -> str | None:
    """Exact-match a normalized label against concept ids and synonyms."""
    return tax.lookup.get(label)


def wupalmer_label_sim(tax: Taxonomy | None, label_a: str, label_b: str) -> float:
    """Taxonomy feature for two labels; 0.0 when either fails to resolve.

    A multi-token label that misses entirely falls back to its head
    (last) token before giving up.
    """
    if tax is None:
        return 0.0

    def resolve(label: str) -> str | None:
        concept = map_label_to_concept(tax, label)
        if concept is None and " " in label:
            concept = map_label_to_concept(tax, label.rsplit(" ", 1)[-1])
        return concept

    ca = resolve(label_a)
    cb = resolve(label_b)
    if ca is None or cb is None:
        return 0.0
    return wu_palmer_sim(tax, ca, cb)


def load_embeddings(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read embedding file: {exc}", path=str(path)) from exc

    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    start = 0
    if lines:
        head = lines[0].split()
        if len(head) == 2 and all(c.isdigit() for c in head):
            dimension = int(head[1])
            start = 1
    for lineno, raw in enumerate(lines[start:], start + 1):
        if not raw.strip():
            continue
        cells = raw.split()
        token = cells[0]
        try:
            vec = np.asarray([float(c) for c in cells[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"non-numeric vector component: {exc}", str(path), lineno) from exc
        if vec.size == 0:
            raise ParseError(f"token {token!r} has no vector components", str(path), lineno)
        if dimension is None:
            dimension = vec.size
        if vec.size != dimension:
            raise ParseError(
                f"token {token!r} has dimension {vec.size}, expected {dimension}", str(path), lineno
            )
        if not np.all(np.isfinite(vec)):
            raise ParseError(f"token {token!r} has non-finite components", str(path), lineno)
        vec.setflags(write=False)
        vectors[token] = vec
    if not vectors:
        raise ParseError("embedding file contains no vectors", path=str(path))
    return EmbeddingTable(dimension=int(dimension), vectors=MappingProxyType(vectors))


OOV_SCORE = 0.5  # midpoint of the clamped cosine scale: no evidence either way


def embedding_sim(table: EmbeddingTable | None, a: str, b: str) -> float:
    """Cosine of token-averaged vectors, affinely mapped from [-1, 1] to [0, 1].

    Returns the no-evidence midpoint when either label has no
    in-vocabulary token (or when a mean vector degenerates to zero).
    """
    if table is None:
        return OOV_SCORE

    def mean_vector(label: str) -> np.ndarray | None:
        found = [table.vectors[t] for t in label.split() if t in table.vectors]
        if not found:
            return None
        return np.mean(found, axis=0)

    va = mean_vector(a)
    vb = mean_vector(b)
    if va is None or vb is None:
        return OOV_SCORE
    na = math.sqrt(float(va @ va))
    nb = math.sqrt(float(vb @ vb))
    if na == 0.0 or nb == 0.0:
        return OOV_SCORE
    if a == b:
        return 1.0
    cos = float(va @ vb) / (na * nb)
    cos = max(-1.0, min(1.0, cos))
    return (cos + 1.0) / 2.0
