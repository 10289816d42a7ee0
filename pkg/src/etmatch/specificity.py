"""Property-based etype similarity.

A property identifies an etype more strongly when few etypes share it
(shareability) and when it first appears deep in the hierarchy (layer).
The two raw etype similarities aggregate per-property specificity over the
properties matched between a candidate etype pair, one value per view:

* horizontal: specificity decays exponentially with the number of etypes
  a property describes;
* vertical: specificity grows linearly with the most general layer at
  which a property appears, rescaled by the owning graph's depth.

Raw scores are then normalized in two stages over a task's full candidate
population: z-score, then min-max of the z-values onto [0, 1]. The fitted
statistics are frozen into trained models so inference reuses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .graph import EtypeGraph, GraphStats, Property
from .strings import levenshtein_sim


def shareability_specificity(weight: float, etype_count: int, decay: float) -> float:
    """weight * exp(decay * (1 - etype_count)).

    Equals ``weight`` for a property describing a single etype and decays
    strictly as more etypes share the property.
    """
    if etype_count < 1:
        raise ValueError(f"etype_count must be >= 1, got {etype_count}")
    if decay <= 0:
        raise ValueError(f"decay must be > 0, got {decay}")
    return weight * math.exp(decay * (1 - etype_count))


def layer_specificity(weight: float, min_layer: int, layer_scale: float) -> float:
    """weight * layer_scale * min_layer.

    ``layer_scale`` is 1 / max_depth of the owning graph, which pins the
    value into [0, weight].
    """
    if min_layer < 1:
        raise ValueError(f"min_layer must be >= 1, got {min_layer}")
    if layer_scale <= 0:
        raise ValueError(f"layer_scale must be > 0, got {layer_scale}")
    return weight * layer_scale * min_layer


@dataclass(frozen=True)
class PropertyPairing:
    """One-to-one pairing between properties of two etypes."""

    matched_pairs: tuple[tuple[str, str], ...]

    @property
    def k(self) -> int:
        return len(self.matched_pairs)


def match_properties(
    props_a: Sequence[Property],
    props_b: Sequence[Property],
    threshold: float = 0.9,
) -> PropertyPairing:
    """Greedy one-to-one pairing of properties by normalized label.

    Exact label matches pair first; remaining candidates pair by
    descending Levenshtein similarity at or above ``threshold``, ties
    broken by lexicographic id order.
    """
    a_sorted = sorted(props_a, key=lambda p: p.id)
    b_sorted = sorted(props_b, key=lambda p: p.id)
    used_a: set[str] = set()
    used_b: set[str] = set()
    pairs: list[tuple[str, str]] = []

    by_label_b: dict[str, list[Property]] = {}
    for p in b_sorted:
        by_label_b.setdefault(p.label, []).append(p)
    for pa in a_sorted:
        for pb in by_label_b.get(pa.label, []):
            if pb.id not in used_b:
                pairs.append((pa.id, pb.id))
                used_a.add(pa.id)
                used_b.add(pb.id)
                break

    scored: list[tuple[float, str, str]] = []
    for pa in a_sorted:
        if pa.id in used_a:
            continue
        for pb in b_sorted:
            if pb.id in used_b:
                continue
            sim = levenshtein_sim(pa.label, pb.label)
            if sim >= threshold:
                scored.append((sim, pa.id, pb.id))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    for _, ida, idb in scored:
        if ida in used_a or idb in used_b:
            continue
        pairs.append((ida, idb))
        used_a.add(ida)
        used_b.add(idb)

    return PropertyPairing(matched_pairs=tuple(pairs))


@dataclass(frozen=True)
class PropertyView:
    """What the similarity metrics need to know about one etype's side.

    ``properties`` is the etype's property set (direct or closed over
    inheritance, depending on how the stats were computed); the maps carry
    shareability counts and first-appearance layers for the whole graph.
    """

    etype_id: str
    properties: tuple[Property, ...]
    n_of: Mapping[str, int]
    min_layer_of: Mapping[str, int]
    max_depth: int


def property_view(graph: EtypeGraph, stats: GraphStats, etype_id: str) -> PropertyView:
    """Assemble the per-etype view over a graph's stats."""
    prop_ids = stats.prop_closure[etype_id]
    props = tuple(graph.properties[pid] for pid in sorted(prop_ids))
    return PropertyView(
        etype_id=etype_id,
        properties=props,
        n_of=stats.n_of,
        min_layer_of=stats.min_layer_of,
        max_depth=stats.max_depth,
    )


def _weights(view: PropertyView) -> dict[str, float]:
    return {p.id: p.weight for p in view.properties}


def horizontal_similarity(
    side_a: PropertyView,
    side_b: PropertyView,
    pairing: PropertyPairing,
    decay: float = 0.1,
) -> float:
    """Raw shareability-based etype similarity; symmetric, in [0, 1].

    Each matched property contributes its per-graph specificity divided by
    that side's property count; an etype without properties scores 0.
    """
    size_a = len(side_a.properties)
    size_b = len(side_b.properties)
    if size_a == 0 or size_b == 0:
        return 0.0
    w_a = _weights(side_a)
    w_b = _weights(side_b)
    total = 0.0
    for pid_a, pid_b in pairing.matched_pairs:
        sp_a = shareability_specificity(w_a[pid_a], side_a.n_of[pid_a], decay)
        sp_b = shareability_specificity(w_b[pid_b], side_b.n_of[pid_b], decay)
        total += sp_a / size_a + sp_b / size_b
    return 0.5 * total


def vertical_similarity(
    side_a: PropertyView,
    side_b: PropertyView,
    pairing: PropertyPairing,
    layer_scale_a: float | None = None,
    layer_scale_b: float | None = None,
) -> float:
    """Raw layer-based etype similarity; symmetric, in [0, 1].

    Uses the most general (smallest) layer at which each matched property
    appears; layer scales default to 1 / max_depth of each owning graph.
    """
    size_a = len(side_a.properties)
    size_b = len(side_b.properties)
    if size_a == 0 or size_b == 0:
        return 0.0
    scale_a = 1.0 / side_a.max_depth if layer_scale_a is None else layer_scale_a
    scale_b = 1.0 / side_b.max_depth if layer_scale_b is None else layer_scale_b
    w_a = _weights(side_a)
    w_b = _weights(side_b)
    total = 0.0
    for pid_a, pid_b in pairing.matched_pairs:
        l_a = layer_specificity(w_a[pid_a], side_a.min_layer_of[pid_a], scale_a)
        l_b = layer_specificity(w_b[pid_b], side_b.min_layer_of[pid_b], scale_b)
        total += l_a / size_a + l_b / size_b
    return 0.5 * total


@dataclass(frozen=True)
class NormalizationStats:
    """Frozen two-stage normalization parameters for one score family."""

    mean: float
    std_dev: float
    min_z: float
    max_z: float
    scope: str = ""

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_dev": self.std_dev,
            "min_z": self.min_z,
            "max_z": self.max_z,
            "scope": self.scope,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationStats":
        return cls(
            mean=float(d["mean"]),
            std_dev=float(d["std_dev"]),
            min_z=float(d["min_z"]),
            max_z=float(d["max_z"]),
            scope=str(d.get("scope", "")),
        )


def normalize_scores(
    raw: Sequence[float],
    stats: NormalizationStats | None = None,
    scope: str = "",
) -> tuple[list[float], NormalizationStats]:
    """Two-stage normalization: z-score, then min-max of z onto [0, 1].

    With ``stats`` omitted the parameters are fitted on ``raw`` (the
    task's full candidate population). With ``stats`` given they are
    reused and outputs are clamped back into [0, 1]. Degenerate
    populations (zero spread) map to the 0.5 midpoint.
    """
    if len(raw) == 0:
        raise ValueError("cannot normalize an empty score list")
    if stats is None:
        n = len(raw)
        mean = math.fsum(raw) / n
        var = math.fsum((x - mean) ** 2 for x in raw) / n
        std = math.sqrt(var)
        if std == 0.0:
            fitted = NormalizationStats(mean=mean, std_dev=0.0, min_z=0.0, max_z=0.0, scope=scope)
            return [0.5] * n, fitted
        z = [(x - mean) / std for x in raw]
        min_z = min(z)
        max_z = max(z)
        fitted = NormalizationStats(mean=mean, std_dev=std, min_z=min_z, max_z=max_z, scope=scope)
        if min_z == max_z:
            return [0.5] * n, fitted
        span = max_z - min_z
        return [(v - min_z) / span for v in z], fitted

    if stats.std_dev == 0.0 or stats.min_z == stats.max_z:
        return [0.5] * len(raw), stats
    span = stats.max_z - stats.min_z
    out = []
    for x in raw:
        z = (x - stats.mean) / stats.std_dev
        out.append(min(1.0, max(0.0, (z - stats.min_z) / span)))
    return out, stats
