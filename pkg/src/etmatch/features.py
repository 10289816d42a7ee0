"""Candidate-pair generation and 7-feature vector assembly.

The feature layout is fixed: three string metrics, two language metrics,
then the two property-based similarities. Masked features stay in the
vector as zeros so one pipeline serves ablation experiments; classifiers
are trained on the unmasked columns only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .graph import EtypeGraph, GraphStats, compute_stats
from .seeds import rng_for
from .lexical import EmbeddingTable, Taxonomy, embedding_sim, wupalmer_label_sim
from .specificity import (
    NormalizationStats,
    PropertyView,
    horizontal_similarity,
    match_properties,
    normalize_scores,
    property_view,
    vertical_similarity,
)
from .strings import lcs_sim, levenshtein_sim, ngram_sim

FEATURE_NAMES: tuple[str, ...] = (
    "ngram",
    "lcs",
    "levenshtein",
    "wupalmer",
    "embedding",
    "es_h",
    "es_v",
)

ES_H_INDEX = FEATURE_NAMES.index("es_h")
ES_V_INDEX = FEATURE_NAMES.index("es_v")


def validate_mask(mask: tuple[str, ...] | list[str]) -> tuple[str, ...]:
    """Check mask entries against the feature inventory; reject masking everything."""
    unknown = sorted(set(mask) - set(FEATURE_NAMES))
    if unknown:
        raise ValidationError(f"unknown feature name(s) in mask: {unknown}")
    canonical = tuple(name for name in FEATURE_NAMES if name in set(mask))
    if len(canonical) == len(FEATURE_NAMES):
        raise ValidationError("empty feature set: mask excludes all features")
    return canonical


def active_features(mask: tuple[str, ...]) -> tuple[str, ...]:
    masked = set(validate_mask(mask))
    return tuple(name for name in FEATURE_NAMES if name not in masked)


@dataclass(frozen=True)
class FeatureVector:
    """Ordered similarity scores for one candidate etype pair."""

    pair: tuple[str, str]
    values: tuple[float, ...]


@dataclass(frozen=True)
class MatchContext:
    """Everything needed to featurize candidate pairs for one graph pair."""

    graph_a: EtypeGraph
    graph_b: EtypeGraph
    stats_a: GraphStats
    stats_b: GraphStats
    taxonomy: Taxonomy | None = None
    embeddings: EmbeddingTable | None = None

    @property
    def task_id(self) -> str:
        return f"{self.graph_a.graph_id}|{self.graph_b.graph_id}"

    def __deepcopy__(self, memo: dict) -> "MatchContext":
        # immutable and shared by design, so the copy is the object itself
        return self


def make_context(
    graph_a: EtypeGraph,
    graph_b: EtypeGraph,
    taxonomy: Taxonomy | None = None,
    embeddings: EmbeddingTable | None = None,
    include_inherited: bool = True,
) -> MatchContext:
    return MatchContext(
        graph_a=graph_a,
        graph_b=graph_b,
        stats_a=compute_stats(graph_a, include_inherited=include_inherited),
        stats_b=compute_stats(graph_b, include_inherited=include_inherited),
        taxonomy=taxonomy,
        embeddings=embeddings,
    )


def generate_candidates(graph_a: EtypeGraph, graph_b: EtypeGraph) -> list[tuple[str, str]]:
    """Full Cartesian product of etype ids in lexicographic order."""
    return [(a, b) for a in sorted(graph_a.etypes) for b in sorted(graph_b.etypes)]


class PairFeaturizer(BaseEstimator, TransformerMixin):
    """Transformer from candidate etype pairs to the 7-column feature matrix.

    ``fit`` learns the two-stage normalization statistics for the
    property-based scores over the supplied candidate population, unless
    pre-fitted statistics are injected (the inference path, where stats
    come from a trained model). ``transform`` emits rows in pair order
    with masked features zeroed. Contexts are immutable, so a fitted
    instance is safe to share across threads.
    """

    def __init__(
        self,
        context: MatchContext,
        ngram_n: int = 2,
        decay: float = 0.1,
        property_match_threshold: float = 0.9,
        mask: tuple[str, ...] = (),
        norm_es_h: NormalizationStats | None = None,
        norm_es_v: NormalizationStats | None = None,
    ):
        self.context = context
        self.ngram_n = ngram_n
        self.decay = decay
        self.property_match_threshold = property_match_threshold
        self.mask = mask
        self.norm_es_h = norm_es_h
        self.norm_es_v = norm_es_v

    def _view(self, side: str, etype_id: str) -> PropertyView:
        if side == "a":
            return property_view(self.context.graph_a, self.context.stats_a, etype_id)
        return property_view(self.context.graph_b, self.context.stats_b, etype_id)

    def raw_matrix(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        """Feature matrix with raw (unnormalized) property-based columns."""
        ctx = self.context
        rows = np.empty((len(pairs), len(FEATURE_NAMES)), dtype=np.float64)
        view_cache_a: dict[str, PropertyView] = {}
        view_cache_b: dict[str, PropertyView] = {}
        for i, (id_a, id_b) in enumerate(pairs):
            label_a = ctx.graph_a.etype(id_a).label
            label_b = ctx.graph_b.etype(id_b).label
            side_a = view_cache_a.get(id_a)
            if side_a is None:
                side_a = view_cache_a[id_a] = self._view("a", id_a)
            side_b = view_cache_b.get(id_b)
            if side_b is None:
                side_b = view_cache_b[id_b] = self._view("b", id_b)
            pairing = match_properties(
                side_a.properties, side_b.properties, threshold=self.property_match_threshold
            )
            rows[i] = (
                ngram_sim(label_a, label_b, self.ngram_n),
                lcs_sim(label_a, label_b),
                levenshtein_sim(label_a, label_b),
                wupalmer_label_sim(ctx.taxonomy, label_a, label_b),
                embedding_sim(ctx.embeddings, label_a, label_b),
                horizontal_similarity(side_a, side_b, pairing, decay=self.decay),
                vertical_similarity(side_a, side_b, pairing),
            )
        return rows

    def fit(self, pairs: list[tuple[str, str]], y=None) -> "PairFeaturizer":
        """Fit normalization stats on this candidate population if not injected."""
        if self.norm_es_h is not None and self.norm_es_v is not None:
            self.norm_es_h_ = self.norm_es_h
            self.norm_es_v_ = self.norm_es_v
            return self
        raw = self.raw_matrix(pairs)
        _, self.norm_es_h_ = normalize_scores(raw[:, ES_H_INDEX].tolist(), scope=self.context.task_id)
        _, self.norm_es_v_ = normalize_scores(raw[:, ES_V_INDEX].tolist(), scope=self.context.task_id)
        return self

    def transform(self, pairs: list[tuple[str, str]]) -> np.ndarray:
        if not hasattr(self, "norm_es_h_"):
            raise ValidationError("featurizer is not fitted; call fit() first")
        raw = self.raw_matrix(pairs)
        return finalize_matrix(raw, self.norm_es_h_, self.norm_es_v_, self.mask)

    def feature_vectors(self, pairs: list[tuple[str, str]]) -> list[FeatureVector]:
        matrix = self.transform(pairs)
        return [
            FeatureVector(pair=pair, values=tuple(float(v) for v in row))
            for pair, row in zip(pairs, matrix)
        ]


def finalize_matrix(
    raw: np.ndarray,
    norm_es_h: NormalizationStats,
    norm_es_v: NormalizationStats,
    mask: tuple[str, ...] = (),
) -> np.ndarray:
    """Apply frozen normalization to the property-based columns and zero masks."""
    out = raw.copy()
    if out.shape[0] > 0:
        out[:, ES_H_INDEX], _ = _column(raw[:, ES_H_INDEX], norm_es_h)
        out[:, ES_V_INDEX], _ = _column(raw[:, ES_V_INDEX], norm_es_v)
    for name in validate_mask(mask) if mask else ():
        out[:, FEATURE_NAMES.index(name)] = 0.0
    return out


def _column(values: np.ndarray, stats: NormalizationStats) -> tuple[np.ndarray, NormalizationStats]:
    normalized, stats = normalize_scores(values.tolist(), stats=stats)
    return np.asarray(normalized, dtype=np.float64), stats


@dataclass(frozen=True)
class LabeledExample:
    """A feature vector with its match/non-match label."""

    features: FeatureVector
    label: int


def label_candidates(
    pairs: list[tuple[str, str]],
    reference: frozenset[tuple[str, str]] | set[tuple[str, str]],
) -> np.ndarray:
    """Binary labels: 1 for pairs present in the reference alignment."""
    ref = set(reference)
    return np.asarray([1 if pair in ref else 0 for pair in pairs], dtype=np.int64)


def balance(
    X: np.ndarray,
    y: np.ndarray,
    neg_cap_ratio: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Rebalance to an exact 1:1 class ratio.

    Negatives are downsampled without replacement to
    ``min(N, ceil(neg_cap_ratio * P))``; positives are then cycled to the
    same count. Output order is a seeded shuffle of the result. Only input
    rows appear in the output, some possibly repeated.
    """
    if neg_cap_ratio <= 0:
        raise ValueError(f"neg_cap_ratio must be > 0, got {neg_cap_ratio}")
    rng = rng_for(seed, "balance")
    pos_idx = np.flatnonzero(y == 1)
    neg_idx = np.flatnonzero(y == 0)
    n_pos = pos_idx.size
    n_neg = neg_idx.size
    if n_pos == 0 or n_neg == 0:
        raise ValueError("balance requires at least one positive and one negative example")

    target = min(n_neg, int(np.ceil(neg_cap_ratio * n_pos)))
    kept_neg = rng.choice(neg_idx, size=target, replace=False) if target < n_neg else neg_idx
    cycled_pos = pos_idx[np.arange(target) % n_pos]

    combined = np.concatenate([cycled_pos, np.sort(kept_neg)])
    order = rng.permutation(combined.size)
    combined = combined[order]
    return X[combined], y[combined]
