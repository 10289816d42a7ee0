"""Training and matching pipeline: label, balance, fit, score, extract.

A trained matcher bundles the fitted classifier with everything needed to
reproduce its feature space at inference time: the feature ordering, the
active (unmasked) feature subset, the frozen normalization statistics for
the property-based scores, and the featurization settings. Model files
are UTF-8 JSON; floats round-trip exactly through their shortest decimal
form.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import DEFAULT_HYPERPARAMS, MODEL_TYPES, make_classifier
from .config import RunConfig
from .errors import ModelMismatchError, ParseError, TrainingDataError
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    MatchContext,
    PairFeaturizer,
    active_features,
    balance,
    finalize_matrix,
    generate_candidates,
    label_candidates,
)
from .specificity import NormalizationStats, normalize_scores

log = logging.getLogger(__name__)

MODEL_SCHEMA = "etmatch-model/1"


@dataclass(frozen=True)
class MatchTask:
    """One graph pair plus its reference alignment."""

    context: MatchContext
    reference: frozenset[tuple[str, str]]


@dataclass
class MatcherModel:
    """A fitted classifier plus the frozen feature-space definition."""

    model_type: str
    seed: int
    hyperparams: dict
    feature_order: tuple[str, ...]
    active: tuple[str, ...]
    norm_es_h: NormalizationStats
    norm_es_v: NormalizationStats
    estimator: object

    def featurize_settings(self) -> dict:
        return dict(self.hyperparams["featurize"])


def _featurizer_for(context: MatchContext, config: RunConfig, model: MatcherModel | None = None) -> PairFeaturizer:
    if model is not None:
        settings = model.featurize_settings()
        return PairFeaturizer(
            context=context,
            ngram_n=int(settings["ngram_n"]),
            decay=float(settings["lambda"]),
            property_match_threshold=float(settings["property_match_threshold"]),
            norm_es_h=model.norm_es_h,
            norm_es_v=model.norm_es_v,
        ).fit([])
    return PairFeaturizer(
        context=context,
        ngram_n=config.ngram_n,
        decay=config.lambda_,
        property_match_threshold=config.property_match_threshold,
    )


def _warn_unresolvable(task: MatchTask) -> None:
    ctx = task.context
    for id_a, id_b in sorted(task.reference):
        if id_a not in ctx.graph_a.etypes or id_b not in ctx.graph_b.etypes:
            log.warning(
                "reference pair (%s, %s) does not resolve against graphs (%s, %s)",
                id_a, id_b, ctx.graph_a.graph_id, ctx.graph_b.graph_id,
            )


def train_matcher(
    tasks: list[MatchTask],
    config: RunConfig,
    mask: tuple[str, ...] = (),
) -> tuple[MatcherModel, dict]:
    """Fit a matcher on one or more labeled graph pairs.

    Property-based scores are normalized with statistics fitted over the
    pooled candidate population of all training tasks, then frozen into
    the model.
    """
    if not tasks:
        raise TrainingDataError("no training tasks given")
    per_task: list[tuple[list[tuple[str, str]], np.ndarray, np.ndarray]] = []
    for task in tasks:
        _warn_unresolvable(task)
        pairs = generate_candidates(task.context.graph_a, task.context.graph_b)
        featurizer = _featurizer_for(task.context, config)
        raw = featurizer.raw_matrix(pairs)
        labels = label_candidates(pairs, task.reference)
        per_task.append((pairs, raw, labels))

    scope = "+".join(t.context.task_id for t in tasks)
    pooled_h = np.concatenate([raw[:, FEATURE_NAMES.index("es_h")] for _, raw, _ in per_task])
    pooled_v = np.concatenate([raw[:, FEATURE_NAMES.index("es_v")] for _, raw, _ in per_task])
    if pooled_h.size == 0:
        raise TrainingDataError("training tasks contain no candidate pairs")
    _, norm_h = normalize_scores(pooled_h.tolist(), scope=scope)
    _, norm_v = normalize_scores(pooled_v.tolist(), scope=scope)

    X = np.vstack([finalize_matrix(raw, norm_h, norm_v, mask) for _, raw, _ in per_task])
    y = np.concatenate([labels for _, _, labels in per_task])
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise TrainingDataError(
            f"training data is degenerate: {n_pos} positive / {n_neg} negative examples"
        )

    X_bal, y_bal = balance(X, y, config.neg_cap_ratio, config.seed)
    active = active_features(mask)
    col_idx = [FEATURE_NAMES.index(name) for name in active]
    estimator = make_classifier(config.model_type, config.classifier_hyperparams, config.seed)
    estimator.fit(X_bal[:, col_idx], y_bal)

    hyperparams = {
        "classifier": {**DEFAULT_HYPERPARAMS[config.model_type], **config.classifier_hyperparams},
        "featurize": {
            "lambda": config.lambda_,
            "ngram_n": config.ngram_n,
            "property_match_threshold": config.property_match_threshold,
            "include_inherited": config.include_inherited,
            "theta_mode": config.theta_mode,
        },
    }
    model = MatcherModel(
        model_type=config.model_type,
        seed=config.seed,
        hyperparams=hyperparams,
        feature_order=FEATURE_NAMES,
        active=active,
        norm_es_h=norm_h,
        norm_es_v=norm_v,
        estimator=estimator,
    )
    summary = {
        "tasks": len(tasks),
        "candidates": int(y.size),
        "positives": n_pos,
        "negatives": n_neg,
        "balanced_size": int(y_bal.size),
        "model_type": config.model_type,
        "active_features": list(active),
    }
    return model, summary


def _check_feature_order(model: MatcherModel) -> None:
    if tuple(model.feature_order) != FEATURE_NAMES:
        raise ModelMismatchError(
            f"model feature order {list(model.feature_order)} does not match "
            f"this pipeline's {list(FEATURE_NAMES)}"
        )
    unknown = sorted(set(model.active) - set(FEATURE_NAMES))
    if unknown:
        raise ModelMismatchError(f"model lists unknown active features: {unknown}")


def score_candidates(
    model: MatcherModel,
    context: MatchContext,
    config: RunConfig,
    pairs: list[tuple[str, str]] | None = None,
) -> list[tuple[tuple[str, str], float]]:
    """Class-1 scores for candidate pairs under a trained matcher."""
    _check_feature_order(model)
    if pairs is None:
        pairs = generate_candidates(context.graph_a, context.graph_b)
    featurizer = _featurizer_for(context, config, model=model)
    matrix = featurizer.transform(pairs)
    col_idx = [FEATURE_NAMES.index(name) for name in model.active]
    if not pairs:
        return []
    probs = model.estimator.predict_proba(matrix[:, col_idx])[:, 1]
    return [(pair, float(p)) for pair, p in zip(pairs, probs)]


def predict_one(
    model: MatcherModel,
    features: FeatureVector,
    threshold: float = 0.5,
) -> tuple[float, int]:
    """Score one already-featurized pair and apply the decision threshold."""
    _check_feature_order(model)
    if len(features.values) != len(model.feature_order):
        raise ModelMismatchError(
            f"feature vector has {len(features.values)} values, expected {len(model.feature_order)}"
        )
    col_idx = [FEATURE_NAMES.index(name) for name in model.active]
    row = np.asarray(features.values, dtype=np.float64)[col_idx].reshape(1, -1)
    score = float(model.estimator.predict_proba(row)[0, 1])
    return score, int(score >= threshold)


@dataclass(frozen=True)
class Alignment:
    """Selected correspondences: (id_a, id_b, score, decision) entries."""

    entries: tuple[tuple[str, str, float, int], ...]

    def pairs(self) -> set[tuple[str, str]]:
        return {(a, b) for a, b, _, _ in self.entries}


POLICIES = ("all_positive", "greedy_one_to_one")


def extract_alignment(
    predictions: list[tuple[tuple[str, str], float]],
    policy: str = "all_positive",
    threshold: float = 0.5,
) -> Alignment:
    """Turn scored candidates into correspondences.

    ``all_positive`` keeps every pair at or above the threshold;
    ``greedy_one_to_one`` additionally walks pairs by descending score
    (ties lexicographic) and keeps a pair only while both sides are
    unused.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown extraction policy {policy!r}; expected one of {POLICIES}")
    eligible = [(pair, score) for pair, score in predictions if score >= threshold]
    eligible.sort(key=lambda t: (-t[1], t[0][0], t[0][1]))
    entries: list[tuple[str, str, float, int]] = []
    if policy == "all_positive":
        entries = [(a, b, score, 1) for (a, b), score in eligible]
    else:
        used_a: set[str] = set()
        used_b: set[str] = set()
        for (a, b), score in eligible:
            if a in used_a or b in used_b:
                continue
            used_a.add(a)
            used_b.add(b)
            entries.append((a, b, score, 1))
    seen = set()
    for a, b, _, _ in entries:
        if (a, b) in seen:
            raise ValueError(f"duplicate pair in predictions: {(a, b)}")
        seen.add((a, b))
    return Alignment(entries=tuple(entries))


def write_match_file(
    predictions: list[tuple[tuple[str, str], float]],
    alignment: Alignment,
    path: str | Path,
) -> None:
    """TSV of all candidates: idA, idB, score to 6 decimals, decision flag."""
    selected = alignment.pairs()
    rows = sorted(predictions, key=lambda t: (-t[1], t[0][0], t[0][1]))
    lines = [
        f"{a}\t{b}\t{score:.6f}\t{1 if (a, b) in selected else 0}"
        for (a, b), score in rows
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def model_to_dict(model: MatcherModel) -> dict:
    return {
        "schema": MODEL_SCHEMA,
        "model_type": model.model_type,
        "seed": model.seed,
        "hyperparams": model.hyperparams,
        "feature_order": list(model.feature_order),
        "active_features": list(model.active),
        "norm_stats": {
            "es_h": model.norm_es_h.to_dict(),
            "es_v": model.norm_es_v.to_dict(),
        },
        "parameters": model.estimator.to_payload(),
    }


def save_model(model: MatcherModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def model_from_dict(data: dict, source: str = "<memory>") -> MatcherModel:
    try:
        model_type = data["model_type"]
        if model_type not in MODEL_TYPES:
            raise ModelMismatchError(f"unknown model type {model_type!r} in {source}")
        seed = int(data["seed"])
        hyperparams = data["hyperparams"]
        estimator = make_classifier(model_type, hyperparams.get("classifier", {}), seed)
        estimator.load_payload(data["parameters"])
        return MatcherModel(
            model_type=model_type,
            seed=seed,
            hyperparams=hyperparams,
            feature_order=tuple(data["feature_order"]),
            active=tuple(data["active_features"]),
            norm_es_h=NormalizationStats.from_dict(data["norm_stats"]["es_h"]),
            norm_es_v=NormalizationStats.from_dict(data["norm_stats"]["es_v"]),
            estimator=estimator,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc!r}", path=source) from exc


def load_model(path: str | Path) -> MatcherModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read model file: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc
    return model_from_dict(data, source=str(path))
