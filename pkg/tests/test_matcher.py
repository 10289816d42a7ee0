import json
import random

import pytest

from etmatch.config import RunConfig
from etmatch.errors import ModelMismatchError, ParseError, TrainingDataError
from etmatch.features import FEATURE_NAMES, FeatureVector, make_context
from etmatch.graph import graph_from_dict
from etmatch.matcher import (
    MatchTask,
    extract_alignment,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_one,
    save_model,
    score_candidates,
    train_matcher,
    write_match_file,
)


def _chain_pair():
    def build(gid, names):
        etypes, props = [], []
        for i, name in enumerate(names):
            pid = f"{gid}p{i}"
            props.append({"id": pid, "label": f"{name} code"})
            etypes.append(
                {
                    "id": f"{gid}{i}",
                    "label": name,
                    "properties": [pid],
                    "parents": [] if i == 0 else [f"{gid}{i - 1}"],
                }
            )
        return graph_from_dict({"graph_id": gid, "properties": props, "etypes": etypes})

    graph_a = build("A", ["vehicle", "car", "truck", "boat"])
    graph_b = build("B", ["vehicle", "carx", "truk", "ship"])
    reference = frozenset({("A0", "B0"), ("A1", "B1"), ("A2", "B2")})
    return MatchTask(context=make_context(graph_a, graph_b), reference=reference)


@pytest.fixture
def trained():
    task = _chain_pair()
    config = RunConfig(model_type="logistic_regression", seed=7)
    model, summary = train_matcher([task], config)
    return task, config, model, summary


def test_train_summary_counts(trained):
    _, _, _, summary = trained
    assert summary["candidates"] == 16
    assert summary["positives"] == 3
    assert summary["negatives"] == 13
    assert summary["balanced_size"] == 12
    assert summary["active_features"] == list(FEATURE_NAMES)


def test_model_file_round_trip(tmp_path, trained):
    task, config, model, _ = trained
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    before = score_candidates(model, task.context, config)
    after = score_candidates(loaded, task.context, config)
    assert before == after
    path2 = tmp_path / "model2.json"
    save_model(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_model_stores_featurization_settings(trained):
    _, _, model, _ = trained
    doc = model_to_dict(model)
    feat = doc["hyperparams"]["featurize"]
    assert feat["lambda"] == 0.1
    assert feat["ngram_n"] == 2
    assert feat["include_inherited"] is True
    assert feat["theta_mode"] == "inverse_max_depth"
    assert doc["feature_order"] == list(FEATURE_NAMES)
    assert doc["norm_stats"]["es_h"]["scope"] == "A|B"


def test_feature_order_mismatch_rejected(trained):
    task, config, model, _ = trained
    doc = model_to_dict(model)
    doc["feature_order"] = doc["feature_order"][::-1]
    tampered = model_from_dict(doc)
    with pytest.raises(ModelMismatchError):
        score_candidates(tampered, task.context, config)
    with pytest.raises(ModelMismatchError):
        predict_one(tampered, FeatureVector(pair=("a", "b"), values=(0.0,) * 7))


def test_malformed_model_document(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_model(path)
    path2 = tmp_path / "partial.json"
    path2.write_text(json.dumps({"model_type": "decision_tree"}), encoding="utf-8")
    with pytest.raises(ParseError):
        load_model(path2)
    path3 = tmp_path / "unknown.json"
    path3.write_text(json.dumps({"model_type": "perceptron"}), encoding="utf-8")
    with pytest.raises(ModelMismatchError):
        load_model(path3)


def test_predict_one_threshold(trained):
    _, _, model, _ = trained
    vec = FeatureVector(pair=("x", "y"), values=(1.0, 1.0, 1.0, 0.0, 0.5, 0.5, 0.5))
    score, decision = predict_one(model, vec, threshold=0.5)
    assert 0.0 <= score <= 1.0
    assert decision == int(score >= 0.5)


def test_train_requires_positives_and_negatives():
    task = _chain_pair()
    config = RunConfig(model_type="logistic_regression")
    empty_ref = MatchTask(context=task.context, reference=frozenset())
    with pytest.raises(TrainingDataError):
        train_matcher([empty_ref], config)
    with pytest.raises(TrainingDataError):
        train_matcher([], config)


def test_extract_alignment_greedy_fixture():
    predictions = [(("a", "x"), 0.9), (("a", "y"), 0.8), (("b", "y"), 0.7)]
    alignment = extract_alignment(predictions, policy="greedy_one_to_one", threshold=0.5)
    assert alignment.pairs() == {("a", "x"), ("b", "y")}
    all_pos = extract_alignment(predictions, policy="all_positive", threshold=0.5)
    assert len(all_pos.entries) == 3
    nothing = extract_alignment(predictions, policy="all_positive", threshold=0.95)
    assert nothing.entries == ()
    with pytest.raises(ValueError):
        extract_alignment(predictions, policy="best_first", threshold=0.5)


def test_extract_alignment_greedy_is_partial_matching():
    rng = random.Random(2)
    ids_a = [f"a{i}" for i in range(8)]
    ids_b = [f"b{i}" for i in range(8)]
    predictions = [((a, b), round(rng.random(), 6)) for a in ids_a for b in ids_b]
    alignment = extract_alignment(predictions, policy="greedy_one_to_one", threshold=0.0)
    lefts = [a for a, _, _, _ in alignment.entries]
    rights = [b for _, b, _, _ in alignment.entries]
    assert len(lefts) == len(set(lefts))
    assert len(rights) == len(set(rights))
    for _, _, score, decision in alignment.entries:
        assert decision == 1 and score >= 0.0


def test_extract_alignment_rejects_duplicates():
    with pytest.raises(ValueError):
        extract_alignment([(("a", "x"), 0.9), (("a", "x"), 0.8)], threshold=0.0)


def test_write_match_file_format(tmp_path, trained):
    task, config, model, _ = trained
    predictions = score_candidates(model, task.context, config)
    alignment = extract_alignment(predictions, policy="all_positive", threshold=0.5)
    path = tmp_path / "match.tsv"
    write_match_file(predictions, alignment, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 16
    rows = [line.split("\t") for line in lines]
    scores = [float(r[2]) for r in rows]
    assert scores == sorted(scores, reverse=True)
    for row in rows:
        assert len(row) == 4
        assert row[3] in ("0", "1")
        assert "." in row[2] and len(row[2].split(".")[1]) == 6
    selected = {(r[0], r[1]) for r in rows if r[3] == "1"}
    assert selected == alignment.pairs()
