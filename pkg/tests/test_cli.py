import json

import pytest

from etmatch.cli import main
from etmatch.matcher import load_model

GRAPH_NAMES = {
    "a": ("A", ["vehicle", "car", "truck", "boat"]),
    "b": ("B", ["vehicle", "carx", "truk", "ship"]),
}


def _graph_doc(gid, names):
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
    return {"graph_id": gid, "properties": props, "etypes": etypes}


@pytest.fixture
def workspace(tmp_path):
    paths = {}
    for key, (gid, names) in GRAPH_NAMES.items():
        path = tmp_path / f"{gid}.json"
        path.write_text(json.dumps(_graph_doc(gid, names)), encoding="utf-8")
        paths[key] = path
    ref = tmp_path / "reference.tsv"
    ref.write_text("A0\tB0\nA1\tB1\nA2\tB2\n", encoding="utf-8")
    paths["ref"] = ref
    paths["dir"] = tmp_path
    return paths


def _train(workspace, out, extra=()):
    return main(
        [
            "train",
            "--pair",
            str(workspace["a"]),
            str(workspace["b"]),
            str(workspace["ref"]),
            "--out",
            str(out),
            "--model-type",
            "lr",
            "--seed",
            "7",
            *extra,
        ]
    )


def test_validate_ok(workspace, capsys):
    assert main(["validate", str(workspace["a"])]) == 0
    out = capsys.readouterr().out
    assert "graph A" in out
    assert "4 etypes" in out


def test_validate_cycle(tmp_path, capsys):
    doc = {
        "graph_id": "loop",
        "properties": [],
        "etypes": [
            {"id": "x", "label": "x", "properties": [], "parents": ["y"]},
            {"id": "y", "label": "y", "properties": [], "parents": ["x"]},
        ],
    }
    path = tmp_path / "loop.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["validate", str(path)]) == 2
    assert "cycle" in capsys.readouterr().err


def test_validate_missing_file(tmp_path, capsys):
    missing = tmp_path / "absent.json"
    assert main(["validate", str(missing)]) == 2
    assert "absent.json" in capsys.readouterr().err


def test_train_writes_model_deterministically(workspace, capsys):
    out1 = workspace["dir"] / "m1.json"
    out2 = workspace["dir"] / "m2.json"
    assert _train(workspace, out1) == 0
    assert "trained logistic_regression" in capsys.readouterr().out
    assert _train(workspace, out2) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_train_needs_positives(workspace, capsys):
    bad_ref = workspace["dir"] / "nothing.tsv"
    bad_ref.write_text("Q1\tQ2\n", encoding="utf-8")
    code = main(
        [
            "train",
            "--pair",
            str(workspace["a"]),
            str(workspace["b"]),
            str(bad_ref),
            "--out",
            str(workspace["dir"] / "m.json"),
        ]
    )
    assert code == 3
    assert "positive" in capsys.readouterr().err


def test_train_mask_recorded_in_model(workspace):
    out = workspace["dir"] / "masked.json"
    assert _train(workspace, out, extra=("--mask", "es_h,es_v")) == 0
    model = load_model(out)
    assert "es_h" not in model.active
    assert "es_v" not in model.active
    assert "ngram" in model.active


def test_match_rows_and_determinism(workspace, capsys):
    model_path = workspace["dir"] / "model.json"
    assert _train(workspace, model_path) == 0
    out1 = workspace["dir"] / "align1.tsv"
    out2 = workspace["dir"] / "align2.tsv"
    for out in (out1, out2):
        code = main(
            [
                "match",
                str(workspace["a"]),
                str(workspace["b"]),
                "--model",
                str(model_path),
                "--out",
                str(out),
            ]
        )
        assert code == 0
    capsys.readouterr()
    lines = out1.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 16
    for line in lines:
        a, b, score_text, decision = line.split("\t")
        assert decision in {"0", "1"}
        float(score_text)
    assert out1.read_bytes() == out2.read_bytes()


def test_match_greedy_policy_is_one_to_one(workspace):
    model_path = workspace["dir"] / "model.json"
    assert _train(workspace, model_path) == 0
    out = workspace["dir"] / "greedy.tsv"
    code = main(
        [
            "match",
            str(workspace["a"]),
            str(workspace["b"]),
            "--model",
            str(model_path),
            "--out",
            str(out),
            "--policy",
            "greedy-1to1",
        ]
    )
    assert code == 0
    selected = [
        line.split("\t")
        for line in out.read_text(encoding="utf-8").splitlines()
        if line.endswith("\t1")
    ]
    sources = [row[0] for row in selected]
    targets = [row[1] for row in selected]
    assert len(sources) == len(set(sources))
    assert len(targets) == len(set(targets))


def test_match_rejects_tampered_model(workspace, capsys):
    model_path = workspace["dir"] / "model.json"
    assert _train(workspace, model_path) == 0
    doc = json.loads(model_path.read_text(encoding="utf-8"))
    doc["feature_order"] = list(reversed(doc["feature_order"]))
    model_path.write_text(json.dumps(doc), encoding="utf-8")
    code = main(
        [
            "match",
            str(workspace["a"]),
            str(workspace["b"]),
            "--model",
            str(model_path),
            "--out",
            str(workspace["dir"] / "x.tsv"),
        ]
    )
    assert code == 4
    assert "feature order" in capsys.readouterr().err


def test_eval_perfect_and_half(workspace, capsys):
    pred = workspace["dir"] / "pred.tsv"
    pred.write_text("A0\tB0\nA1\tB1\nA2\tB2\n", encoding="utf-8")
    assert main(["eval", str(pred), str(workspace["ref"])]) == 0
    out = capsys.readouterr().out
    assert "1.000" in out
    assert "tp 3  fp 0  fn 0" in out

    half = workspace["dir"] / "half.tsv"
    half.write_text("A0\tB0\nA9\tB9\n", encoding="utf-8")
    ref2 = workspace["dir"] / "ref2.tsv"
    ref2.write_text("A0\tB0\nA1\tB1\n", encoding="utf-8")
    assert main(["eval", str(half), str(ref2)]) == 0
    out = capsys.readouterr().out
    assert "0.500" in out


def test_eval_xml_reference_matches_tsv(workspace, capsys):
    pred = workspace["dir"] / "pred.tsv"
    pred.write_text("A0\tB0\nA1\tB1\n", encoding="utf-8")
    xml = workspace["dir"] / "ref.xml"
    xml.write_text(
        """<rdf:RDF xmlns="http://knowledgeweb.semanticweb.org/heterogeneity/alignment"
                xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
          <Alignment>
            <map><Cell>
              <entity1 rdf:resource="http://x.org/g1#A0"/>
              <entity2 rdf:resource="http://x.org/g2#B0"/>
              <relation>=</relation>
            </Cell></map>
            <map><Cell>
              <entity1 rdf:resource="http://x.org/g1#A1"/>
              <entity2 rdf:resource="http://x.org/g2#B1"/>
              <relation>=</relation>
            </Cell></map>
            <map><Cell>
              <entity1 rdf:resource="http://x.org/g1#A2"/>
              <entity2 rdf:resource="http://x.org/g2#B2"/>
              <relation>=</relation>
            </Cell></map>
          </Alignment>
        </rdf:RDF>""",
        encoding="utf-8",
    )
    assert main(["eval", str(pred), str(xml)]) == 0
    from_xml = capsys.readouterr().out
    assert main(["eval", str(pred), str(workspace["ref"])]) == 0
    from_tsv = capsys.readouterr().out
    assert from_xml == from_tsv
    assert "tp 2  fp 0  fn 1" in from_tsv


def test_eval_empty_reference(workspace, capsys):
    pred = workspace["dir"] / "pred.tsv"
    pred.write_text("A0\tB0\n", encoding="utf-8")
    empty = workspace["dir"] / "empty.tsv"
    empty.write_text("", encoding="utf-8")
    assert main(["eval", str(pred), str(empty)]) == 5
    assert "reference" in capsys.readouterr().err


def test_eval_missing_input(workspace, capsys):
    assert main(["eval", str(workspace["dir"] / "nope.tsv"), str(workspace["ref"])]) == 2
    capsys.readouterr()


def test_eval_json_format(workspace, capsys):
    pred = workspace["dir"] / "pred.tsv"
    pred.write_text("A0\tB0\nA1\tB1\nA2\tB2\n", encoding="utf-8")
    assert main(["eval", str(pred), str(workspace["ref"]), "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload[0]["name"] == "overall"
    assert payload[0]["precision"] == 1.0


def test_ablate_rows_and_determinism(workspace, capsys):
    argv = [
        "ablate",
        "--train-pair",
        str(workspace["a"]),
        str(workspace["b"]),
        str(workspace["ref"]),
        "--test-pair",
        str(workspace["a"]),
        str(workspace["b"]),
        str(workspace["ref"]),
        "--model-type",
        "lr",
        "--seed",
        "7",
    ]
    assert main(argv) == 0
    first = capsys.readouterr().out
    rows = first.splitlines()
    assert rows[0].startswith("variant")
    assert [r.split()[0] for r in rows[1:]] == ["B", "B+ES_v", "B+ES_h", "B+ES_v+ES_h"]
    assert main(argv) == 0
    assert capsys.readouterr().out == first


def test_config_file_unknown_key(workspace, capsys):
    cfg = workspace["dir"] / "run.cfg"
    cfg.write_text("wibble = 3\n", encoding="utf-8")
    code = _train(workspace, workspace["dir"] / "m.json", extra=("--config", str(cfg)))
    assert code == 2
    assert "wibble" in capsys.readouterr().err


def test_config_bad_value(workspace, capsys):
    cfg = workspace["dir"] / "run.cfg"
    cfg.write_text("threshold = 1.5\n", encoding="utf-8")
    code = _train(workspace, workspace["dir"] / "m.json", extra=("--config", str(cfg)))
    assert code == 2
    assert "threshold" in capsys.readouterr().err


def test_flag_overrides_config(workspace, capsys):
    cfg = workspace["dir"] / "run.cfg"
    cfg.write_text("model_type = logistic_regression\nseed = 9\n", encoding="utf-8")
    out = workspace["dir"] / "override.json"
    code = main(
        [
            "train",
            "--config",
            str(cfg),
            "--pair",
            str(workspace["a"]),
            str(workspace["b"]),
            str(workspace["ref"]),
            "--out",
            str(out),
            "--model-type",
            "dt",
        ]
    )
    assert code == 0
    capsys.readouterr()
    model = load_model(out)
    assert model.model_type == "decision_tree"
    assert model.seed == 9


def test_help_exits_zero():
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0
