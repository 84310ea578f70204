"""Command-line behavior: exit codes, artifacts, manifests, determinism."""
import json

import pytest

from reqpair.cli import main

FAST_CONFIG = {
    "synth_templates": 8,
    "synth_per_class": 15,
    "dim": 128,
    "hidden_units": 32,
    "epochs": 8,
}


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(FAST_CONFIG), encoding="utf-8")
    return str(path)


def test_missing_required_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["eval"])  # --dataset is required
    assert exit_info.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_exits_1():
    with pytest.raises(SystemExit) as exit_info:
        main(["frobnicate"])
    assert exit_info.value.code == 1


def test_synth_writes_corpus_and_manifest(tmp_path):
    out = tmp_path / "synth"
    code = main(["synth", "--per-class", "5", "--seed", "3", "--out", str(out)])
    assert code == 0
    assert (out / "requirements.csv").exists()
    assert (out / "pairs.csv").exists()
    assert (out / "annotations.jsonl").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["config_hash"]


def test_eval_reports_byte_identical(tmp_path, fast_config):
    outputs = []
    for sub in ("one", "two"):
        out = tmp_path / sub
        code = main(["eval", "--dataset", "synth", "--k", "3", "--seed", "7",
                     "--config", fast_config, "--out", str(out)])
        assert code == 0
        outputs.append((out / "report.json").read_bytes())
    assert outputs[0] == outputs[1]


def test_eval_report_schema(tmp_path, fast_config):
    out = tmp_path / "eval"
    assert main(["eval", "--dataset", "synth", "--k", "3", "--seed", "1",
                 "--config", fast_config, "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["schema"] == 1
    assert len(doc["folds"]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "eval"


def test_ingest_gen_pairs_flow(tmp_path):
    reqs = tmp_path / "reqs.csv"
    reqs.write_text("id,doc_id,text\nr1,d,The UAV shall hover.\n"
                    "r2,d,The UAV shall land.\nr3,d,The Pilot shall watch.\n",
                    encoding="utf-8")
    pairs = tmp_path / "pairs.csv"
    pairs.write_text("id1,id2,label\nr1,r2,Conflict\nr1,r3,neutral\n",
                     encoding="utf-8")
    out = tmp_path / "ingested"
    assert main(["ingest", "--requirements", str(reqs), "--pairs", str(pairs),
                 "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert str(reqs) in manifest["inputs"]

    gen_out = tmp_path / "gen"
    assert main(["gen-pairs", "--dataset", str(out), "--out", str(gen_out)]) == 0
    lines = (gen_out / "candidate_pairs.csv").read_text().strip().splitlines()
    assert len(lines) - 1 == 3  # header + n(n-1)/2


def test_ingest_bad_data_exits_2(tmp_path, capsys):
    reqs = tmp_path / "reqs.csv"
    reqs.write_text("id,doc_id,text\nr1,d,alpha\nr1,d,beta\n", encoding="utf-8")
    code = main(["ingest", "--requirements", str(reqs), "--out",
                 str(tmp_path / "out")])
    assert code == 2
    assert "r1" in capsys.readouterr().err


def test_train_predict_filter_flow(tmp_path, fast_config):
    synth_dir = tmp_path / "corpus"
    assert main(["synth", "--per-class", "15", "--seed", "5", "--mode", "cn",
                 "--out", str(synth_dir)]) == 0

    train_out = tmp_path / "model"
    assert main(["train", "--dataset", str(synth_dir), "--mode", "cn",
                 "--seed", "5", "--config", fast_config,
                 "--out", str(train_out)]) == 0
    assert (train_out / "model.json").exists()

    pred_out = tmp_path / "preds"
    assert main(["predict", "--dataset", str(synth_dir), "--mode", "cn",
                 "--model", str(train_out / "model.json"), "--seed", "5",
                 "--config", fast_config, "--out", str(pred_out)]) == 0
    pred_csv = pred_out / "predictions.csv"
    assert pred_csv.exists()

    filt_out = tmp_path / "filtered"
    assert main(["filter", "--dataset", str(synth_dir), "--mode", "cn",
                 "--predictions", str(pred_csv),
                 "--annotations", str(synth_dir / "annotations.jsonl"),
                 "--method", "srl", "--out", str(filt_out)]) == 0
    rows = (filt_out / "filtered_predictions.csv").read_text().strip().splitlines()
    assert rows[0] == "id1,id2,predicted,filtered"


def test_filter_without_required_annotations_exits_2(tmp_path, capsys):
    synth_dir = tmp_path / "corpus"
    assert main(["synth", "--per-class", "5", "--seed", "2", "--mode", "cn",
                 "--out", str(synth_dir)]) == 0
    predictions = tmp_path / "preds.csv"
    pairs = (synth_dir / "pairs.csv").read_text().strip().splitlines()[1:]
    first = pairs[0].split(",")
    predictions.write_text("id1,id2,predicted\n"
                           f"{first[0]},{first[1]},conflict\n", encoding="utf-8")
    # annotation file lacking the srl section for these ids
    annotations = tmp_path / "ann.jsonl"
    annotations.write_text(json.dumps({"id": first[0], "actors": ["uav"]}) + "\n" +
                           json.dumps({"id": first[1], "actors": ["uav"]}) + "\n",
                           encoding="utf-8")
    code = main(["filter", "--dataset", str(synth_dir), "--mode", "cn",
                 "--predictions", str(predictions),
                 "--annotations", str(annotations),
                 "--method", "srl", "--out", str(tmp_path / "filt")])
    assert code == 2
    assert "missing" in capsys.readouterr().err.lower()


def test_cross_domain_cli(tmp_path, fast_config):
    out = tmp_path / "xdom"
    code = main(["cross-domain", "--train", "synth:0,synth:1", "--test", "synth:2",
                 "--mode", "cn", "--seed", "9", "--config", fast_config,
                 "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["kind"] == "single_evaluation"


def test_ftest_cli(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "synth_templates": 8,
        "synth_per_class": 12,
        "dim": 64,
        "hidden_units": 16,
        "epochs": 6,
        "pipeline_a": {"hidden_units": 32, "dim": 128, "epochs": 10},
        "pipeline_b": {"hidden_units": 4, "dim": 16, "epochs": 2},
    }), encoding="utf-8")
    out = tmp_path / "ftest"
    code = main(["ftest", "--dataset", "synth", "--mode", "cn", "--seed", "3",
                 "--config", str(config), "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "ftest.json").read_text())
    assert doc["kind"] == "f_test"
    assert doc["dof"] == [10, 5]


def test_out_defaults_to_env_root(tmp_path, monkeypatch):
    monkeypatch.setenv("REQPAIR_OUT", str(tmp_path / "root"))
    assert main(["synth", "--per-class", "3", "--seed", "1"]) == 0
    assert (tmp_path / "root" / "synth" / "requirements.csv").exists()


def test_embed_import_validates(tmp_path):
    emb = tmp_path / "emb.jsonl"
    emb.write_text('{"id": "a", "vec": [1, 2]}\n{"id": "b", "vec": [3, 4]}\n',
                   encoding="utf-8")
    out = tmp_path / "imported"
    assert main(["embed-import", "--embeddings", str(emb), "--out", str(out)]) == 0
    assert (out / "embeddings.jsonl").exists()

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a", "vec": [1, 2]}\n{"id": "b", "vec": [3]}\n',
                   encoding="utf-8")
    assert main(["embed-import", "--embeddings", str(bad),
                 "--out", str(tmp_path / "x")]) == 2
