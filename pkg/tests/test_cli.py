import json

import pytest

from snapgrid.cli import PARTICIPANT_MODEL, TRAIN_LOG, TRIGGER_MODEL, PipelineConfig, _load_models, main
from snapgrid.corpus import load_corpus, save_corpus
from snapgrid.learner import LRModel
from snapgrid.pipeline import LRPredictor, RulePredictor, event_map, predict_corpus
from snapgrid.ruledsl import parse_rules, validate_ruleset
from snapgrid.scoring import gold_event_map, score

PAIR = """version 1 labels [Phosphorylation, Theme:Phosphorylation, Nil]
rule a participant votes {Theme:Phosphorylation:+2} on Phosphorylation path >prep_of arg [entity=Protein]
rule b participant votes {Theme:Phosphorylation:+2} on Phosphorylation path >prep_of >nn arg [entity=Protein]
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, small_corpus):
    d = tmp_path_factory.mktemp("cli")
    save_corpus(small_corpus[:30], d / "train.jsonl")
    save_corpus(small_corpus[30:45], d / "dev.jsonl")
    assert main(["train", "--corpus", str(d / "train.jsonl"), "--out", str(d / "model"), "--lambda", "0.1"]) == 0
    return d


def _write_models(d, trigger, participant):
    d.mkdir(parents=True, exist_ok=True)
    (d / TRIGGER_MODEL).write_text(json.dumps(trigger.to_json()))
    (d / PARTICIPANT_MODEL).write_text(json.dumps(participant.to_json()))


def test_train_writes_models_and_log(workdir, tmp_path):
    for name in (TRIGGER_MODEL, PARTICIPANT_MODEL):
        LRModel.load(workdir / "model" / name)
    lines = [json.loads(x) for x in (workdir / "model" / TRAIN_LOG).read_text().splitlines()]
    summaries = [x for x in lines if "nonzero" in x]
    assert [x["classifier"] for x in summaries] == ["trigger", "participant"]
    assert all(x["nonzero"] > 0 for x in summaries)
    assert any("loss" in x for x in lines)
    assert main(["train", "--corpus", str(workdir / "train.jsonl"), "--out", str(tmp_path / "again"), "--lambda", "0.1"]) == 0
    assert (tmp_path / "again" / TRAIN_LOG).read_bytes() == (workdir / "model" / TRAIN_LOG).read_bytes()


def test_missing_corpus(tmp_path, capsys):
    missing = tmp_path / "nowhere.jsonl"
    assert main(["train", "--corpus", str(missing), "--out", str(tmp_path / "m")]) == 2
    assert str(missing) in capsys.readouterr().err


def test_startup_prints_effective_config(workdir, tmp_path, capsys):
    main(["train", "--corpus", str(workdir / "train.jsonl"), "--out", str(tmp_path / "m"), "--max-epochs", "3"])
    err = capsys.readouterr().err
    assert '"lambda": null' in err and '"max_epochs": 3' in err and '"reg": "l1"' in err


def test_convert_gives_valid_rule_file(workdir):
    out = workdir / "rules.txt"
    assert main(["convert", "--model-dir", str(workdir / "model"), "--out", str(out)]) == 0
    rs = parse_rules(out.read_text())
    assert validate_ruleset(rs) == []
    assert {r.kind for r in rs.rules} == {"trigger", "participant"}
    report = json.loads((workdir / "rules.report.json").read_text())
    assert set(report) >= {"trigger", "participant"}


def test_convert_zero_convertible(tmp_path):
    trig = LRModel(("Phosphorylation", "Nil"), {"trig.bow.sent:kinase": {"Phosphorylation": 1.0}},
                   {"Phosphorylation": 0.0, "Nil": 0.0}, meta={"classifier": "trigger"})
    part = LRModel(("Theme:Phosphorylation", "Nil"), {"part.dist:2": {"Theme:Phosphorylation": 1.0}},
                   {"Theme:Phosphorylation": 0.0, "Nil": 0.0}, meta={"classifier": "participant"})
    _write_models(tmp_path / "m", trig, part)
    out = tmp_path / "rules.txt"
    assert main(["convert", "--model-dir", str(tmp_path / "m"), "--out", str(out)]) == 0
    rs = parse_rules(out.read_text())
    assert validate_ruleset(rs) == []
    assert all(r.name.endswith("prior") for r in rs.rules) or rs.rules == ()
    report = json.loads((tmp_path / "rules.report.json").read_text())
    assert report["trigger"]["dropped"] == [{"feature": "trig.bow.sent:kinase", "reason": "non-convertible"}]


def test_convert_corrupted_model(tmp_path):
    (tmp_path / "m").mkdir()
    (tmp_path / "m" / TRIGGER_MODEL).write_text("{ not json")
    (tmp_path / "m" / PARTICIPANT_MODEL).write_text("{}")
    assert main(["convert", "--model-dir", str(tmp_path / "m"), "--out", str(tmp_path / "r.txt")]) == 2
    assert not (tmp_path / "r.txt").exists()


def test_convert_degenerate(tmp_path, capsys):
    trig = LRModel(("Phosphorylation", "Nil"), {"trig.lemma:0=x": {"Phosphorylation": 1.0}},
                   {"Phosphorylation": 0.0, "Nil": 0.0}, meta={"classifier": "trigger"})
    _write_models(tmp_path / "m", trig, trig)
    assert main(["convert", "--model-dir", str(tmp_path / "m"), "--out", str(tmp_path / "r.txt")]) == 3
    assert "degenerate weight distribution" in capsys.readouterr().err


def test_apply_and_score_match_in_process(workdir, capsys):
    rules = workdir / "rules.txt"
    if not rules.exists():
        main(["convert", "--model-dir", str(workdir / "model"), "--out", str(rules)])
    dev = load_corpus(workdir / "dev.jsonl")
    gold = gold_event_map(dev)
    rs = parse_rules(rules.read_text())
    for source, predictor in (
        (["--rules", str(rules)], RulePredictor(rs)),
        (["--model-dir", str(workdir / "model")], LRPredictor(_load_models(workdir / "model"))),
    ):
        preds = workdir / "pred.jsonl"
        assert main(["apply", "--corpus", str(workdir / "dev.jsonl"), *source, "--out", str(preds)]) == 0
        capsys.readouterr()
        assert main(["score", "--predictions", str(preds), "--gold", str(workdir / "dev.jsonl"), "--out", str(workdir / "s.json")]) == 0
        table = capsys.readouterr().out
        expected = score(event_map(predict_corpus(predictor, dev)), gold)
        assert table == expected.format_table()
        assert json.loads((workdir / "s.json").read_text()) == json.loads(json.dumps(expected.to_json()))


def test_apply_needs_one_source(workdir):
    assert main(["apply", "--corpus", str(workdir / "dev.jsonl")]) == 2


def test_score_document_mismatch(workdir, tmp_path, small_corpus):
    save_corpus(small_corpus[50:52], tmp_path / "other.jsonl")
    preds = tmp_path / "p.jsonl"
    main(["apply", "--corpus", str(tmp_path / "other.jsonl"), "--model-dir", str(workdir / "model"), "--out", str(preds)])
    assert main(["score", "--predictions", str(preds), "--gold", str(workdir / "dev.jsonl")]) == 2


def test_rules_diff_self(tmp_path, capsys):
    f = tmp_path / "pair.txt"
    f.write_text(PAIR)
    assert main(["rules", "diff", str(f), str(f)]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "0 added, 0 removed, 0 changed"


def test_rules_merge_pair(tmp_path, capsys):
    f, out = tmp_path / "pair.txt", tmp_path / "merged.txt"
    f.write_text(PAIR)
    assert main(["rules", "merge", str(f), "--out", str(out)]) == 0
    before, after = parse_rules(PAIR), parse_rules(out.read_text())
    assert len(after.rules) == len(before.rules) - 1
    assert main(["rules", "validate", str(out)]) == 0
    capsys.readouterr()
    assert main(["rules", "diff", str(f), str(out)]) == 0
    assert "1 removed" in capsys.readouterr().out


def test_rules_validate_reports_problems(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text(PAIR.replace("on Phosphorylation path >prep_of arg", "on Protein path >prep_of arg", 1))
    assert main(["rules", "validate", str(f)]) == 2
    f.write_text("version 1 labels [Nil]\nrule nonsense\n")
    assert main(["rules", "validate", str(f)]) == 2


def test_synth_writes_corpus(tmp_path):
    assert main(["synth", "--train", "5", "--dev", "2", "--out", str(tmp_path)]) == 0
    assert len(load_corpus(tmp_path / "train.jsonl")) == 5
    assert len(load_corpus(tmp_path / "dev.jsonl")) == 2


def test_config_round_trip(tmp_path, workdir):
    cfg = PipelineConfig(corpus="a.jsonl", dev="b.jsonl", reg="l2", lam=0.5, seed=7, threshold=1.0, out="o")
    assert PipelineConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
    assert cfg.to_json()["lambda"] == 0.5
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"corpus": str(workdir / "train.jsonl"), "max_epochs": 2, "typo": 1}))
    assert main(["train", "--config", str(path), "--out", str(tmp_path / "m")]) == 2
    path.write_text(json.dumps({"corpus": str(workdir / "train.jsonl"), "max_epochs": 2}))
    assert main(["train", "--config", str(path), "--out", str(tmp_path / "m")]) == 0
