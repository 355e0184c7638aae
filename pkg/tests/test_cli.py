"""Command-line behavior: flags, config precedence, exit codes, stream purity."""

from __future__ import annotations

import json
import random

import pytest

from pyramid_masker import ClusterScorer, segment_cluster
from pyramid_masker.cli import main

from synth import WILDFIRE_CLUSTER, synthetic_cluster


def cluster_line(cluster) -> str:
    return json.dumps({"cluster_id": cluster.cluster_id, "documents": list(cluster.documents)})


@pytest.fixture
def corpus_path(tmp_path):
    rng = random.Random(0)
    lines = [cluster_line(WILDFIRE_CLUSTER)]
    for i in range(4):
        lines.append(cluster_line(synthetic_cluster(rng, f"c{i}")))
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(lines) + "\n")
    return path


def events_of(stderr: str) -> list[dict]:
    out = []
    for line in stderr.splitlines():
        if line.startswith("{"):
            out.append(json.loads(line))
    return out


# ---------------------------------------------------------------------------
# mask


def test_mask_to_file(corpus_path, tmp_path, capsys):
    out_path = tmp_path / "out.jsonl"
    code = main(["mask", "--input", str(corpus_path), "--output", str(out_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out == ""  # data went to the file, not stdout
    records = [json.loads(l) for l in out_path.read_text().splitlines()]
    assert [r["cluster_id"] for r in records] == ["wildfire", "c0", "c1", "c2", "c3"]
    summary = events_of(captured.err)[-1]
    assert summary["event"] == "summary" and summary["processed"] == 5


def test_mask_stdout_holds_only_records(corpus_path, capsys):
    code = main(["mask", "--input", str(corpus_path)])
    captured = capsys.readouterr()
    assert code == 0
    for line in captured.out.splitlines():
        record = json.loads(line)
        assert {"cluster_id", "input", "global_attention", "target", "meta"} <= set(record)
    for event in events_of(captured.err):
        assert "event" in event


def test_mask_empty_corpus_exits_2(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["mask", "--input", str(empty)]) == 2


def test_mask_missing_input_is_fatal(tmp_path, capsys):
    code = main(["mask", "--input", str(tmp_path / "nope.jsonl")])
    captured = capsys.readouterr()
    assert code == 1
    assert events_of(captured.err)[-1]["event"] == "fatal"


def test_mask_strategy_flag(corpus_path, capsys):
    code = main(["mask", "--input", str(corpus_path), "--strategy", "lead"])
    captured = capsys.readouterr()
    assert code == 0
    for line in captured.out.splitlines():
        assert json.loads(line)["meta"]["strategy"] == "lead"


def test_mask_emit_text(corpus_path, capsys):
    main(["mask", "--input", str(corpus_path), "--emit-text"])
    record = json.loads(capsys.readouterr().out.splitlines()[0])
    assert record["input_text"] == " ".join(record["input"])


def test_mask_no_lead_sep(corpus_path, capsys):
    main(["mask", "--input", str(corpus_path), "--no-lead-sep"])
    record = json.loads(capsys.readouterr().out.splitlines()[0])
    assert record["input"][0] != "<doc-sep>"
    assert len(record["global_attention"]) == 2  # three documents, two separators


def test_mask_custom_tokens(corpus_path, capsys):
    main(
        [
            "mask",
            "--input",
            str(corpus_path),
            "--doc-sep-token",
            "<D>",
            "--sent-mask-token",
            "<G>",
        ]
    )
    record = json.loads(capsys.readouterr().out.splitlines()[0])
    assert record["input"][0] == "<D>"
    assert "<G>" in record["input"]


def test_mask_seed_changes_random_strategy(corpus_path, capsys):
    main(["mask", "--input", str(corpus_path), "--strategy", "random", "--seed", "1"])
    first = capsys.readouterr().out
    main(["mask", "--input", str(corpus_path), "--strategy", "random", "--seed", "2"])
    second = capsys.readouterr().out
    assert first != second


# ---------------------------------------------------------------------------
# config file and environment


def test_config_file_supplies_defaults(corpus_path, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"strategy": "lead", "emit-text": True}))
    code = main(["mask", "--input", str(corpus_path), "--config", str(cfg)])
    captured = capsys.readouterr()
    assert code == 0
    record = json.loads(captured.out.splitlines()[0])
    assert record["meta"]["strategy"] == "lead"
    assert "input_text" in record


def test_flags_beat_config_file(corpus_path, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"strategy": "lead"}))
    main(["mask", "--input", str(corpus_path), "--config", str(cfg), "--strategy", "principle"])
    record = json.loads(capsys.readouterr().out.splitlines()[0])
    assert record["meta"]["strategy"] == "principle"


def test_unknown_config_key_is_fatal(corpus_path, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"strateggy": "lead"}))
    code = main(["mask", "--input", str(corpus_path), "--config", str(cfg)])
    captured = capsys.readouterr()
    assert code == 1
    assert "strateggy" in events_of(captured.err)[-1]["reason"]


def test_bad_strategy_value_is_fatal(corpus_path, capsys):
    cfg_error = main(["mask", "--input", str(corpus_path), "--mask-ratio", "0"])
    assert cfg_error == 1


def test_env_var_overrides_workers_flag(corpus_path, capsys, monkeypatch):
    # an invalid env value must win over a valid flag to prove precedence
    monkeypatch.setenv("PYRAMID_MASKER_WORKERS", "0")
    code = main(["mask", "--input", str(corpus_path), "--workers", "4"])
    captured = capsys.readouterr()
    assert code == 1
    assert "workers" in events_of(captured.err)[-1]["reason"]


def test_env_var_must_be_integer(corpus_path, capsys, monkeypatch):
    monkeypatch.setenv("PYRAMID_MASKER_WORKERS", "lots")
    code = main(["mask", "--input", str(corpus_path)])
    captured = capsys.readouterr()
    assert code == 1
    assert "PYRAMID_MASKER_WORKERS" in events_of(captured.err)[-1]["reason"]


# ---------------------------------------------------------------------------
# stats


def test_stats_output(tmp_path, capsys):
    path = tmp_path / "c.jsonl"
    path.write_text(
        json.dumps({"cluster_id": "a", "documents": ["a b c"], "summary": "s"})
        + "\n"
        + json.dumps({"cluster_id": "b", "documents": ["d e", "f"]})
        + "\n"
    )
    code = main(["stats", "--input", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    assert json.loads(captured.out) == {
        "example_count": 2,
        "mean_docs_per_cluster": 1.5,
        "mean_source_length": 3.0,
        "mean_summary_length": 1.0,
        "length_unit": "whitespace_tokens",
    }


def test_stats_reports_bad_lines(tmp_path, capsys):
    path = tmp_path / "c.jsonl"
    path.write_text('{broken\n' + json.dumps({"cluster_id": "a", "documents": ["x"]}) + "\n")
    code = main(["stats", "--input", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    assert json.loads(captured.out)["example_count"] == 1
    assert events_of(captured.err)[0]["event"] == "record_error"


def test_stats_strict_is_fatal(tmp_path, capsys):
    path = tmp_path / "c.jsonl"
    path.write_text("{broken\n")
    assert main(["stats", "--input", str(path), "--strict"]) == 1


# ---------------------------------------------------------------------------
# score-sentence


def test_score_sentence_first_cluster(corpus_path, capsys):
    code = main(["score-sentence", "--input", str(corpus_path)])
    captured = capsys.readouterr()
    assert code == 0
    payload = json.loads(captured.out)
    assert payload["cluster_id"] == "wildfire"
    assert payload["salience_variant"] == "mean_r1_r2_f1"
    sentences = segment_cluster(WILDFIRE_CLUSTER)
    scorer = ClusterScorer(sentences)
    by_key = {(row["doc"], row["sent"]): row for row in payload["sentences"]}
    for s in sentences:
        row = by_key[s.key]
        assert row["principle"] == scorer.principle(s)
        assert row["cluster_rouge"] == scorer.cluster(s)


def test_score_sentence_selects_cluster(corpus_path, capsys):
    code = main(["score-sentence", "--input", str(corpus_path), "--cluster-id", "c2"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["cluster_id"] == "c2"


def test_score_sentence_missing_cluster(corpus_path, capsys):
    code = main(["score-sentence", "--input", str(corpus_path), "--cluster-id", "zzz"])
    captured = capsys.readouterr()
    assert code == 1
    assert events_of(captured.err)[-1]["event"] == "fatal"


# ---------------------------------------------------------------------------
# eval-pyramid


def eval_record(summary_id="s1", **overrides):
    record = {
        "summary_id": summary_id,
        "gold_len": 100,
        "sys_len": 80,
        "scus": [
            {"id": "u1", "weight": 3, "covered": True},
            {"id": "u2", "weight": 2, "covered": False},
            {"id": "u3", "weight": 1, "covered": True},
        ],
    }
    record.update(overrides)
    return record


def test_eval_pyramid_worked_example(tmp_path, capsys):
    path = tmp_path / "ann.jsonl"
    path.write_text(json.dumps(eval_record()) + "\n")
    code = main(["eval-pyramid", "--input", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    payload = json.loads(captured.out)
    (row,) = payload["summaries"]
    assert row["summary_id"] == "s1"
    assert row["raw"] == 4.0
    assert row["recall"] == pytest.approx(0.04)
    assert row["precision"] == pytest.approx(0.05)
    assert row["f1"] == pytest.approx(0.0444444444, abs=1e-9)
    assert payload["mean"]["f1"] == row["f1"]


def test_eval_pyramid_majority_flag(tmp_path, capsys):
    record = eval_record(scus=[{"id": "u", "weight": 2, "covered": [True, False]}])
    path = tmp_path / "ann.jsonl"
    path.write_text(json.dumps(record) + "\n")
    main(["eval-pyramid", "--input", str(path), "--aggregation", "majority"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["summaries"][0]["raw"] == 0.0


def test_eval_pyramid_len_unit_chars(tmp_path, capsys):
    record = eval_record()
    del record["gold_len"], record["sys_len"]
    record["gold_text"] = "ab cd"
    record["sys_text"] = "efgh"
    path = tmp_path / "ann.jsonl"
    path.write_text(json.dumps(record) + "\n")
    main(["eval-pyramid", "--input", str(path), "--len-unit", "chars"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["summaries"][0]["recall"] == pytest.approx(4 / 5)
    assert payload["summaries"][0]["precision"] == pytest.approx(4 / 4)


def test_eval_pyramid_skips_bad_lines(tmp_path, capsys):
    path = tmp_path / "ann.jsonl"
    path.write_text("{broken\n" + json.dumps(eval_record()) + "\n")
    code = main(["eval-pyramid", "--input", str(path)])
    captured = capsys.readouterr()
    assert code == 0
    assert len(json.loads(captured.out)["summaries"]) == 1
    assert events_of(captured.err)[0]["event"] == "record_error"


def test_eval_pyramid_nothing_scored_exits_2(tmp_path, capsys):
    path = tmp_path / "ann.jsonl"
    path.write_text("{broken\n")
    code = main(["eval-pyramid", "--input", str(path)])
    captured = capsys.readouterr()
    assert code == 2
    assert json.loads(captured.out) == {"summaries": [], "mean": None}


def test_eval_pyramid_strict(tmp_path, capsys):
    path = tmp_path / "ann.jsonl"
    path.write_text("{broken\n")
    assert main(["eval-pyramid", "--input", str(path), "--strict"]) == 1


# ---------------------------------------------------------------------------
# inspect


def test_inspect_renders_record(corpus_path, tmp_path, capsys):
    out_path = tmp_path / "out.jsonl"
    main(["mask", "--input", str(corpus_path), "--output", str(out_path)])
    capsys.readouterr()
    code = main(["inspect", "--input", str(out_path), "--cluster-id", "wildfire"])
    captured = capsys.readouterr()
    assert code == 0
    assert "cluster_id        wildfire" in captured.out
    assert "[sent-mask]" in captured.out
    assert "scores:" in captured.out


def test_inspect_missing_record(tmp_path, capsys):
    path = tmp_path / "out.jsonl"
    path.write_text("")
    assert main(["inspect", "--input", str(path)]) == 1
