import json

import pytest
from click.testing import CliRunner

from wordgrid.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus(tmp_path, runner):
    out = tmp_path / "corpus"
    result = runner.invoke(main, ["synth", "--count", "4", "--seed", "9", "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def flat_corpus(tmp_path, runner):
    out = tmp_path / "flat"
    result = runner.invoke(
        main, ["synth", "--count", "3", "--seed", "11", "--no-spans", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    return out


class TestSynthCommand:
    def test_writes_corpus_files(self, corpus):
        assert (corpus / "truth.jsonl").exists()
        detections = list((corpus / "detections").glob("*.jsonl"))
        images = list((corpus / "images").glob("*.png"))
        assert len(detections) == 4 and len(images) == 4


class TestReconstructEvaluate:
    def test_oracle_end_to_end(self, corpus, tmp_path, runner):
        pred = tmp_path / "pred"
        result = runner.invoke(
            main,
            ["reconstruct", "--detections", str(corpus / "detections"),
             "--truth", str(corpus / "truth.jsonl"), "--classifier", "oracle",
             "--out", str(pred)],
        )
        assert result.exit_code == 0, result.output
        assert len(list(pred.glob("*.html"))) == 4
        assert len(list(pred.glob("*.structure.json"))) == 4

        report_path = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["evaluate", "--pred", str(pred), "--truth", str(corpus / "truth.jsonl"),
             "--out", str(report_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(report_path.read_text())
        assert report["f1"] == 1.0
        assert report["n_gt"] == report["n_correct"] == report["n_pred"]

    def test_heuristic_flag(self, corpus, tmp_path, runner):
        pred = tmp_path / "pred-h"
        result = runner.invoke(
            main,
            ["reconstruct", "--detections", str(corpus / "detections"),
             "--classifier", "heuristic", "--out", str(pred)],
        )
        assert result.exit_code == 0, result.output

    def test_missing_prediction_flagged(self, corpus, tmp_path, runner):
        pred = tmp_path / "pred-partial"
        pred.mkdir()
        result = runner.invoke(
            main, ["evaluate", "--pred", str(pred), "--truth", str(corpus / "truth.jsonl")]
        )
        assert result.exit_code == 0
        assert "missing_prediction" in result.output or "0.0000" in result.output

    def test_corrupt_prediction_scored_empty(self, corpus, tmp_path, runner):
        pred = tmp_path / "pred-bad"
        pred.mkdir()
        first = sorted((corpus / "detections").glob("*.jsonl"))[0].stem
        (pred / f"{first}.html").write_text("<div>not a table")
        result = runner.invoke(
            main, ["evaluate", "--pred", str(pred), "--truth", str(corpus / "truth.jsonl")]
        )
        assert result.exit_code == 0
        assert "unreadable prediction" in result.output

    def test_remote_unreachable_fail_nonzero_exit(self, corpus, tmp_path, runner):
        result = runner.invoke(
            main,
            ["reconstruct", "--detections", str(corpus / "detections"),
             "--images", str(corpus / "images"),
             "--classifier", "remote", "--endpoint", "http://127.0.0.1:9",
             "--fallback", "fail", "--out", str(tmp_path / "pred-r")],
        )
        assert result.exit_code == 1
        assert "error" in result.output or result.exception


class TestStageWise:
    def test_byte_identical_html(self, corpus, tmp_path, runner):
        det = sorted((corpus / "detections").glob("*.jsonl"))[0]
        table_id = det.stem
        pairs_path = tmp_path / "pairs.jsonl"
        labels_path = tmp_path / "labels.jsonl"

        result = runner.invoke(main, ["pairgen", "--detections", str(det), "--out", str(pairs_path)])
        assert result.exit_code == 0, result.output

        result = runner.invoke(
            main,
            ["classify", "--detections", str(det), "--pairs", str(pairs_path),
             "--classifier", "oracle", "--truth", str(corpus / "truth.jsonl"),
             "--out", str(labels_path)],
        )
        assert result.exit_code == 0, result.output

        staged = tmp_path / "staged"
        result = runner.invoke(
            main,
            ["reconstruct", "--detections", str(det), "--labels", str(labels_path),
             "--out", str(staged)],
        )
        assert result.exit_code == 0, result.output

        single = tmp_path / "single"
        result = runner.invoke(
            main,
            ["reconstruct", "--detections", str(det), "--truth", str(corpus / "truth.jsonl"),
             "--classifier", "oracle", "--out", str(single)],
        )
        assert result.exit_code == 0, result.output
        assert (staged / f"{table_id}.html").read_bytes() == (single / f"{table_id}.html").read_bytes()

    def test_pairgen_empty_detections(self, tmp_path, runner):
        det = tmp_path / "empty.jsonl"
        det.write_text("")
        out = tmp_path / "pairs.jsonl"
        result = runner.invoke(main, ["pairgen", "--detections", str(det), "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text() == ""

    def test_classify_heuristic_matches_oracle_on_fixture(self, flat_corpus, tmp_path, runner):
        corpus = flat_corpus  # heuristic exactness holds on span-free tables
        det = sorted((corpus / "detections").glob("*.jsonl"))[0]
        pairs_path = tmp_path / "p.jsonl"
        runner.invoke(main, ["pairgen", "--detections", str(det), "--out", str(pairs_path)])
        heur = runner.invoke(
            main, ["classify", "--detections", str(det), "--pairs", str(pairs_path),
                   "--classifier", "heuristic", "--out", str(tmp_path / "h.jsonl")]
        )
        orac = runner.invoke(
            main, ["classify", "--detections", str(det), "--pairs", str(pairs_path),
                   "--classifier", "oracle", "--truth", str(corpus / "truth.jsonl"),
                   "--out", str(tmp_path / "o.jsonl")]
        )
        assert heur.exit_code == 0 and orac.exit_code == 0
        h_labels = [json.loads(l)["label"] for l in (tmp_path / "h.jsonl").read_text().splitlines()]
        o_labels = [json.loads(l)["label"] for l in (tmp_path / "o.jsonl").read_text().splitlines()]
        assert h_labels == o_labels


class TestXmlTruth:
    def test_evaluate_against_region_xml(self, tmp_path, runner):
        from pathlib import Path
        from wordgrid.cli import _load_truth
        from wordgrid.structure import emit_html

        xml = Path(__file__).parent / "data" / "icdar_sample.xml"
        tables = _load_truth(xml)
        pred = tmp_path / "pred"
        pred.mkdir()
        for tid, table in tables.items():
            (pred / f"{tid}.html").write_text(emit_html(table.grid, table.cell_texts))
        result = runner.invoke(main, ["evaluate", "--pred", str(pred), "--truth", str(xml)])
        assert result.exit_code == 0, result.output
        assert "1.0000" in result.output


class TestExportPairs:
    def test_synthetic_export_balanced(self, tmp_path, runner):
        out = tmp_path / "exp"
        result = runner.invoke(
            main, ["export-pairs", "--synthetic", "6", "--seed", "3", "--balance", "0.5",
                   "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        records = [json.loads(l) for l in (out / "manifest.jsonl").read_text().splitlines()]
        hard = sum(1 for r in records if r["hard"])
        simple = len(records) - hard
        assert abs(hard - simple) <= 1
        assert all((out / r["image"]).exists() for r in records)

    def test_file_corpus_export(self, corpus, tmp_path, runner):
        out = tmp_path / "exp2"
        result = runner.invoke(
            main, ["export-pairs", "--truth", str(corpus / "truth.jsonl"),
                   "--images", str(corpus / "images"),
                   "--detections", str(corpus / "detections"),
                   "--balance", "1.0", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        records = [json.loads(l) for l in (out / "manifest.jsonl").read_text().splitlines()]
        assert records and all(r["hard"] for r in records)

    def test_requires_inputs(self, tmp_path, runner):
        result = runner.invoke(main, ["export-pairs", "--out", str(tmp_path / "x")])
        assert result.exit_code != 0


class TestConfigPrecedence:
    def test_flags_override_config_file(self, corpus, tmp_path, runner):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"classifier": "oracle", "pair_m": 2}))
        det = sorted((corpus / "detections").glob("*.jsonl"))[0]
        # flag overrides classifier; config supplies pair_m
        result = runner.invoke(
            main,
            ["reconstruct", "--detections", str(det), "--config", str(config_path),
             "--classifier", "heuristic", "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 0, result.output
