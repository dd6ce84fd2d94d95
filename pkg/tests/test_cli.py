import json
import os
import pathlib

from wikicausal.cli import main

DATA = pathlib.Path(__file__).parent / "data"
SMOKE = DATA / "smoke"

from conftest import make_doc_dict


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


class TestCorpusCommands:
    def test_validate_ok(self, tmp_path, capsys):
        corpus = write_jsonl(tmp_path / "c.jsonl", [make_doc_dict()])
        code = main(["corpus-validate", "--in", str(corpus), "--out", str(tmp_path / "o")])
        assert code == 0
        assert "status=ok" in capsys.readouterr().out

    def test_validate_bad_line_exits_1_and_lists_violation(self, tmp_path, capsys):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(
            json.dumps(make_doc_dict()) + "\n"
            + json.dumps(make_doc_dict(event_concepts=["X1"])) + "\n",
            encoding="utf-8",
        )
        code = main(["corpus-validate", "--in", str(corpus), "--out", str(tmp_path / "o")])
        out = capsys.readouterr().out
        assert code == 1
        assert "line 2" in out and "Q[0-9]+" in out

    def test_stats_summary(self, tmp_path, capsys):
        corpus = write_jsonl(
            tmp_path / "c.jsonl",
            [make_doc_dict(id="1", text="x" * 100, first_section="x" * 10),
             make_doc_dict(id="2", text="y" * 300, first_section="y" * 30)],
        )
        code = main(["corpus-stats", "--in", str(corpus), "--out", str(tmp_path / "o")])
        out = capsys.readouterr().out
        assert code == 0
        assert "article_count=2" in out and "avg_text_len=200.0" in out
        stats = json.loads((tmp_path / "o" / "corpus-stats.json").read_text())
        assert stats["avg_text_len"] == 200.0

    def test_missing_input_exits_2(self, tmp_path, capsys):
        code = main(["corpus-stats", "--in", str(tmp_path / "nope.jsonl")])
        assert code == 2
        assert "nope.jsonl" in capsys.readouterr().err


class TestBuildCorpus:
    def test_build_from_pages(self, tmp_path, capsys):
        pages = write_jsonl(
            tmp_path / "pages.jsonl",
            [
                {"page_id": "1", "title": "COVID-19 pandemic",
                 "wikitext": "The pandemic led to lockdowns."},
                {"page_id": "2", "title": "Unknown page", "wikitext": "x"},
            ],
        )
        code = main([
            "build-corpus", "--in", str(pages),
            "--inventory", str(SMOKE / "inventory.jsonl"),
            "--out", str(tmp_path / "o"),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "built=1" in out and "dropped=1" in out
        line = (tmp_path / "o" / "corpus.jsonl").read_text(encoding="utf-8").strip()
        doc = json.loads(line)
        assert doc["document_concept"]["qid"] == "Q81068910"
        assert doc["event_concepts"] == ["Q12184"]


class TestExtractAndLink:
    def test_pattern_extract_golden_pair_count(self, tmp_path, capsys):
        code = main([
            "extract", "--in", str(SMOKE / "corpus10.jsonl"),
            "--method", "pattern", "--out", str(tmp_path),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "pairs=8" in out
        assert (tmp_path / "pattern-kg-raw.kg.json").exists()
        pairs = (tmp_path / "pattern-kg.pairs.jsonl").read_text().strip().splitlines()
        assert len(pairs) == 8

    def test_qal_extract_with_mock(self, tmp_path, capsys):
        corpus = write_jsonl(
            tmp_path / "c.jsonl",
            [make_doc_dict(
                id="d1",
                document_concept={"qid": "Q12184", "labels": ["pandemic"]},
                text="Trade fell. The pandemic brought economic recession to most regions.",
                first_section="Trade fell. The pandemic brought economic recession to most regions.",
            )],
        )
        code = main([
            "extract", "--in", str(corpus), "--method", "qal",
            "--mock", "--fixture", str(SMOKE / "mock_fixture.jsonl"),
            "--out", str(tmp_path / "o"),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "pairs=1" in out
        pair = json.loads((tmp_path / "o" / "qal-kg.pairs.jsonl").read_text())
        assert pair["cause_phrase"] == "pandemic"
        assert pair["effect_phrase"] == "economic recession"
        assert pair["method"] == "qal-effect"

    def test_qal_pipeline_seed_side_stays_linked(self, tmp_path, capsys):
        corpus = write_jsonl(
            tmp_path / "c.jsonl",
            [make_doc_dict(
                id="d1",
                document_concept={"qid": "Q12184", "labels": ["pandemic"]},
                text="The pandemic brought economic recession to most regions.",
                first_section="The pandemic brought economic recession to most regions.",
            )],
        )
        out = str(tmp_path / "o")
        main(["extract", "--in", str(corpus), "--method", "qal",
              "--mock", "--fixture", str(SMOKE / "mock_fixture.jsonl"), "--out", out])
        code = main(["link", "--in", f"{out}/qal-kg.pairs.jsonl",
                     "--inventory", str(SMOKE / "inventory.jsonl"),
                     "--method", "qal", "--out", out])
        capsys.readouterr()
        assert code == 0
        kg = json.loads(pathlib.Path(out, "qal-kg.kg.json").read_text())
        edge = kg["edges"][0]
        assert edge["cause"] == {"qid": "Q12184"}  # seed passes through
        assert edge["effect"] == {"qid": "Q176494"}  # linked via alias
        assert edge["provenance"][0]["extractor_name"] == "qal-effect"

    def test_link_writes_kg_and_unlinked_report(self, tmp_path, capsys):
        main(["extract", "--in", str(SMOKE / "corpus10.jsonl"),
              "--method", "pattern", "--out", str(tmp_path)])
        capsys.readouterr()
        code = main([
            "link", "--in", str(tmp_path / "pattern-kg.pairs.jsonl"),
            "--inventory", str(SMOKE / "inventory.jsonl"),
            "--out", str(tmp_path),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "fully_linked=5" in out and "unlinked_phrases=4" in out
        report = (tmp_path / "pattern-kg.unlinked.tsv").read_text()
        assert "heavy rainfall\tp002\tpattern" in report


class TestEval:
    def test_eval_recall_identical_kgs_prints_one(self, tmp_path, capsys):
        main(["build-basekg", "--in", str(SMOKE / "relations.tsv"),
              "--inventory", str(SMOKE / "inventory.jsonl"), "--out", str(tmp_path)])
        capsys.readouterr()
        code = main([
            "eval-recall", "--in", str(tmp_path / "base-kg.json"),
            "--base", str(tmp_path / "base-kg.json"),
            "--inventory", str(SMOKE / "inventory.jsonl"),
            "--out", str(tmp_path),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "recall=1.0000" in out

    def test_eval_precision_requires_endpoint_or_mock(self, tmp_path, capsys):
        main(["build-basekg", "--in", str(SMOKE / "relations.tsv"),
              "--inventory", str(SMOKE / "inventory.jsonl"), "--out", str(tmp_path)])
        capsys.readouterr()
        env_backup = os.environ.pop("WIKICAUSAL_ENDPOINT", None)
        try:
            code = main([
                "eval-precision", "--in", str(tmp_path / "base-kg.json"),
                "--inventory", str(SMOKE / "inventory.jsonl"),
                "--out", str(tmp_path),
            ])
        finally:
            if env_backup is not None:
                os.environ["WIKICAUSAL_ENDPOINT"] = env_backup
        assert code == 1
        assert "endpoint" in capsys.readouterr().err

    def test_invalid_votes_exits_1_naming_field(self, tmp_path, capsys):
        code = main([
            "eval-precision", "--in", "x.json",
            "--votes", "4", "--mock", "--out", str(tmp_path),
        ])
        assert code == 1
        assert "votes" in capsys.readouterr().err


class TestConfigFile:
    def test_config_file_drives_commands(self, tmp_path, capsys):
        corpus = write_jsonl(tmp_path / "c.jsonl", [make_doc_dict()])
        config = tmp_path / "run.yaml"
        config.write_text(
            f"corpus_path: {corpus}\nout_dir: {tmp_path / 'o'}\n", encoding="utf-8"
        )
        code = main(["corpus-stats", "--config", str(config)])
        assert code == 0
        assert "article_count=1" in capsys.readouterr().out

    def test_unknown_config_field_exits_1(self, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("corpus_pth: x\n", encoding="utf-8")
        code = main(["corpus-stats", "--config", str(config)])
        assert code == 1
        assert "corpus_pth" in capsys.readouterr().err

    def test_flags_override_config(self, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text("votes: 4\n", encoding="utf-8")
        # flag turns the invalid config value back into a valid one
        corpus = write_jsonl(tmp_path / "c.jsonl", [make_doc_dict()])
        code = main([
            "corpus-stats", "--config", str(config), "--votes", "5",
            "--in", str(corpus), "--out", str(tmp_path / "o"),
        ])
        assert code == 0


class TestRerunnable:
    def test_rerun_produces_byte_identical_artifacts(self, tmp_path, capsys):
        def run_all(out):
            main(["build-basekg", "--in", str(SMOKE / "relations.tsv"),
                  "--inventory", str(SMOKE / "inventory.jsonl"), "--out", out])
            main(["extract", "--in", str(SMOKE / "corpus10.jsonl"),
                  "--method", "pattern", "--out", out])
            main(["link", "--in", f"{out}/pattern-kg.pairs.jsonl",
                  "--inventory", str(SMOKE / "inventory.jsonl"), "--out", out])
            main(["eval-recall", "--in", f"{out}/pattern-kg.kg.json",
                  "--base", f"{out}/base-kg.json",
                  "--inventory", str(SMOKE / "inventory.jsonl"), "--out", out])
            main(["eval-precision", "--in", f"{out}/pattern-kg.kg.json",
                  "--inventory", str(SMOKE / "inventory.jsonl"),
                  "--mock", "--fixture", str(SMOKE / "mock_fixture.jsonl"),
                  "--out", out])
            main(["report", "--in", out, "--out", out,
                  "--timestamp", "2024-05-01T00:00:00Z"])

        out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
        run_all(out_a)
        run_all(out_b)
        capsys.readouterr()
        names = sorted(os.listdir(out_a))
        assert names == sorted(os.listdir(out_b))
        for name in names:
            a = pathlib.Path(out_a, name).read_bytes()
            b = pathlib.Path(out_b, name).read_bytes()
            assert a == b, name

    def test_report_builds_leaderboard(self, tmp_path, capsys):
        out = str(tmp_path)
        main(["build-basekg", "--in", str(SMOKE / "relations.tsv"),
              "--inventory", str(SMOKE / "inventory.jsonl"), "--out", out])
        main(["eval-recall", "--in", f"{out}/base-kg.json",
              "--base", f"{out}/base-kg.json",
              "--inventory", str(SMOKE / "inventory.jsonl"), "--out", out])
        capsys.readouterr()
        code = main(["report", "--in", out, "--out", out,
                     "--timestamp", "2024-05-01T00:00:00Z"])
        out_text = capsys.readouterr().out
        assert code == 0
        assert "kgs=1" in out_text
        lines = (tmp_path / "leaderboard.csv").read_text().splitlines()
        assert lines[0].startswith("kg_name,")
        assert lines[1].startswith("base-kg,") and "1.0000" in lines[1]
