"""
Test the qforge command line.
"""

import json

import pytest

from qforge.cli import build_parser, main


@pytest.fixture
def no_config(tmp_path):
    return str(tmp_path / "absent.yaml")


class TestParser:
    def test_stage_commands(self):
        args = build_parser().parse_args(["serre", "--case", "d5-to-e6", "--serre-sides", "E,F"])
        assert args.command == "serre"
        assert args.serre_sides == "E,F"

    def test_case_and_rep_are_exclusive(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["validate", "--case", "d5-to-e6", "--rep", "an_vector"])


class TestMain:
    def test_extend_prints_json(self, capsys, no_config):
        assert main(["extend", "--case", "d5-to-e6", "--config", no_config]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["schema"] == "qforge/1"
        assert "timings" not in report
        assert report["results"]["d5-to-e6"]["extend"]["checks"]["matches_target"] is True

    def test_validate_small_module(self, capsys, no_config):
        assert main(["validate", "--rep", "an_vector", "--config", no_config]) == 0

    def test_text_format(self, capsys, no_config):
        assert main(["extend", "--case", "a1-to-g2", "--format", "text", "--config", no_config]) == 0
        assert "a1-to-g2" in capsys.readouterr().out

    def test_missing_rep(self, tmp_path, no_config):
        assert main(["validate", "--rep", str(tmp_path / "missing.json"), "--config", no_config]) == 2

    def test_bad_eigen_option(self, no_config):
        assert main(["normalize", "--rep", "an_vector", "--eigen", "largest", "--config", no_config]) == 2

    def test_bad_serre_side(self, no_config):
        assert main(["serre", "--case", "d5-to-e6", "--serre-sides", "G", "--config", no_config]) == 2

    def test_bad_settings_file(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("qforge:\n  rprime_form: tabulated\n")
        assert main(["extend", "--case", "d5-to-e6", "--config", str(path)]) == 2

    def test_no_target(self, no_config):
        assert main(["extend", "--config", no_config]) == 2

    def test_writes_report(self, tmp_path, no_config):
        out = tmp_path / "report.json"
        assert main(["extend", "--case", "d5-to-e6", "--out", str(out), "--config", no_config]) == 0
        assert json.loads(out.read_text())["exit_code"] == 0


class TestDiff:
    def test_identical_reports(self, tmp_path, capsys, no_config):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["extend", "--case", "d5-to-e6", "--out", str(a), "--config", no_config])
        main(["extend", "--case", "d5-to-e6", "--out", str(b), "--config", no_config])
        capsys.readouterr()
        assert main(["diff", str(a), str(b)]) == 0
        assert capsys.readouterr().out == ""

    def test_changed_field(self, tmp_path, capsys, no_config):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["extend", "--case", "d5-to-e6", "--out", str(a), "--config", no_config])
        data = json.loads(a.read_text())
        data["conventions"]["rvv"] = "other"
        b.write_text(json.dumps(data))
        capsys.readouterr()
        assert main(["diff", str(a), str(b)]) == 1
        assert capsys.readouterr().out.strip() == "conventions.rvv"

    def test_unreadable_report(self, tmp_path):
        assert main(["diff", str(tmp_path / "a.json"), str(tmp_path / "b.json")]) == 2
