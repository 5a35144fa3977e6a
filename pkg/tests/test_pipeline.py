"""
Test stage planning, the pipeline runner and the report it produces.
"""

import json

import pytest

from qforge.config import QForgeSettings, bundled_default
from qforge.errors import ConventionError, InputError, SpectralError
from qforge.pipeline import (
    EXIT_CHECK_FAILED,
    EXIT_INPUT,
    EXIT_INTERNAL,
    EXIT_PASS,
    PipelineConfig,
    check_mode_for,
    exit_code_for,
    expand_stages,
    resolve_targets,
    run,
)
from qforge.repmod import bundled_rep_path
from qforge.report import diff_reports, load_report, render_text

TEMPLATE = bundled_default("report_template.md")


@pytest.fixture(scope="module")
def d5_full_run():
    return run(PipelineConfig(stages=["all"], case="d5-to-e6"))


class TestPlanning:
    """Stage closure and targets"""

    def test_prerequisites_are_added(self):
        assert expand_stages(["serre"]) == ["rmatrix", "minpoly", "normalize", "rprime", "serre"]

    def test_all(self):
        assert expand_stages(["all"])[0] == "validate"
        assert expand_stages(["all"])[-1] == "extend"

    def test_unknown_stage(self):
        with pytest.raises(ValueError):
            PipelineConfig(stages=["lift"], case="d5-to-e6")

    def test_bad_check_mode(self):
        with pytest.raises(ValueError):
            PipelineConfig(case="d5-to-e6", check="sampled:x")

    def test_no_target(self):
        with pytest.raises(InputError):
            resolve_targets(PipelineConfig())

    def test_all_nine_targets(self):
        targets = resolve_targets(PipelineConfig(case="all-nine"))
        assert len(targets) == 9
        assert targets[4].rep_source == "d5_halfspin16"

    def test_check_mode_by_dimension(self):
        settings = QForgeSettings()
        assert check_mode_for(16, settings).label == "full"
        assert check_mode_for(56, settings).label == "sampled:200"
        assert check_mode_for(56, settings, "full").label == "full"

    def test_exit_codes(self):
        assert exit_code_for(InputError("x")) == EXIT_INPUT
        assert exit_code_for(ConventionError("x")) == EXIT_INTERNAL
        assert exit_code_for(SpectralError("x")) == EXIT_CHECK_FAILED
        assert exit_code_for(KeyError("x")) == EXIT_INTERNAL


class TestRun:
    """End-to-end runs"""

    def test_extend_all_nine(self):
        report, code = run(PipelineConfig(stages=["extend"], case="all-nine"))
        assert code == EXIT_PASS
        assert len(report.results) == 9
        assert all(report.stage(t, "extend").status == "passed" for t in report.results)

    def test_d5_everything_passes(self, d5_full_run):
        report, code = d5_full_run
        assert code == EXIT_PASS, {k: v.status for k, v in report.results["d5-to-e6"].items()}
        assert report.passed
        assert report.check_mode["d5-to-e6"] == "full"

    def test_d5_values(self, d5_full_run):
        report, _ = d5_full_run
        assert report.stage("d5-to-e6", "normalize").data["lambda"] == "q^(-3/4)"
        serre = report.stage("d5-to-e6", "serre").data
        assert serre["scalars"]["E"]["u"] == "-1"
        assert serre["reference"]["comparison"] == {"exact": False, "projective": True}
        assert report.stage("d5-to-e6", "extend").checks["readback_agrees"]
        minpoly = report.stage("d5-to-e6", "minpoly")
        assert minpoly.checks["top_eigenvalue_is_weight_norm"]
        assert minpoly.data["highest_weight_norm"] == "5/4"
        assert minpoly.data["reference"]["exact"] is True
        assert report.stage("d5-to-e6", "normalize").data["lambda_is_weight_norm_minus_two"] is True

    def test_d5_serre_deviation_is_reported(self, d5_full_run):
        report, _ = d5_full_run
        assert report.stage("d5-to-e6", "serre").data["reference"]["scale"] == "-q^(-1)"
        assert any(w.startswith("d5-to-e6: extracted Serre scalars differ") for w in report.warnings)

    def test_e6_minpoly_differs_from_published_roots(self):
        report, code = run(PipelineConfig(stages=["minpoly"], case="e6-to-e7"))
        assert code == EXIT_PASS
        minpoly = report.stage("e6-to-e7", "minpoly")
        assert minpoly.checks["top_eigenvalue_is_weight_norm"]
        assert minpoly.data["reference"]["exact"] is False
        assert minpoly.data["reference"]["not_published"] == ["q^(-26/3)"]
        assert any("minimal polynomial roots differ" in w for w in report.warnings)

    def test_conventions_are_recorded(self, d5_full_run):
        report, _ = d5_full_run
        assert {"rvv", "coproduct", "m_minus", "eigen", "rprime_form"} <= set(report.conventions)

    def test_failed_stage_skips_dependents(self):
        settings = QForgeSettings(eigen="7")
        report, code = run(PipelineConfig(stages=["serre"], rep="an_vector", settings=settings))
        results = report.results["an_vector"]
        assert results["normalize"].status == "error"
        assert results["rprime"].status == "skipped"
        assert results["serre"].status == "skipped"
        assert code == EXIT_CHECK_FAILED

    def test_corrupted_rep_is_an_input_error(self, tmp_path):
        with open(bundled_rep_path("d5_halfspin16"), "r") as f:
            data = json.load(f)
        for edge in data["edges"]:
            if edge["from"] == 9 and edge["to"] == 12:
                edge["root"] = 3
        path = tmp_path / "corrupt.json"
        path.write_text(json.dumps(data))
        report, code = run(PipelineConfig(stages=["validate"], rep=str(path)))
        assert code == EXIT_INPUT
        assert report.results["corrupt"]["input"].status == "error"

    def test_missing_case_file(self, tmp_path):
        report, code = run(PipelineConfig(stages=["extend"], case="d5-to-e6", cases_file=str(tmp_path / "x.json")))
        assert code == EXIT_INPUT
        assert report.warnings


class TestReports:
    """Canonical form, persistence and diffs"""

    def test_runs_are_deterministic(self):
        config = PipelineConfig(stages=["extend"], case="d5-to-e6")
        first, _ = run(config)
        second, _ = run(config)
        assert diff_reports(first, second) == []

    def test_convention_change_is_reported(self):
        first, _ = run(PipelineConfig(stages=["extend"], case="d5-to-e6"))
        second = first.model_copy(deep=True)
        second.conventions["rvv"] = "other"
        assert diff_reports(first, second) == ["conventions.rvv"]

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "reports" / "d5.json"
        report, _ = run(PipelineConfig(stages=["extend"], case="d5-to-e6", out=str(path)))
        assert path.exists()
        loaded = load_report(path)
        assert diff_reports(report, loaded) == []
        assert "timings" in json.loads(path.read_text())

    def test_schema_mismatch(self, tmp_path):
        path = tmp_path / "old.json"
        path.write_text(json.dumps({"schema": "qforge/0", "version": "0"}))
        with pytest.raises(InputError):
            load_report(path)

    def test_render_text(self, d5_full_run):
        report, _ = d5_full_run
        text = render_text(report, TEMPLATE)
        assert "d5-to-e6" in text
        assert "q^(-3/4)" in text

    def test_render_with_missing_template(self, d5_full_run, tmp_path):
        report, _ = d5_full_run
        text = render_text(report, tmp_path / "missing.md")
        assert text.startswith("# qforge report")
