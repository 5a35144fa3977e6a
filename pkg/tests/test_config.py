"""
Test settings loading and overrides.
"""

import pytest
from pydantic import ValidationError

from qforge.config import QForgeSettings, bundled_default, load_settings, override, resolve_resource
from qforge.errors import InputError


class TestLoadSettings:
    def test_missing_file_gives_defaults(self, tmp_path):
        settings = load_settings(str(tmp_path / "absent.yaml"))
        assert settings == QForgeSettings()

    def test_top_level_key(self, tmp_path):
        path = tmp_path / "qforge.yaml"
        path.write_text("qforge:\n  seed: 7\n  serre_sides: [E, F]\n")
        settings = load_settings(str(path))
        assert settings.seed == 7
        assert settings.serre_sides == ["E", "F"]

    def test_flat_file(self, tmp_path):
        path = tmp_path / "flat.yaml"
        path.write_text("threads: 4\n")
        assert load_settings(str(path)).threads == 4

    def test_environment_variable(self, tmp_path, monkeypatch):
        path = tmp_path / "env.yaml"
        path.write_text("qforge:\n  rprime_form: generic\n")
        monkeypatch.setenv("QFORGE_CONFIG", str(path))
        assert load_settings(reload=True).rprime_form == "generic"

    def test_invalid_value(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("qforge:\n  eigen: largest\n")
        with pytest.raises(InputError):
            load_settings(str(path))

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("qforge: [unclosed\n")
        with pytest.raises(InputError):
            load_settings(str(path))


class TestOverride:
    def test_none_values_are_ignored(self):
        settings = override(QForgeSettings(seed=3), seed=None, threads=2)
        assert (settings.seed, settings.threads) == (3, 2)

    def test_overrides_are_validated(self):
        with pytest.raises(ValidationError):
            override(QForgeSettings(), serre_sides=[])
        with pytest.raises(ValidationError):
            override(QForgeSettings(), eigen="1/0")


class TestBundledDefaults:
    """Defaults ship with the package, not the working directory"""

    def test_bundled_settings_outside_the_repository(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        monkeypatch.delenv("QFORGE_CONFIG", raising=False)
        settings = load_settings(reload=True)
        assert settings == QForgeSettings()
        assert bundled_default("qforge.yaml").exists()

    def test_template_name_resolves_to_bundled_file(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert resolve_resource(QForgeSettings().report_template) == bundled_default("report_template.md")
        assert resolve_resource(QForgeSettings().report_template).exists()

    def test_existing_path_wins(self, tmp_path):
        path = tmp_path / "report_template.md"
        path.write_text("x")
        assert resolve_resource(str(path)) == path
