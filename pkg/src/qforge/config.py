"""
Run settings: the bundled data/defaults/qforge.yaml, a file named by
$QFORGE_CONFIG, or one passed explicitly.
"""

import logging
import os
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import InputError

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_NAME = "qforge.yaml"
SETTINGS_ENV = "QFORGE_CONFIG"

# Global variable for caching
SETTINGS: Optional["QForgeSettings"] = None


def bundled_default(name: str) -> Path:
    """Path of a file shipped in qforge/data/defaults"""
    return Path(str(resources.files("qforge") / "data" / "defaults" / name))


def resolve_resource(value: str) -> Path:
    """``value`` as given when it exists, else the bundled default of that name"""
    path = Path(value)
    if path.exists():
        return path
    return bundled_default(path.name)


class QForgeSettings(BaseModel):
    """Defaults for every pipeline knob; CLI flags override them"""
    seed: int = Field(default=0, description="Seed for Krylov vectors and column sampling")
    full_check_max_dim: int = Field(default=27, description="Largest module checked column-exhaustively")
    sampled_columns: int = Field(default=200, ge=1, description="Columns checked in sampled mode")
    krylov_vectors: int = Field(default=3, ge=1, description="Random vectors per Krylov attempt")
    krylov_retries: int = Field(default=3, ge=1, description="Krylov attempts before giving up")
    threads: int = Field(default=1, ge=1, description="joblib workers for column checks")
    eigen: str = Field(default="auto", description="Normalization eigenvalue: auto or an exponent a/b")
    rprime_form: str = Field(default="closed", description="R' used downstream: closed or generic")
    serre_sides: List[str] = Field(default_factory=lambda: ["E"], description="Serre extraction sides")
    log_level: str = Field(default="INFO", description="Logging level for the CLI")
    report_template: str = Field(default="report_template.md", description="jinja2 text report template: path or bundled name")

    @field_validator("eigen")
    @classmethod
    def _eigen_choice(cls, value: str) -> str:
        if value != "auto":
            try:
                Fraction(value)
            except ZeroDivisionError as e:
                raise ValueError(f"eigenvalue exponent {value!r} has a zero denominator") from e
        return value

    @field_validator("rprime_form")
    @classmethod
    def _rprime_form(cls, value: str) -> str:
        if value not in ("closed", "generic"):
            raise ValueError(f"unknown R' form {value!r}")
        return value

    @field_validator("serre_sides")
    @classmethod
    def _serre_sides(cls, value: List[str]) -> List[str]:
        if not value or any(side not in ("E", "F") for side in value):
            raise ValueError(f"Serre sides must be E and/or F, got {value}")
        return value


def load_settings(path: Optional[str] = None, reload: bool = False) -> QForgeSettings:
    """
    Load settings once and cache them.

    Args:
        path: YAML file; ``$QFORGE_CONFIG`` or the bundled defaults otherwise
        reload: Ignore the cached value

    Returns:
        Validated settings, built-in defaults when the file is missing
    """
    global SETTINGS

    if SETTINGS is None or reload or path is not None:
        path = path or os.environ.get(SETTINGS_ENV) or str(bundled_default(DEFAULT_SETTINGS_NAME))
        try:
            with open(path, "r") as f:
                raw: Dict[str, Any] = yaml.safe_load(f) or {}
            SETTINGS = QForgeSettings.model_validate(raw.get("qforge", raw))
            logger.info(f"Settings loaded from {path}")
        except FileNotFoundError:
            logger.warning(f"Settings file {path} not found, using defaults")
            SETTINGS = QForgeSettings()
        except (yaml.YAMLError, ValidationError) as e:
            raise InputError(f"invalid settings file {path}: {e}") from e

    return SETTINGS


def override(settings: QForgeSettings, **values: Any) -> QForgeSettings:
    """Validated copy with the non-None values applied"""
    updates = {k: v for k, v in values.items() if v is not None}
    return QForgeSettings.model_validate({**settings.model_dump(), **updates})
