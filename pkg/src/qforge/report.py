"""
Verification reports: the JSON document every run produces, its canonical
form, field-level diffs between two reports, and the text rendering.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from jinja2 import Environment, StrictUndefined
from pydantic import BaseModel, Field, ValidationError

from .config import resolve_resource
from .errors import InputError

logger = logging.getLogger(__name__)

SCHEMA = "qforge/1"
NON_CANONICAL_FIELDS = {"timings"}


class StageResult(BaseModel):
    """Outcome of one stage for one target"""
    status: str = Field("passed", description="passed, failed, error or skipped")
    checks: Dict[str, bool] = Field(default_factory=dict, description="Named boolean checks")
    data: Dict[str, Any] = Field(default_factory=dict, description="Computed values, scalars in canonical text")
    error: Optional[str] = Field(None, description="Error message when status is error")

    @property
    def passed(self) -> bool:
        return self.status in ("passed", "skipped")


class Report(BaseModel):
    """Complete record of one pipeline run"""
    schema_id: str = Field(SCHEMA, alias="schema", description="Report schema version")
    version: str = Field(..., description="qforge version")
    stages: List[str] = Field(default_factory=list, description="Requested stages after expansion")
    results: Dict[str, Dict[str, StageResult]] = Field(
        default_factory=dict, description="target -> stage -> result"
    )
    conventions: Dict[str, str] = Field(default_factory=dict, description="Frozen sign and slice conventions")
    warnings: List[str] = Field(default_factory=list)
    inputs: Dict[str, str] = Field(default_factory=dict, description="Input file -> sha256")
    seed: int = 0
    check_mode: Dict[str, str] = Field(default_factory=dict, description="target -> check mode label")
    exit_code: int = 0
    timings: Dict[str, float] = Field(default_factory=dict, description="target/stage -> seconds")

    model_config = {"populate_by_name": True}

    @property
    def passed(self) -> bool:
        return all(r.passed for stages in self.results.values() for r in stages.values())

    def stage(self, target: str, name: str) -> StageResult:
        return self.results[target][name]


def file_digest(path: Union[str, Path]) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def report_dict(report: Report, canonical: bool = True) -> Dict[str, Any]:
    exclude = NON_CANONICAL_FIELDS if canonical else None
    return report.model_dump(mode="json", by_alias=True, exclude=exclude)


def canonical_json(report: Report) -> str:
    """Sorted keys, compact separators, timings dropped"""
    return json.dumps(report_dict(report), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def save_report(report: Report, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(report_dict(report, canonical=False), f, indent=2, sort_keys=True)
    logger.info(f"Report written to {path}")


def load_report(source: Union[str, Path, Dict, Report]) -> Report:
    """
    Parse a report from a path, a dict or an existing Report.

    Raises:
        InputError: unreadable file or schema mismatch
    """
    if isinstance(source, Report):
        return source
    data = source
    if not isinstance(source, dict):
        try:
            with open(source, "r") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read report {source}: {e}") from e
    if data.get("schema") != SCHEMA:
        raise InputError(f"unsupported report schema {data.get('schema')!r}")
    try:
        return Report.model_validate(data)
    except ValidationError as e:
        raise InputError(f"report does not match {SCHEMA}: {e}") from e


def _walk(a: Any, b: Any, path: str, out: List[str]) -> None:
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            sub = f"{path}.{key}" if path else str(key)
            if key not in a or key not in b:
                out.append(sub)
            else:
                _walk(a[key], b[key], sub, out)
    elif isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
        for i, (x, y) in enumerate(zip(a, b)):
            _walk(x, y, f"{path}[{i}]", out)
    elif a != b:
        out.append(path)


def diff_reports(a: Union[str, Path, Dict, Report], b: Union[str, Path, Dict, Report]) -> List[str]:
    """
    Paths of all fields whose canonical values differ.

    An empty list means the canonical JSON forms are byte-identical.
    """
    left, right = report_dict(load_report(a)), report_dict(load_report(b))
    out: List[str] = []
    _walk(left, right, "", out)
    return out


DEFAULT_TEMPLATE = """# qforge report

**Version:** {{ report.version }}
**Stages:** {{ report.stages | join(", ") }}
**Seed:** {{ report.seed }}
**Exit code:** {{ report.exit_code }}

## Conventions
{% for key, value in report.conventions | dictsort %}
- {{ key }}: {{ value }}
{% endfor %}
{% for target, stages in report.results | dictsort %}
## {{ target }} ({{ report.check_mode.get(target, "n/a") }})
{% for name, result in stages.items() %}
### {{ name }}: {{ result.status }}
{% for check, ok in result.checks.items() %}
- {{ check }}: {{ "pass" if ok else "FAIL" }}
{% endfor %}
{% if result.error %}
Error: {{ result.error }}
{% endif %}
{% endfor %}
{% endfor %}
{% if report.warnings %}
## Warnings
{% for w in report.warnings %}
- {{ w }}
{% endfor %}
{% endif %}
"""


def load_report_template(path: Optional[Union[str, Path]] = None) -> str:
    """
    Template text from ``path``, a bundled template of that name, or the
    built-in template when neither exists
    """
    if path is not None:
        resolved = resolve_resource(str(path))
        if resolved.exists():
            with open(resolved, "r") as f:
                return f.read()
        logger.warning(f"Report template {path} not found, using the built-in one")
    return DEFAULT_TEMPLATE


def render_text(report: Report, template_path: Optional[Union[str, Path]] = None) -> str:
    env = Environment(trim_blocks=True, lstrip_blocks=True, undefined=StrictUndefined)
    template = env.from_string(load_report_template(template_path))
    return template.render(report=report)
