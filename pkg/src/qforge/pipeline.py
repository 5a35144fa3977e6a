"""
Stage orchestration: resolve targets, run the requested stages and their
prerequisites in dependency order, and collect everything into a Report.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from . import __version__
from .claims import bundled_claims_path, load_claims, select_minus_convention, verify_mclaims
from .config import QForgeSettings, load_settings
from .errors import ConventionError, InputError, InternalConsistencyError, QForgeError
from .exactq import format_q, monomial_of
from .inductor import (
    InductionCase,
    bundled_cases_path,
    cartan_column_from_rep,
    compare_serre,
    extend_cartan,
    k_commutation,
    parse_reference,
    scalar_conditions,
    select_cases,
    serre_extract,
    serre_scale,
    serre_verify,
    weight_tower,
)
from .repmod import RepModule, bundled_rep_path, load_module, validate_rep
from .report import Report, StageResult, file_digest, save_report
from .rmatrix import (
    CheckMode,
    RMatrix,
    check_diagonal_is_pairing,
    check_extreme_columns,
    check_intertwiner,
    check_qybe,
    check_triangular,
    coproduct_label,
    export_rmatrix,
    is_symmetric,
    rvv,
    select_convention,
)
from .rootsys import Weight, weight_norm
from .specnorm import (
    Eigen,
    Poly,
    SpectralData,
    affine_relation,
    build_rprime,
    check_vector_algebra_conditions,
    eigen_scalar,
    min_poly,
    monomial_roots,
    normalize,
    parse_eigenvalues,
    poly_degree,
    top_eigenvalue_matches,
)

logger = logging.getLogger(__name__)

STAGES = ("validate", "rmatrix", "minpoly", "normalize", "rprime", "conditions", "mclaims", "serre", "extend")
ALL = "all"
DEPENDENCIES: Dict[str, Tuple[str, ...]] = {
    "validate": (),
    "rmatrix": (),
    "minpoly": ("rmatrix",),
    "normalize": ("minpoly",),
    "rprime": ("normalize",),
    "conditions": ("rprime",),
    "mclaims": ("rmatrix",),
    "serre": ("rprime",),
    "extend": (),
}
REP_STAGES = set(STAGES) - {"extend"}

EXIT_PASS, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class PipelineConfig(BaseModel):
    """What to run, on which inputs, and how thoroughly"""
    stages: List[str] = Field(default_factory=lambda: [ALL], description="Requested stages")
    case: Optional[str] = Field(None, description="Case id or all-nine")
    cases_file: Optional[str] = Field(None, description="Case file; bundled cases when omitted")
    rep: Optional[str] = Field(None, description="Representation diagram path or bundled name")
    claims: Optional[str] = Field(None, description="m± claims path or bundled name")
    check: Optional[str] = Field(None, description="full or sampled:N; chosen by dimension when omitted")
    out: Optional[str] = Field(None, description="Report JSON path")
    dump_dir: Optional[str] = Field(None, description="Directory for exported R-matrices")
    settings: QForgeSettings = Field(default_factory=QForgeSettings)

    @field_validator("stages")
    @classmethod
    def _known_stages(cls, value: List[str]) -> List[str]:
        unknown = [s for s in value if s != ALL and s not in STAGES]
        if unknown:
            raise ValueError(f"unknown stages {unknown}")
        return value

    @field_validator("check")
    @classmethod
    def _valid_check(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            CheckMode.parse(value)
        return value


def expand_stages(requested: List[str]) -> List[str]:
    """Requested stages plus prerequisites, in execution order"""
    wanted = set(STAGES) if ALL in requested else set(requested)
    pending = list(wanted)
    while pending:
        for dep in DEPENDENCIES[pending.pop()]:
            if dep not in wanted:
                wanted.add(dep)
                pending.append(dep)
    return [s for s in STAGES if s in wanted]


@dataclass
class Target:
    """One unit of work: a case, a bare module, or both"""

    name: str
    case: Optional[InductionCase] = None
    rep_source: Optional[str] = None
    claims_source: Optional[str] = None


@dataclass
class StageContext:
    """Values shared between the stages of one target"""

    target: Target
    settings: QForgeSettings
    requested: List[str]
    report: Report
    rep: Optional[RepModule] = None
    mode: CheckMode = field(default_factory=CheckMode)
    R: Optional[RMatrix] = None
    minpoly: Optional[Poly] = None
    eigenvalues: Optional[List[Eigen]] = None
    spectral: Optional[SpectralData] = None
    dump_dir: Optional[str] = None

    def checking(self, stage: str) -> bool:
        return stage in self.requested or ALL in self.requested


def resolve_targets(config: PipelineConfig) -> List[Target]:
    if config.case:
        targets = []
        for case in select_cases(config.case, config.cases_file):
            targets.append(
                Target(
                    name=case.id,
                    case=case,
                    rep_source=config.rep or case.rep,
                    claims_source=config.claims or case.claims,
                )
            )
        return targets
    if config.rep:
        return [Target(name=Path(config.rep).stem, rep_source=config.rep, claims_source=config.claims)]
    raise InputError("either a case id or a representation must be given")


def _source_path(source: str, bundled: Callable[[str], Path]) -> Path:
    path = Path(source)
    return path if path.exists() else bundled(source)


def _default_claims(rep_source: str) -> Optional[str]:
    name = Path(rep_source).stem
    return name if bundled_claims_path(name).exists() else None


def check_mode_for(dim: int, settings: QForgeSettings, override: Optional[str] = None) -> CheckMode:
    if override is not None:
        return CheckMode.parse(override, settings.seed)
    if dim <= settings.full_check_max_dim:
        return CheckMode("full", 0, settings.seed)
    return CheckMode("sampled", settings.sampled_columns, settings.seed)


# Stages


def stage_validate(ctx: StageContext) -> StageResult:
    validation = validate_rep(ctx.rep)
    for w in validation.warnings:
        ctx.report.warnings.append(f"{ctx.rep.name}: {w}")
    details = {c.name: c.detail for c in validation.checks if c.detail}
    return StageResult(
        checks={c.name: c.passed for c in validation.checks},
        data={"dim": validation.dim, "info": validation.info, "details": details},
    )


def stage_rmatrix(ctx: StageContext) -> StageResult:
    convention = select_convention()
    ctx.report.conventions["rvv"] = convention.label
    ctx.report.conventions["coproduct"] = coproduct_label()
    R = rvv(ctx.rep, convention)
    ctx.R = R
    p = ctx.rep.highest
    result = StageResult(
        data={
            "dim": R.p,
            "nnz": R.matrix.nnz(),
            "top_entry": format_q(R.entry(p, p, p, p)),
            "pr_symmetric": is_symmetric(R.pr()),
        }
    )
    if ctx.dump_dir:
        path = Path(ctx.dump_dir) / f"{ctx.rep.name}_rvv.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(export_rmatrix(R), f)
        result.data["export"] = str(path)
    if ctx.checking("rmatrix"):
        result.checks = {
            "triangular": check_triangular(R),
            "diagonal_is_pairing": check_diagonal_is_pairing(R),
            "extreme_columns": check_extreme_columns(R),
            "intertwiner": check_intertwiner(ctx.rep, R),
            "qybe": check_qybe(R, ctx.mode, ctx.settings.threads),
        }
    return result


def _highest_norm(rep: RepModule) -> Fraction:
    return weight_norm(rep.root_system, Weight(tuple(rep.weights[rep.highest])))


def stage_minpoly(ctx: StageContext) -> StageResult:
    settings = ctx.settings
    poly = min_poly(ctx.R.pr(), seed=settings.seed, vectors=settings.krylov_vectors, retries=settings.krylov_retries)
    eigenvalues = monomial_roots(poly)
    ctx.minpoly, ctx.eigenvalues = poly, eigenvalues
    result = StageResult(
        data={
            "degree": poly_degree(poly),
            "coefficients": [format_q(c) for c in poly],
            "eigenvalues": [[s, str(e)] for s, e in eigenvalues],
            "eigenvalues_text": [format_q(eigen_scalar(x, ctx.R.L)) for x in eigenvalues],
        }
    )
    rep = ctx.rep
    highest_norm = _highest_norm(rep)
    result.data["highest_weight_norm"] = str(highest_norm)
    case = ctx.target.case
    if case is not None and case.reference_eigenvalues:
        reference = parse_eigenvalues(case.reference_eigenvalues, ctx.R.L)
        extra = sorted(set(eigenvalues) - set(reference))
        result.data["reference"] = {
            "eigenvalues_text": [format_q(eigen_scalar(x, ctx.R.L)) for x in reference],
            "exact": reference == eigenvalues,
            "not_published": [format_q(eigen_scalar(x, ctx.R.L)) for x in extra],
        }
        if reference != eigenvalues:
            ctx.report.warnings.append(
                f"{case.id}: minimal polynomial roots differ from the published ones, "
                f"computed {result.data['eigenvalues_text']}"
            )
    if ctx.checking("minpoly"):
        result.checks = {
            "degree_matches_roots": poly_degree(poly) == len(eigenvalues),
            "top_eigenvalue_is_weight_norm": top_eigenvalue_matches(eigenvalues, highest_norm),
        }
    return result


def stage_normalize(ctx: StageContext) -> StageResult:
    lam, Rnorm, selected = normalize(ctx.R, ctx.eigenvalues, ctx.settings.eigen)
    ctx.report.conventions["eigen"] = ctx.settings.eigen
    ctx.spectral = SpectralData(
        minpoly=ctx.minpoly,
        eigenvalues=ctx.eigenvalues,
        selected=selected,
        lam=lam,
        Rnorm=Rnorm,
        form=ctx.settings.rprime_form,
    )
    spectrum = ctx.spectral.normalized_eigenvalues
    p = ctx.rep.highest
    result = StageResult(
        data={
            "lambda": format_q(lam),
            "normalized_eigenvalues": [format_q(eigen_scalar(x, Rnorm.L)) for x in spectrum],
            "top_entry": format_q(Rnorm.entry(p, p, p, p)),
            "lambda_is_weight_norm_minus_two": monomial_of(lam) == (1, _highest_norm(ctx.rep) - 2),
        }
    )
    if ctx.checking("normalize"):
        result.checks = {
            "contains_minus_one": (-1, 0) in spectrum,
            "largest_is_q_squared": max(spectrum, key=lambda x: x[1]) == (1, 2),
        }
    return result


def stage_rprime(ctx: StageContext) -> StageResult:
    spectral = ctx.spectral
    spectrum = spectral.normalized_eigenvalues
    spectral.Rprime_generic = build_rprime(spectral.Rnorm, spectrum, "generic")
    spectral.Rprime_closed = build_rprime(spectral.Rnorm, spectrum, "closed")
    if spectral.Rprime_closed is not None:
        spectral.affine = affine_relation(spectral.Rprime_closed, spectral.Rprime_generic)
    elif ctx.settings.rprime_form == "closed":
        logger.warning(f"{ctx.rep.name}: no closed-form R' for this spectrum, using the generic one")
    ctx.report.conventions["rprime_form"] = ctx.settings.rprime_form
    data: Dict[str, object] = {"form": spectral.rprime.convention, "nnz": spectral.rprime.matrix.nnz()}
    if spectral.affine is not None:
        data["affine"] = {"a": format_q(spectral.affine[0]), "b": format_q(spectral.affine[1])}
    result = StageResult(data=data)
    if ctx.checking("rprime") and spectral.Rprime_closed is not None:
        result.checks = {"affine_relation": spectral.affine is not None}
    return result


def stage_conditions(ctx: StageContext) -> StageResult:
    first, second, third = check_vector_algebra_conditions(
        ctx.spectral.Rnorm, ctx.spectral.rprime, ctx.mode, ctx.settings.threads
    )
    ctx.spectral.conditions = {"i": first, "ii": second, "iii": third}
    return StageResult(checks={"condition_i": first, "condition_ii": second, "condition_iii": third})


def stage_mclaims(ctx: StageContext) -> StageResult:
    source = ctx.target.claims_source or _default_claims(ctx.target.rep_source)
    if source is None:
        return StageResult(status="skipped", data={"reason": f"no claims for {ctx.rep.name}"})
    claims = load_claims(_source_path(source, bundled_claims_path))
    ctx.report.inputs.setdefault(source, file_digest(_source_path(source, bundled_claims_path)))
    minus = select_minus_convention()
    ctx.report.conventions["m_minus"] = minus
    verdicts = verify_mclaims(ctx.rep, ctx.R, claims, minus)
    return StageResult(
        checks={v.label: v.passed for v in verdicts},
        data={"failed": {v.label: v.detail for v in verdicts if not v.passed}, "count": len(verdicts)},
    )


def stage_serre(ctx: StageContext) -> StageResult:
    sides = ctx.settings.serre_sides
    minus = select_minus_convention() if "F" in sides else "cross_cartan"
    result = StageResult(data={"scalars": {}})
    extracted = {}
    for side in sides:
        scalars = serre_extract(ctx.rep, ctx.R, ctx.spectral, side, minus)
        identities = serre_verify(scalars)
        extracted[side] = scalars
        result.data["scalars"][side] = scalars.to_report()
        result.checks[f"{side}_serre_identities"] = all(identities)
    case = ctx.target.case
    if case is not None and case.reference_serre and "E" in extracted:
        reference = parse_reference(case.reference_serre, ctx.rep.L)
        comparison = compare_serre(extracted["E"], reference)
        scale = serre_scale(extracted["E"], reference)
        result.data["reference"] = {
            "scalars": reference.to_report(),
            "identities": list(scalar_conditions(reference)),
            "comparison": comparison,
            "scale": format_q(scale) if scale is not None else None,
        }
        if not comparison["exact"]:
            if scale is not None:
                detail = f"equal after rescaling e^(p-1) by {format_q(scale)}"
            else:
                detail = "not proportional"
            ctx.report.warnings.append(f"{case.id}: extracted Serre scalars differ from the published tuple, {detail}")
    return result


def stage_extend(ctx: StageContext) -> StageResult:
    case = ctx.target.case
    result = StageResult()
    expected = None
    if case is not None:
        expected = extend_cartan(case)
        result.data["cartan"] = expected.to_report()
        result.checks["matches_target"] = expected.matches_target
        result.checks.update(expected.checks)
    if ctx.rep is not None and ctx.spectral is not None:
        readback = cartan_column_from_rep(ctx.rep, ctx.spectral, expected)
        result.data["readback"] = readback.to_report()
        commutation = k_commutation(ctx.rep, ctx.spectral)
        result.data["k_commutation"] = commutation["exponents"]
        if expected is not None:
            result.checks["readback_agrees"] = bool(readback.agrees)
            rs = ctx.rep.root_system
            n = rs.rank
            predicted = [int(expected.matrix[j, n]) * rs.symmetrizers[j] for j in range(n)] + [case.len2]
            result.checks["k_commutation"] = commutation["values"] == predicted
    if ctx.rep is not None:
        tower = weight_tower(ctx.rep, case)
        result.data["weight_tower"] = tower
        result.checks["weight_tower"] = tower["passed"]
    return result


STAGE_FUNCTIONS: Dict[str, Callable[[StageContext], StageResult]] = {
    "validate": stage_validate,
    "rmatrix": stage_rmatrix,
    "minpoly": stage_minpoly,
    "normalize": stage_normalize,
    "rprime": stage_rprime,
    "conditions": stage_conditions,
    "mclaims": stage_mclaims,
    "serre": stage_serre,
    "extend": stage_extend,
}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, InputError):
        return EXIT_INPUT
    if isinstance(error, (InternalConsistencyError, ConventionError)) or not isinstance(error, QForgeError):
        return EXIT_INTERNAL
    return EXIT_CHECK_FAILED


def _run_stage(ctx: StageContext, name: str) -> Tuple[StageResult, int]:
    try:
        result = STAGE_FUNCTIONS[name](ctx)
    except QForgeError as e:
        logger.error(f"{ctx.target.name}/{name}: {e}")
        return StageResult(status="error", error=f"{type(e).__name__}: {e}"), exit_code_for(e)
    except Exception as e:
        logger.exception(f"{ctx.target.name}/{name}: unexpected failure")
        return StageResult(status="error", error=f"{type(e).__name__}: {e}"), EXIT_INTERNAL
    if result.status != "skipped" and not all(result.checks.values()):
        failed = [k for k, ok in result.checks.items() if not ok]
        logger.error(f"{ctx.target.name}/{name}: failed checks {failed}")
        result.status = "failed"
        return result, EXIT_CHECK_FAILED
    return result, EXIT_PASS


def _load_target(ctx: StageContext) -> None:
    source = ctx.target.rep_source
    if source is None:
        return
    path = _source_path(source, bundled_rep_path)
    ctx.rep = load_module(path)
    ctx.report.inputs.setdefault(source, file_digest(path))


def run_target(
    target: Target, plan: List[str], requested: List[str], config: PipelineConfig, report: Report
) -> int:
    """Run the plan for one target; results land in ``report.results[target.name]``"""
    settings = config.settings
    ctx = StageContext(target=target, settings=settings, requested=requested, report=report, dump_dir=config.dump_dir)
    results: Dict[str, StageResult] = {}
    report.results[target.name] = results
    try:
        _load_target(ctx)
    except QForgeError as e:
        logger.error(f"{target.name}: {e}")
        results["input"] = StageResult(status="error", error=f"{type(e).__name__}: {e}")
        return exit_code_for(e)

    if ctx.rep is not None:
        ctx.mode = check_mode_for(ctx.rep.dim, settings, config.check)
        report.check_mode[target.name] = ctx.mode.label

    code = EXIT_PASS
    for name in plan:
        if name in REP_STAGES and ctx.rep is None:
            continue
        if name == "extend" and ctx.rep is None and target.case is None:
            continue
        blocked = [d for d in DEPENDENCIES[name] if d in results and results[d].status != "passed"]
        if blocked:
            results[name] = StageResult(status="skipped", data={"reason": f"{blocked[0]} did not pass"})
            continue
        start = time.perf_counter()
        results[name], stage_code = _run_stage(ctx, name)
        report.timings[f"{target.name}/{name}"] = round(time.perf_counter() - start, 3)
        logger.info(f"{target.name}/{name}: {results[name].status} in {report.timings[f'{target.name}/{name}']}s")
        code = max(code, stage_code)
    return code


def run(config: PipelineConfig) -> Tuple[Report, int]:
    """
    Execute the requested stages for every target.

    Args:
        config: Stages, inputs and settings

    Returns:
        (report, exit code): 0 when every executed check passed, 1 on a failed
        check, 2 on bad input, 3 on an internal error
    """
    plan = expand_stages(config.stages)
    report = Report(version=__version__, stages=plan, seed=config.settings.seed)
    code = EXIT_PASS
    try:
        targets = resolve_targets(config)
        if config.case:
            cases_path = Path(config.cases_file) if config.cases_file else bundled_cases_path()
            report.inputs[str(config.cases_file or "all_nine.json")] = file_digest(cases_path)
        for target in targets:
            code = max(code, run_target(target, plan, config.stages, config, report))
    except QForgeError as e:
        logger.error(f"Pipeline aborted: {e}")
        report.warnings.append(f"aborted: {e}")
        code = max(code, exit_code_for(e))
    finally:
        report.exit_code = code
        if config.out:
            save_report(report, config.out)
    logger.info(f"Pipeline finished with exit code {code}")
    return report, code


def config_from_settings(settings: Optional[QForgeSettings] = None, **values) -> PipelineConfig:
    return PipelineConfig(settings=settings or load_settings(), **values)
