"""
Transcribed entries of the m± matrices and their verification against R-slices.

A claim reads  coef · [gen] · ∏ K_i^{r_i}  (``gen_k`` order) or
coef · ∏ K_i^{r_i} · [gen]  (``k_gen`` order) and is compared exactly with the
p×p image of (m^±)^i_j computed from the R-matrix.
"""

import json
import logging
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, List, Literal, Union

from pydantic import BaseModel, Field, ValidationError

from .errors import ClaimGrammarError, ConventionError, ExactArithmeticError
from .exactq import parse_q
from .repmod import RepModule, load_module
from .rmatrix import MINUS_CONVENTIONS, RMatrix, lplus_slice, rvv
from .sparse import SparseMat

logger = logging.getLogger(__name__)


class ClaimGenerator(BaseModel):
    """Optional Chevalley generator factor"""
    type: Literal["E", "F", "none"] = Field(..., description="Generator kind")
    index: int = Field(0, description="Simple root index (1-based), ignored for none")


class ClaimSpec(BaseModel):
    """One transcribed entry (m^which)^i_j"""
    which: Literal["plus", "minus"] = Field(..., description="m+ or m-")
    i: int = Field(..., ge=1, description="Row node id")
    j: int = Field(..., ge=1, description="Column node id")
    coef: str = Field(..., description="Scalar coefficient as an expression in q")
    gen: ClaimGenerator = Field(default_factory=lambda: ClaimGenerator(type="none"))
    k_exponents: List[List[int]] = Field(default_factory=list, description="[num, den] per simple root")
    order: Literal["gen_k", "k_gen"] = Field("gen_k", description="Written order of generator and K-monomial")

    @property
    def label(self) -> str:
        sign = "+" if self.which == "plus" else "-"
        return f"(m{sign})^{self.i}_{self.j}"


class ClaimsFile(BaseModel):
    rep: str
    claims: List[ClaimSpec]


class ClaimVerdict(BaseModel):
    """Outcome of one claim"""
    label: str
    which: str
    i: int
    j: int
    passed: bool
    detail: str = ""


def bundled_claims_path(name: str) -> Path:
    stem = Path(name).stem
    stem = stem if stem.endswith("_claims") else f"{stem}_claims"
    return Path(str(resources.files("qforge") / "data" / "claims" / f"{stem}.json"))


def load_claims(source: Union[str, Path, Dict]) -> ClaimsFile:
    """
    Load a claims file from a bundled name, a path, or a parsed dict.

    Raises:
        ClaimGrammarError: schema violation
    """
    if isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        if not path.exists():
            path = bundled_claims_path(str(source))
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ClaimGrammarError(f"claims file {source} not found") from e
        except json.JSONDecodeError as e:
            raise ClaimGrammarError(f"claims file {path} is not valid JSON: {e}") from e
    try:
        claims = ClaimsFile.model_validate(data)
    except ValidationError as e:
        raise ClaimGrammarError(f"claims file does not match the schema: {e}") from e
    logger.info(f"Loaded {len(claims.claims)} claims for {claims.rep}")
    return claims


def _k_exponents(rep: RepModule, claim: ClaimSpec) -> List[Fraction]:
    rank = rep.root_system.rank
    if not claim.k_exponents:
        return [Fraction(0)] * rank
    if len(claim.k_exponents) != rank:
        raise ClaimGrammarError(f"{claim.label}: expected {rank} K-exponents, got {len(claim.k_exponents)}")
    out = []
    for pair in claim.k_exponents:
        if len(pair) != 2 or pair[1] == 0:
            raise ClaimGrammarError(f"{claim.label}: malformed exponent {pair}")
        out.append(Fraction(pair[0], pair[1]))
    return out


def claim_matrix(rep: RepModule, claim: ClaimSpec) -> SparseMat:
    """p×p action of the claimed expression on the module"""
    try:
        coef = parse_q(claim.coef, rep.L)
    except ExactArithmeticError as e:
        raise ClaimGrammarError(f"{claim.label}: {e}") from e
    if coef.is_zero():
        return SparseMat.zeros(rep.dim, rep.dim, rep.L)
    k_mat = rep.k_diag(_k_exponents(rep, claim))
    if claim.gen.type == "none":
        return k_mat.scale(coef)
    if not 1 <= claim.gen.index <= rep.root_system.rank:
        raise ClaimGrammarError(f"{claim.label}: generator index {claim.gen.index} out of range")
    gen = rep.matE[claim.gen.index] if claim.gen.type == "E" else rep.matF[claim.gen.index]
    product = gen @ k_mat if claim.order == "gen_k" else k_mat @ gen
    return product.scale(coef)


def verify_mclaims(
    rep: RepModule, R: RMatrix, claims: ClaimsFile, minus_convention: str = "cross_cartan"
) -> List[ClaimVerdict]:
    """
    Compare every claim with the corresponding R-slice.

    Args:
        rep: Module the claims refer to
        R: Its R-matrix
        claims: Parsed claims
        minus_convention: Cartan factor used for m- slices

    Returns:
        One verdict per claim, in file order
    """
    verdicts = []
    for claim in claims.claims:
        try:
            a, b = rep.index_of(claim.i), rep.index_of(claim.j)
        except ValueError as e:
            raise ClaimGrammarError(f"{claim.label}: node not in {rep.name}") from e
        expected = claim_matrix(rep, claim)
        actual = lplus_slice(R, claim.which, a, b, minus_convention)
        passed = expected == actual
        detail = "" if passed else f"slice has {actual.nnz()} nonzero entries, claim has {expected.nnz()}"
        verdicts.append(
            ClaimVerdict(label=claim.label, which=claim.which, i=claim.i, j=claim.j, passed=passed, detail=detail)
        )
    failed = [v.label for v in verdicts if not v.passed]
    if failed:
        logger.warning(f"{rep.name}: {len(failed)} claims failed: {failed}")
    else:
        logger.info(f"{rep.name}: all {len(verdicts)} claims verified")
    return verdicts


@lru_cache(maxsize=1)
def select_minus_convention() -> str:
    """
    First m- slice convention under which every bundled D5 m- claim verifies.
    Cached for the process.
    """
    rep = load_module("d5_halfspin16")
    R = rvv(rep)
    claims = load_claims("d5_halfspin16")
    minus_only = ClaimsFile(rep=claims.rep, claims=[c for c in claims.claims if c.which == "minus"])
    for convention in MINUS_CONVENTIONS:
        if all(v.passed for v in verify_mclaims(rep, R, minus_only, convention)):
            logger.info(f"Selected m- slice convention {convention}")
            return convention
    raise ConventionError("no m- slice convention reproduces the D5 claims")
