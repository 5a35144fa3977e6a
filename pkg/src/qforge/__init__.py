"""
qforge: exact symbolic verification of rank-raising inductions of quantum groups.

Builds the braided R-matrix of a minuscule module, normalizes it from its
spectrum, checks the vector-algebra conditions and the q-Serre relations of
the adjoined simple root, and extends the Cartan matrix.
"""

__version__ = "0.1.0"

from .errors import InputError, QForgeError
from .exactq import Scalar, format_q, parse_q
from .inductor import extend_cartan, serre_extract, serre_verify
from .pipeline import PipelineConfig, run
from .repmod import load_module, validate_rep
from .report import Report, diff_reports
from .rmatrix import rvv
from .rootsys import build_root_system
from .specnorm import analyze

__all__ = [
    "QForgeError",
    "InputError",
    "Scalar",
    "format_q",
    "parse_q",
    "build_root_system",
    "load_module",
    "validate_rep",
    "rvv",
    "analyze",
    "extend_cartan",
    "serre_extract",
    "serre_verify",
    "PipelineConfig",
    "run",
    "Report",
    "diff_reports",
]
