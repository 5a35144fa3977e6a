"""
Shared fixtures: bundled modules and their R-matrices are built once per session.
"""

from fractions import Fraction

import pytest

from qforge.exactq import Scalar
from qforge.repmod import load_module
from qforge.rmatrix import rvv, select_convention
from qforge.specnorm import analyze


def q(exponent, L, coeff=1):
    """Shorthand for coeff * q**exponent"""
    return Scalar.q_power(Fraction(exponent), L, coeff)


@pytest.fixture(scope="session")
def d5_rep():
    return load_module("d5_halfspin16")


@pytest.fixture(scope="session")
def d5_R(d5_rep):
    return rvv(d5_rep, select_convention())


@pytest.fixture(scope="session")
def d5_spectral(d5_R):
    return analyze(d5_R, seed=0)


@pytest.fixture(scope="session")
def e6_rep():
    return load_module("e6_fund27")


@pytest.fixture(scope="session")
def e6_R(e6_rep):
    return rvv(e6_rep, select_convention())


@pytest.fixture(scope="session")
def e6_spectral(e6_R):
    return analyze(e6_R, seed=0)


@pytest.fixture(scope="session")
def e7_rep():
    return load_module("e7_fund56")


@pytest.fixture(scope="session")
def e7_R(e7_rep):
    return rvv(e7_rep, select_convention())


@pytest.fixture(scope="session")
def e7_spectral(e7_R):
    return analyze(e7_R, seed=0)
