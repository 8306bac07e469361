"""Shared fixtures. The isothermal tables and the matched family are built once per session."""
import pytest

from hunter.config import MatchConfig
from hunter.numerics.hypergeom import HomogeneousODE, build_constants
from hunter.physics.isothermal import build_tables
from hunter.physics.larson_penston import larson_penston_solve
from hunter.physics.matcher import MatchContext, choose_y0, lambda_bracket, match_family


@pytest.fixture(scope="session")
def constants():
    return build_constants()


@pytest.fixture(scope="session")
def homogeneous_ode():
    return HomogeneousODE()


@pytest.fixture(scope="session")
def tables():
    return build_tables(1e6)


@pytest.fixture(scope="session")
def match_context(constants, tables):
    return MatchContext(constants=constants, fits=tables.fits, tables=tables, config=MatchConfig())


@pytest.fixture(scope="session")
def y0(constants):
    return choose_y0(constants, 0.02).y0


def first_admissible_k(context, y0, limit=40):
    """Smallest k whose lambda bracket lies below y0/10."""
    for k in range(limit):
        if lambda_bracket(k, context, context.config.bracket_halfwidth)[1] <= y0 / 10:
            return k
    raise AssertionError("no admissible k")


@pytest.fixture(scope="session")
def first_k(match_context, y0):
    return first_admissible_k(match_context, y0)


@pytest.fixture(scope="session")
def family(match_context, y0, first_k):
    k0 = first_k
    outcomes = match_family([k0, k0 + 1, k0 + 2], y0, match_context)
    return [o.result for o in outcomes if o.result is not None]


@pytest.fixture(scope="session")
def lp_solution():
    return larson_penston_solve()
