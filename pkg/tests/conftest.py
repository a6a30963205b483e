import json
from pathlib import Path

import pytest

from wavestab.model import make_model
from wavestab.profile import WaveParams, solve_profile

FIXTURES = Path(__file__).resolve().parent / "fixtures"

# Sample waves shared by several modules.  REF_P sits in the middle of the
# focusing well (turning points 1/2 and 3/2); REFD_P is a defocusing wave
# with nonzero speed and phase rotation.
REF_P = WaveParams(-0.375, 0.0, -1.0, 0.0)
REFD_P = WaveParams(1.2, 0.1, 1.5, 1.0)


@pytest.fixture(scope="session")
def oracles():
    return json.loads((FIXTURES / "oracles.json").read_text())


@pytest.fixture(scope="session")
def ref():
    return make_model([1], [0, 0, -1 / 8])


@pytest.fixture(scope="session")
def refd():
    return make_model([1], [0, 0, 1 / 8])


@pytest.fixture(scope="session")
def kw_model():
    # nonconstant kappa and a cubic term, so no formula degenerates
    return make_model([1, 0.1, 0.02], [0, 0, -1 / 8, 0.01])


@pytest.fixture(scope="session")
def ref_profile(ref):
    return solve_profile(ref, REF_P)


@pytest.fixture(scope="session")
def refd_profile(refd):
    return solve_profile(refd, REFD_P)
