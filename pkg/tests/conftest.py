import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from signed_influence.specfile import load_spec

FIXTURES = pathlib.Path(__file__).parent.parent / "fixtures"
REF11 = FIXTURES / "reference11.yaml"
ZOO17 = FIXTURES / "showcase17.yaml"


@pytest.fixture(scope="session")
def ref11():
    return load_spec(str(REF11))


@pytest.fixture(scope="session")
def zoo17():
    return load_spec(str(ZOO17))
