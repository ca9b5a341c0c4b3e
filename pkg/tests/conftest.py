from fractions import Fraction

import pytest

from qwz.numeric import TruncationPolicy

Fr = Fraction


@pytest.fixture(scope="session")
def policy():
    return TruncationPolicy()


@pytest.fixture(scope="session")
def pairs():
    """Discovered WZ pairs for every WZ catalog entry, computed once."""
    from qwz import catalog
    from qwz.engine import build_F, wz_discover
    out = {}
    for i in catalog.list_ids():
        e = catalog.get(i)
        if e.kind == "wz":
            out[i] = wz_discover(build_F(e))
    return out
