import pytest

from cegarkit.abstraction import build_abstract_model, make_abstraction
from cegarkit.counterexample import Counterexample
from cegarkit.model import load_sample, parse_model

# A fiber where the first failure (B) is lighter than the last position (C)
HW_TEXT = """\
var g : A B C
var h : 1 2 3
state a1 g=A h=1
state b1 g=B h=1
state b2 g=B h=2
state c1 g=C h=1
state c2 g=C h=2
state c3 g=C h=3
init a1
trans a1 b1
trans b2 c1
trans c1 a1
trans a1 c2
trans a1 c3
"""


@pytest.fixture
def tl():
    return load_sample("tl")


@pytest.fixture
def f12():
    return load_sample("f12")


@pytest.fixture
def hw():
    return parse_model(HW_TEXT)


@pytest.fixture
def tl_amap(tl):
    return make_abstraction(tl, {"color"})


@pytest.fixture
def f12_amap(f12):
    return make_abstraction(f12, {"pos"})


@pytest.fixture
def hw_amap(hw):
    return make_abstraction(hw, {"h"})


@pytest.fixture
def f12_abstract(f12, f12_amap):
    return build_abstract_model(f12, f12_amap)


@pytest.fixture
def f12_path():
    return Counterexample.finite(["grp=a", "grp=b", "grp=c", "grp=d"])


@pytest.fixture
def tl_lasso():
    return Counterexample.lasso(["state=stop", "state=go"], 1)


@pytest.fixture
def hw_path():
    return Counterexample.finite(["g=A", "g=B", "g=C"])
