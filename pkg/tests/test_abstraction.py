import pytest

from cegarkit.abstraction import (
    build_abstract_model,
    h_inverse,
    make_abstraction,
    render_abstract_model,
)
from cegarkit.errors import AbstractionError
from cegarkit.model import parse_model


def test_hiding_pos_gives_four_groups(f12_amap):
    assert f12_amap.ids == ("grp=a", "grp=b", "grp=c", "grp=d")
    assert h_inverse("grp=c", f12_amap) == {"7", "8", "9"}
    assert f12_amap.h("11") == "grp=d"
    assert f12_amap.max_fiber_size() == 3


def test_tl_abstraction(tl_amap):
    assert tl_amap.ids == ("state=stop", "state=go")
    assert tl_amap.h_inverse("state=go") == {"green", "yellow"}


def test_identity_and_total_abstraction(f12):
    identity = make_abstraction(f12, ())
    assert len(identity) == 12
    assert all(len(c.origins) == 1 for c in identity)
    total = make_abstraction(f12, {"grp", "pos"})
    assert total.ids == ("*",)


def test_unknown_variable(f12):
    with pytest.raises(AbstractionError, match="unknown variable"):
        make_abstraction(f12, {"speed"})


def test_unknown_abstract_state(f12_amap):
    with pytest.raises(AbstractionError):
        f12_amap.h_inverse("grp=z")


def test_existential_lift(f12_abstract):
    assert f12_abstract.initial == {"grp=a"}
    assert f12_abstract.transitions == {
        ("grp=a", "grp=b"),
        ("grp=b", "grp=c"),
        ("grp=c", "grp=c"),
        ("grp=c", "grp=d"),
        ("grp=d", "grp=d"),
    }
    assert f12_abstract.successors("grp=c") == ("grp=c", "grp=d")


def test_replace_keeps_slot_and_tags_pieces(f12_amap):
    refined = f12_amap.replace("grp=c", [frozenset({"9"}), frozenset({"7"}), frozenset({"8"})])
    assert refined.ids == ("grp=a", "grp=b", "grp=c~1", "grp=c~2", "grp=c~3", "grp=d")
    assert refined.h("9") == "grp=c~1"
    again = refined.replace("grp=c~3", [frozenset({"8"})])
    assert "grp=c~4" in again


def test_replace_must_cover(f12_amap):
    with pytest.raises(AbstractionError):
        f12_amap.replace("grp=c", [frozenset({"9"})])


def test_abstract_dump_parses(f12_abstract):
    text = render_abstract_model(f12_abstract)
    dumped = parse_model(text)
    assert dumped.state_ids == ("A0", "A1", "A2", "A3")
    assert dumped.var_names == ("grp",)
    assert dumped.initial == {"A0"}
    assert ("A2", "A3") in dumped.transitions
    assert "# A2 = grp=c (3 origins)" in text


def test_abstract_model_rejects_foreign_map(tl, f12_amap):
    with pytest.raises(AbstractionError):
        build_abstract_model(tl, f12_amap)
