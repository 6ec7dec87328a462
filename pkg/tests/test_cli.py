import json

import pytest

from cegarkit.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_REAL, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def f12_paths(tmp_path):
    path = tmp_path / "paths.txt"
    path.write_text("# from the checker\nfinite: grp=a grp=b grp=c grp=d\n")
    return str(path)


def test_parse(capsys):
    code, out, _ = run(capsys, "parse", "sample:f12", "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["states"] == 12
    assert doc["deadlocks"] == ["6", "9"]


def test_abstract_listing_and_dump(capsys):
    code, out, _ = run(capsys, "abstract", "sample:f12", "--invisible", "pos")
    assert code == EXIT_OK
    assert out.splitlines()[2] == "grp=c: 7 8 9"
    _, dump, _ = run(capsys, "abstract", "sample:f12", "--invisible", "pos", "--dump-abstract")
    assert "trans A2 A3" in dump


def test_modelcheck(capsys):
    code, out, _ = run(capsys, "modelcheck", "sample:tl", "--invisible", "color", "--prop", "GF state=stop")
    assert code == EXIT_OK
    assert out.strip() == "lasso: state=stop ( state=go )"


def test_analyze_path_file(capsys, f12_paths):
    code, out, _ = run(capsys, "analyze", "sample:f12", "--invisible", "pos", "--path", f12_paths, "--json")
    assert code == EXIT_OK
    [report] = json.loads(out)["reports"]
    assert report["failure_index"] == 2
    assert report["dead"] == ["9"]
    assert report["oracle"]["verdict"] == "spurious"


def test_analyze_from_property_with_splitpath(capsys):
    code, out, _ = run(capsys, "analyze", "sample:tl", "--invisible", "color", "--prop", "GF state=stop",
                       "--detector", "splitpath", "--unwind", "2")
    assert code == EXIT_OK
    assert "splitpath: spurious" in out
    assert "unwind: 2" in out


def test_refine(capsys, f12_paths):
    code, out, _ = run(capsys, "refine", "sample:f12", "--invisible", "pos", "--path", f12_paths, "--json")
    assert code == EXIT_OK
    classes = json.loads(out)["refinement"]["new_classes"]
    assert [c["origins"] for c in classes] == [["9"], ["7"], ["8"]]


@pytest.mark.parametrize(
    "model, invisible, prop, extra, expected",
    [
        ("sample:f12", "pos", "AG !(grp=d)", [], EXIT_OK),
        ("sample:f12", "pos", "AG !(grp=c)", [], EXIT_REAL),
        ("sample:tl", "color", "GF state=stop", ["--max-iter", "1"], EXIT_BUDGET),
        ("sample:tl", "color", "GF state=stop", ["--detector", "heaviest", "--workers", "2"], EXIT_OK),
    ],
)
def test_cegar_exit_codes(capsys, model, invisible, prop, extra, expected):
    code, _, _ = run(capsys, "cegar", model, "--invisible", invisible, "--prop", prop, *extra)
    assert code == expected


def test_cegar_json_is_byte_stable(capsys):
    argv = ["cegar", "sample:tl", "--invisible", "color", "--prop", "GF state=stop", "--json"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert json.loads(first)["outcome"] == "verified"


@pytest.mark.parametrize(
    "argv",
    [
        ["parse", "does/not/exist.model"],
        ["cegar", "sample:tl", "--invisible", "color", "--prop", "EF state=stop"],
        ["cegar", "sample:tl", "--invisible", "speed", "--prop", "GF state=stop"],
        ["analyze", "sample:f12", "--invisible", "pos"],
        ["gen", "--states", "0"],
        ["cegar", "sample:tl", "--prop", "GF state=stop", "--workers", "0"],
    ],
)
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert err.startswith("cegarkit: error:")


def test_gen_is_deterministic(capsys, tmp_path):
    target = tmp_path / "m.model"
    assert run(capsys, "gen", "--seed", "9", "--states", "30", "-o", str(target))[0] == EXIT_OK
    _, out, _ = run(capsys, "gen", "--seed", "9", "--states", "30")
    assert target.read_text() == out


def test_bench_json_is_byte_stable(capsys):
    argv = ["bench", "--models", "4", "--states", "10", "--density", "0.3", "--seed", "11", "--json"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv, "--jobs", "3")
    assert code == EXIT_OK
    assert first == second
    assert json.loads(first)["cases"] == 4
