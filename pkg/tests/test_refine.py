import pytest

from cegarkit.abstraction import build_abstract_model
from cegarkit.checker import Property
from cegarkit.config import AnalysisOptions, Detector, LastMode
from cegarkit.errors import PropertyError, RefinementError
from cegarkit.oracle import check_witness
from cegarkit.refine import Outcome, cegar, refine, run_detector
from cegarkit.spurious import Partition, check_spurious_first


def test_refine_f12_three_way(f12, f12_amap, f12_path):
    report = check_spurious_first(f12, f12_amap, f12_path)
    step = refine(f12_amap, report.failure_state, report.partition)
    assert [c.id for c in step.new_classes] == ["grp=c~1", "grp=c~2", "grp=c~3"]
    assert [set(c.origins) for c in step.new_classes] == [{"9"}, {"7"}, {"8"}]
    abstract = build_abstract_model(f12, step.amap)
    assert ("grp=b", "grp=c~1") in abstract.transitions
    assert ("grp=b", "grp=c~2") not in abstract.transitions
    assert not any(src == "grp=c~1" for src, _ in abstract.transitions)


def test_two_way_split(f12_amap):
    step = refine(f12_amap, "grp=c", Partition(frozenset({"9"}), frozenset({"7", "8"}), frozenset()))
    assert len(step.new_classes) == 2
    assert len(step.amap) == 5


def test_degenerate_split(f12_amap):
    with pytest.raises(RefinementError, match="degenerate"):
        refine(f12_amap, "grp=c", Partition(frozenset({"7", "8", "9"}), frozenset(), frozenset()))


def test_partition_must_cover_fiber(f12_amap):
    with pytest.raises(RefinementError, match="cover"):
        refine(f12_amap, "grp=c", Partition(frozenset({"9"}), frozenset({"7"}), frozenset()))


@pytest.mark.parametrize("detector", list(Detector))
def test_run_detector_dispatch(f12, f12_amap, f12_path, detector):
    report = run_detector(f12, f12_amap, f12_path, AnalysisOptions(detector=detector))
    assert report.failure_index == 2
    assert report.detector == detector.value


def test_run_detector_parallel(f12, f12_amap, f12_path):
    report = run_detector(f12, f12_amap, f12_path, AnalysisOptions(workers=3, barrier=True))
    assert report.detector == "parallel-first_detected"
    assert report.failure_index == 2


@pytest.mark.parametrize("detector", list(Detector))
def test_f12_cegar_verifies_after_one_split(f12, detector):
    result = cegar(f12, {"pos"}, Property.parse("AG !(grp=d)"), AnalysisOptions(detector=detector))
    assert result.outcome is Outcome.VERIFIED
    assert result.iterations == 2
    assert len(result.trace) == 1
    assert result.trace[0].step.failure_state == "grp=c"


def test_tl_cegar_recovers_from_incomplete_detector(tl):
    result = cegar(tl, {"color"}, Property.parse("GF state=stop"))
    assert result.outcome is Outcome.VERIFIED
    assert result.iterations == 2
    assert result.trace[0].note == "detector_incomplete"
    assert result.trace[0].report.detector == "first"
    assert result.trace[0].step.failure_state == "state=go"


def test_identity_abstraction_finds_real_counterexample(f12):
    prop = Property.parse("AG !(grp=c)")
    result = cegar(f12, (), prop)
    assert result.outcome is Outcome.REAL_COUNTEREXAMPLE
    assert result.iterations == 1
    assert result.witness.path == ("1", "4", "9")
    assert check_witness(f12, result.amap, result.counterexample, result.witness, prop)


def test_real_counterexample_through_refinement(f12):
    result = cegar(f12, {"pos"}, Property.parse("AG !(grp=c)"))
    assert result.outcome is Outcome.REAL_COUNTEREXAMPLE
    assert result.counterexample.states == ("grp=a", "grp=b", "grp=c")


def test_strict_last_state_is_caught_by_the_oracle(f12):
    # no deadlock in group a, so the strict Out set of a one-state path is empty
    options = AnalysisOptions(last_mode=LastMode.PAPER_STRICT)
    prop = Property.parse("AG !(grp=a)")
    result = cegar(f12, {"pos"}, prop, options)
    assert result.outcome is Outcome.REAL_COUNTEREXAMPLE
    assert result.iterations == 2
    assert result.trace[0].step.failure_state == "grp=a"
    assert result.trace[-1].note == "detector_unsound"
    assert result.witness.path == ("1",)
    assert check_witness(f12, result.amap, result.counterexample, result.witness, prop)


def test_budget_exhausted(tl):
    result = cegar(tl, {"color"}, Property.parse("GF state=stop"), AnalysisOptions(max_iterations=1))
    assert result.outcome is Outcome.BUDGET_EXHAUSTED
    assert result.iterations == 1
    assert len(result.trace) == 1


def test_property_over_invisible_variable(tl):
    with pytest.raises(PropertyError):
        cegar(tl, {"color"}, Property.parse("AG !(color=red)"))
