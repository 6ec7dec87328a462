"""Randomized checks on generated models."""
from collections import deque

import numpy as np
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from cegarkit.abstraction import build_abstract_model, make_abstraction
from cegarkit.checker import Property, check_property
from cegarkit.config import AnalysisOptions, LastMode, ParallelMode, Verdict
from cegarkit.counterexample import cfp, validate_counterexample
from cegarkit.generator import GenParams, generate_model, suggested_invisible
from cegarkit.model import parse_model, render_model
from cegarkit.oracle import check_witness, concretize
from cegarkit.refine import Outcome, cegar
from cegarkit.spurious import (
    check_spurious_first,
    check_spurious_heaviest,
    check_spurious_parallel,
    in_set,
    is_failure_state,
    out_set,
    position_weights,
    split_path,
)

RANDOMIZED = settings(
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
)


@st.composite
def abstractions(draw, densities=(0.05, 0.1, 0.2, 0.3)):
    params = GenParams(
        num_states=draw(st.integers(2, 24)),
        num_vars=draw(st.integers(1, 3)),
        domain_size=draw(st.integers(2, 3)),
        edge_density=draw(st.sampled_from(densities)),
        invisible_fraction=draw(st.sampled_from([0.5, 1.0])),
        seed=draw(st.integers(0, 2**32 - 1)),
    )
    model = generate_model(params)
    return model, make_abstraction(model, suggested_invisible(params))


@st.composite
def cases(draw, kind="finite"):
    model, amap = draw(abstractions() if kind == "finite" else abstractions((0.1, 0.2, 0.3)))
    value = draw(st.sampled_from(model.var("grp").domain))
    text = f"AG !(grp={value})" if kind == "finite" else f"GF grp={value}"
    ce = check_property(build_abstract_model(model, amap), Property.parse(text))
    assume(ce is not None)
    return model, amap, ce


@settings(RANDOMIZED, max_examples=500)
@given(cases(), st.sampled_from([1, 4]))
def test_finite_detectors_against_the_oracle(case, workers):
    model, amap, ce = case
    oracle = concretize(model, amap, ce)
    first = check_spurious_first(model, amap, ce)
    heaviest = check_spurious_heaviest(model, amap, ce)
    parallel = check_spurious_parallel(model, amap, ce, workers=workers)
    for report in (first, heaviest, parallel):
        assert report.verdict is first.verdict
        if report.spurious:
            assert not oracle.real
    assert split_path(model, amap, ce).verdict is oracle.verdict
    if oracle.real:
        assert check_witness(model, amap, ce, oracle)


@RANDOMIZED
@given(cases(kind="lasso"))
def test_lasso_split_path_is_exact(case):
    model, amap, ce = case
    oracle = concretize(model, amap, ce)
    assert split_path(model, amap, ce).verdict is oracle.verdict
    if check_spurious_first(model, amap, ce).spurious:
        assert not oracle.real
    if oracle.real:
        assert check_witness(model, amap, ce, oracle)
        # a concrete lasso survives any number of loop unrollings
        for unwind in (1, 2, 3):
            assert split_path(model, amap, ce, unwind).verdict is Verdict.REAL


@RANDOMIZED
@given(cases(), st.data())
def test_failure_is_local(case, data):
    model, amap, ce = case
    view = cfp(ce)
    i = data.draw(st.integers(0, len(ce) - 1))
    touched = set()
    for k in (i - 1, i, i + 1):
        if 0 <= k < len(ce):
            touched |= amap.h_inverse(ce.states[k])
    outside = [s for s in model.state_ids if s not in touched]
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    flips = {(a, b) for a in outside for b in outside if rng.random() < 0.3}
    mutated = model.with_transitions(set(model.transitions) ^ flips)
    for mode in LastMode:
        before, _ = is_failure_state(model, amap, view, i, mode)
        after, _ = is_failure_state(mutated, amap, view, i, mode)
        assert before == after


@RANDOMIZED
@given(cases(), st.sampled_from(list(LastMode)))
def test_heaviest_picks_a_maximal_failure(case, mode):
    model, amap, ce = case
    view = cfp(ce)
    failures = [i for i in range(len(ce)) if is_failure_state(model, amap, view, i, mode)[0]]
    assume(len(failures) >= 2)
    weights = position_weights(model, amap, view)
    best = max(weights[i].weight for i in failures)
    report = check_spurious_heaviest(model, amap, ce, mode)
    assert report.failure_index == min(i for i in failures if weights[i].weight == best)


@RANDOMIZED
@given(cases(), st.sampled_from(list(LastMode)))
def test_fixpoint_stages_bounded_by_fiber(case, mode):
    model, amap, ce = case
    view = cfp(ce)
    for i in range(len(ce)):
        fiber = len(amap.h_inverse(ce.states[i]))
        assert len(in_set(model, amap, view, i).stages) <= fiber
        assert len(out_set(model, amap, view, i, mode).stages) <= fiber


@RANDOMIZED
@given(cases(), st.sampled_from(list(LastMode)))
def test_parallel_is_deterministic_with_barrier(case, mode):
    model, amap, ce = case
    first = check_spurious_parallel(model, amap, ce, mode, ParallelMode.FIRST_DETECTED, workers=4, barrier=True)
    heaviest = check_spurious_parallel(model, amap, ce, mode, ParallelMode.HEAVIEST, workers=4)
    assert first.failure_index == check_spurious_first(model, amap, ce, mode).failure_index
    assert heaviest.failure_index == check_spurious_heaviest(model, amap, ce, mode).failure_index


def _distances(initial, successors):
    """Number of states on a shortest path from an initial state, for every reachable state."""
    dist = {s: 1 for s in initial}
    queue = deque(sorted(initial))
    while queue:
        node = queue.popleft()
        for t in successors(node):
            if t not in dist:
                dist[t] = dist[node] + 1
                queue.append(t)
    return dist


def _reachable(model):
    return set(_distances(model.initial, model.successors))


def _avoiding_cycle(initial, successors, good):
    """True when some reachable ¬good state returns to itself through ¬good states only."""
    for start in _distances(initial, successors):
        if good[start]:
            continue
        seen = set()
        stack = [t for t in successors(start) if not good[t]]
        while stack:
            node = stack.pop()
            if node == start:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(t for t in successors(node) if not good[t])
    return False


def _abstract_case(model, amap, text):
    abstract = build_abstract_model(model, amap)
    prop = Property.parse(text)
    good = {s: prop.formula.holds(abstract.label(s)) for s in abstract.states}
    return abstract, prop, good


def _assert_progress(result, initial_size):
    size = initial_size
    for it in result.trace:
        if it.step is not None:
            assert len(it.step.amap) > size
            size = len(it.step.amap)
    assert len(result.amap) == size


@RANDOMIZED
@given(abstractions())
def test_generated_models_round_trip(drawn):
    model, _ = drawn
    assert parse_model(render_model(model)) == model


@RANDOMIZED
@given(abstractions(), st.integers(0, 2))
def test_invariant_counterexamples_are_shortest(drawn, pick):
    model, amap = drawn
    domain = model.var("grp").domain
    abstract, prop, good = _abstract_case(model, amap, f"AG !(grp={domain[pick % len(domain)]})")
    dist = _distances(abstract.initial, abstract.successors)
    violations = [d for s, d in dist.items() if not good[s]]
    ce = check_property(abstract, prop)
    if ce is None:
        assert not violations
        return
    validate_counterexample(abstract, ce)
    assert not ce.is_lasso
    assert len(ce) == min(violations)
    assert not good[ce.states[-1]]
    assert all(good[s] for s in ce.states[:-1])


@RANDOMIZED
@given(abstractions(), st.integers(0, 2))
def test_recurrence_counterexamples_match_cycle_search(drawn, pick):
    model, amap = drawn
    domain = model.var("grp").domain
    abstract, prop, good = _abstract_case(model, amap, f"GF grp={domain[pick % len(domain)]}")
    ce = check_property(abstract, prop)
    assert (ce is not None) == _avoiding_cycle(abstract.initial, abstract.successors, good)
    if ce is not None:
        validate_counterexample(abstract, ce)
        assert ce.is_lasso
        assert not any(good[s] for s in ce.states[ce.loop_start:])


@settings(RANDOMIZED, max_examples=100)
@given(cases(), st.sampled_from(["first", "heaviest", "splitpath"]), st.sampled_from(list(LastMode)))
def test_cegar_terminates_soundly(case, detector, mode):
    model, amap, ce = case
    value = model.state(min(_reachable(model))).value("grp")
    prop = Property.parse(f"AG !(grp={value})")
    options = AnalysisOptions(detector=detector, last_mode=mode, max_iterations=len(model.states) + 1)
    result = cegar(model, amap.invisible, prop, options)
    assert result.outcome is Outcome.REAL_COUNTEREXAMPLE
    assert check_witness(model, result.amap, result.counterexample, result.witness, prop)
    _assert_progress(result, len(amap))


@settings(RANDOMIZED, max_examples=100)
@given(cases())
def test_verified_means_unreachable(case):
    model, amap, ce = case
    reachable_groups = {model.state(s).value("grp") for s in _reachable(model)}
    missing = [v for v in model.var("grp").domain if v not in reachable_groups]
    assume(missing)
    prop = Property.parse(f"AG !(grp={missing[0]})")
    result = cegar(model, amap.invisible, prop, AnalysisOptions(max_iterations=len(model.states) + 1))
    assert result.outcome is Outcome.VERIFIED
    _assert_progress(result, len(amap))


@settings(RANDOMIZED, max_examples=100)
@given(
    abstractions((0.1, 0.2, 0.3)),
    st.integers(0, 2),
    st.sampled_from(["first", "heaviest", "splitpath"]),
    st.sampled_from(list(LastMode)),
)
def test_cegar_decides_recurrence(drawn, pick, detector, mode):
    model, amap = drawn
    domain = model.var("grp").domain
    prop = Property.parse(f"GF grp={domain[pick % len(domain)]}")
    good = {s.id: prop.formula.holds(s.as_dict()) for s in model.states}
    violated = _avoiding_cycle(model.initial, model.successors, good)
    options = AnalysisOptions(detector=detector, last_mode=mode, max_iterations=len(model.states) + 1)
    result = cegar(model, amap.invisible, prop, options)
    _assert_progress(result, len(amap))
    if violated:
        assert result.outcome is Outcome.REAL_COUNTEREXAMPLE
        assert check_witness(model, result.amap, result.counterexample, result.witness, prop)
    else:
        assert result.outcome is Outcome.VERIFIED
