"""Run validation: normal forms, subformula checking, trace audits."""

import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from lax import (
    Atom,
    GenConfig,
    Impl,
    NotNormal,
    PropertyReport,
    StepLimitExceeded,
    TypingContext,
    audit_trace,
    check,
    check_parallel_nf_property,
    check_subformula,
    communication_measure,
    generate,
    is_normal,
    normalize,
    parse_term,
    subterm_types,
    subterm_types_by_derivation,
)

A, B, Z = Atom("A"), Atom("B"), Atom("Z")


def _typed(src, gamma=None):
    gamma = dict(gamma or {})
    t, _ = check(parse_term(src, gamma), TypingContext(ivars=gamma))
    return t


def _run(seed, preset="em", size=22):
    gamma, t = generate(seed, GenConfig(preset=preset, max_size=size))
    ctx = TypingContext(ivars=gamma)
    final, trace = normalize(t, max_steps=20_000)
    return ctx, final, trace


# --------------------------------------------------------------------------
# reports

def test_property_report_flips_on_first_witness():
    rep = PropertyReport("demo", True)
    assert rep.holds
    rep.add("here", "because")
    assert not rep.holds
    assert rep.to_json()["witnesses"] == [{"where": "here", "why": "because"}]


def test_is_normal():
    assert is_normal(_typed("x", {"x": A}))
    assert not is_normal(_typed("(\\x : A. x) y", {"y": A}))


def test_parallel_nf_report_is_vacuous_on_non_normal_terms():
    rep = check_parallel_nf_property(_typed("(\\x : A. x) y", {"y": A}))
    assert rep.holds
    assert "not normal" in rep.note


def test_parallel_nf_report_on_an_actual_normal_form():
    ctx, final, _ = _run(7, "c3")
    rep = check_parallel_nf_property(final)
    assert rep.holds and not rep.witnesses and rep.note == ""


# --------------------------------------------------------------------------
# subformula property

def test_check_subformula_requires_a_normal_form():
    gamma = {"y": A}
    with pytest.raises(NotNormal):
        check_subformula(TypingContext(ivars=gamma), _typed("(\\x : A. x) y", gamma))


def test_check_subformula_on_normal_forms():
    for seed, preset in [(3, "em"), (4, "em3"), (5, "c3"), (6, "g2"), (7, "godel")]:
        ctx, final, _ = _run(seed, preset)
        rep = check_subformula(ctx, final)
        assert rep.holds, rep.witnesses


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["em", "em3", "c3", "g2", "godel", None]))
def test_the_two_subterm_typers_agree(seed, preset):
    """A bottom-up reading from the annotations and a top-down derivation
    walk must assign every position the same formula."""
    _, t = generate(seed, GenConfig(preset=preset, max_size=20))
    assert subterm_types(t) == subterm_types_by_derivation(t)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_the_two_subterm_typers_agree_after_reduction(seed):
    _, t = generate(seed, GenConfig(preset="c3", max_size=20))
    final, _ = normalize(t, max_steps=10_000)
    assert subterm_types(final) == subterm_types_by_derivation(final)


# --------------------------------------------------------------------------
# trace audits

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["em", "em3", "c3", "g2", "godel"]))
def test_honest_runs_audit_clean(seed, preset):
    gamma, t = generate(seed, GenConfig(preset=preset, max_size=25))
    ctx = TypingContext(ivars=gamma)
    final, trace = normalize(t, max_steps=20_000)
    rep = audit_trace(ctx, trace)
    assert rep.holds, rep.witnesses


def test_truncated_runs_still_audit_clean():
    gamma, t = generate(99, GenConfig(preset="c3", max_size=35))
    ctx = TypingContext(ivars=gamma)
    try:
        _, trace = normalize(t, max_steps=4)
    except StepLimitExceeded as e:
        trace = e.trace
    rep = audit_trace(ctx, trace)
    assert rep.holds, rep.witnesses


def test_audit_catches_a_tampered_step():
    gamma = {"y": A}
    ctx = TypingContext(ivars=gamma)
    t = _typed("(\\x : A. <x, x>) y", gamma)
    _, trace = normalize(t)
    fake = _typed("<y, y> |+| <y, y>", gamma)
    trace.steps[0] = dataclasses.replace(trace.steps[0], term_after=fake)
    rep = audit_trace(ctx, trace)
    assert not rep.holds
    assert any("replaying" in why for _, why in rep.witnesses)


def test_audit_catches_a_phase_swap():
    gamma = {"f": Impl(Z, B), "y": Z}
    t = _typed("nu a : EM[Z -> Z]. [ efq[B](nota (\\z : Z. z)) || f (a y) ]", gamma)
    ctx = TypingContext(ivars=gamma)
    _, trace = normalize(t)
    # pretend the activation happened in the communication phase and the
    # basic cross before it in the activation phase
    trace.steps[0] = dataclasses.replace(trace.steps[0], phase="Communication")
    trace.steps[1] = dataclasses.replace(trace.steps[1], phase="Activation")
    rep = audit_trace(ctx, trace)
    assert not rep.holds
    assert any("cyclic order" in why for _, why in rep.witnesses)


def test_audit_flags_a_context_that_cannot_type_the_run():
    gamma = {"y": A}
    t = _typed("(\\x : A. x) y", gamma)
    _, trace = normalize(t)
    rep = audit_trace(TypingContext(), trace)  # empty context: y unbound
    assert not rep.holds


def test_audit_can_skip_subject_reduction():
    gamma = {"y": A}
    t = _typed("(\\x : A. x) y", gamma)
    _, trace = normalize(t)
    rep = audit_trace(TypingContext(), trace, check_sr=False)
    assert rep.holds


# --------------------------------------------------------------------------
# the communication measure

def test_measure_of_a_quiet_term_is_empty():
    n, h, g = communication_measure(_typed("x", {"x": A}))
    assert (n, h, g) == (0, {}, {})


def test_measure_sees_uppermost_active_sessions():
    gamma = {"f": Impl(B, Atom("C")), "g": Impl(A, Atom("C")), "x": A, "y": B}
    t = _typed("nu a* : AX{A -> B, B -> A}. [ f (a x) || g (a y) ]", gamma)
    n, h, g = communication_measure(t)
    assert n == 0
    assert h == {}  # nothing parallel buried inside
    assert g == {2: 1}  # one applied occurrence per component


def test_measure_counts_buried_parallel_nodes():
    gamma = {"x": A, "u": B, "v": B}
    t = _typed("nu a* : EM[A]. [ efq[B](nota x) || (u |+| v) ]", gamma)
    n, h, g = communication_measure(t)
    assert n == 0
    assert h == {1: 1}  # one contraction buried in one uppermost session
