"""Single-step reduction: values, complexity measures, discovery, contraction."""

import pytest
from hypothesis import given, settings, strategies as st

from lax import (
    Atom,
    Bot,
    Chan,
    GenConfig,
    Impl,
    InvalidRedex,
    NotSimplyTyped,
    RedexKind,
    TypingContext,
    alpha_eq,
    check,
    find_redexes,
    generate,
    height,
    is_parallel_form,
    is_value,
    parse_term,
    session_comm_complexity,
    show_term,
    step,
    value_complexity,
)
from lax.rewrite import GROUP1, GROUP2

from oracles import brute_force_redexes, value_complexity_oracle

A, B, C, Z, V = Atom("A"), Atom("B"), Atom("C"), Atom("Z"), Atom("V0")


def _typed(src, gamma=None):
    gamma = dict(gamma or {})
    t, _ = check(parse_term(src, gamma), TypingContext(ivars=gamma))
    return t


def _step_rule(t, rule):
    matches = [r for r in find_redexes(t) if rule in r.rule]
    assert matches, f"no {rule} redex in {show_term(t)}"
    return step(t, matches[0])


def _eq(t, src, gamma=None):
    return alpha_eq(t, _typed(src, gamma))


# --------------------------------------------------------------------------
# values

def test_value_witnesses():
    from lax import Disj

    assert is_value(_typed("\\x : A. x"))
    assert is_value(_typed("inj0[A \\/ B](x)", {"x": A}))
    assert is_value(_typed("efq[A](z)", {"z": Bot()}))
    assert is_value(_typed("case s of {u. u | w. w}", {"s": Disj(A, A)}))


def test_non_values():
    assert not is_value(_typed("tt"))
    assert not is_value(_typed("x", {"x": A}))
    assert not is_value(_typed("f x", {"f": Impl(A, B), "x": A}))
    assert not is_value(_typed("<x, y>", {"x": A, "y": B}))


def test_tuple_with_one_witness_is_a_value():
    assert is_value(_typed("<x, \\y : A. y>", {"x": A}))
    assert is_value(_typed("<\\y : A. y, x>", {"x": A}))


def test_active_channel_spine_is_a_value():
    t = Chan("a", ty=Impl(A, B), active=True)
    assert is_value(t)
    assert not is_value(Chan("a", ty=Impl(A, B), active=False))


def test_value_complexity_of_abstractions_and_injections():
    assert value_complexity(_typed("\\x : A. x")) == 1  # A -> A
    assert value_complexity(_typed("\\x : A. \\y : B. x")) == 2
    assert value_complexity(_typed("inj0[A \\/ B](x)", {"x": A})) == 1
    assert value_complexity(_typed("x", {"x": A})) == 0
    assert value_complexity(_typed("f x", {"f": Impl(A, B), "x": A})) == 0


def test_value_complexity_of_pairs_takes_the_max():
    t = _typed("<\\x : A. \\y : B. x, \\x : A. x>")
    assert value_complexity(t) == 2


def test_value_complexity_pushes_stacks_into_case_branches():
    from lax import Disj

    gamma = {"s": Disj(A, A), "z": A}
    src = "(case s of {u. \\x : A. \\y : A. u | w. \\x : A. \\y : A. w}) z"
    t = _typed(src, gamma)
    # the pushed stack turns each branch into an application, which is
    # no exposed abstraction, so the whole term measures 0
    assert value_complexity(t) == 0
    u = _typed("case s of {u. \\x : A. \\y : A. u | w. \\x : A. \\y : A. w}", gamma)
    assert value_complexity(u) == 2


def test_value_complexity_refuses_parallel_terms():
    t = _typed("x |+| y", {"x": A, "y": A})
    with pytest.raises(NotSimplyTyped):
        value_complexity(t)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_value_complexity_matches_the_oracle(seed):
    _, t = generate(seed, GenConfig(preset=None, max_size=18))
    assert value_complexity(t) == value_complexity_oracle(t)


# --------------------------------------------------------------------------
# discovery

def test_redexes_come_out_in_preorder():
    from lax import Disj

    gamma = {"x": A, "s": Disj(A, A)}
    t = _typed("<(\\y : A. y) x, (case s of {u. u | w. w}) |+| x>", gamma)
    rs = find_redexes(t)
    assert [r.position for r in rs] == sorted(r.position for r in rs)
    assert {r.kind for r in rs} >= {RedexKind.BETA, RedexKind.PAR_PERM}


def test_groups():
    gamma = {"x": A, "y": B}
    beta = find_redexes(_typed("(\\u : A. u) x", gamma))[0]
    assert beta.group == GROUP1
    proj = find_redexes(_typed("<x, y> pi0", gamma))[0]
    assert proj.group == GROUP2


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 10**9),
    st.sampled_from(["em", "em3", "c3", "g2", "godel", None]),
    st.booleans(),
)
def test_discovery_matches_the_brute_force_matcher(seed, preset, discipline):
    _, t = generate(seed, GenConfig(preset=preset, max_size=14))
    got = {(r.rule, r.position) for r in find_redexes(t, discipline)}
    assert got == brute_force_redexes(t, discipline)


def test_discipline_restricts_senders_to_the_marked_component():
    src = "nu a* : AX{A -> B, B -> A}. [ @f (a x) || g (a y) ]"
    gamma = {"f": Impl(B, C), "g": Impl(A, C), "x": A, "y": B}
    t = _typed(src, gamma)
    free = {r.rule for r in find_redexes(t, False)}
    tight = {r.rule for r in find_redexes(t, True)}
    assert "BasicCross(1,0)" in free
    assert tight == {"BasicCross(0,1)", "FullCross"}


# --------------------------------------------------------------------------
# intuitionistic steps

def test_beta():
    t = _typed("(\\x : A. <x, x>) y", {"y": A})
    assert _eq(_step_rule(t, "Beta"), "<y, y>", {"y": A})


def test_proj_pair():
    t = _typed("<x, y> pi1", {"x": A, "y": B})
    assert _eq(_step_rule(t, "ProjPair"), "y", {"y": B})


def test_case_inj():
    gamma = {"f": Impl(A, B), "x": A, "y": B}
    t = _typed("case inj0[A \\/ C](x) of {u. f u | w. y}", gamma)
    assert _eq(_step_rule(t, "CaseInj"), "f x", gamma)


def test_case_perm_pushes_one_frame():
    from lax import Disj

    gamma = {"s": Disj(A, A), "f": Impl(A, B), "g": Impl(A, B), "z": A}
    t = _typed("(case s of {u. f | w. g}) z", gamma)
    out = _step_rule(t, "CasePerm")
    assert _eq(out, "case s of {u. f z | w. g z}", gamma)


# --------------------------------------------------------------------------
# permutations around parallel nodes

def test_par_perm_lambda():
    t = _typed("\\x : A. (u |+| v)", {"u": B, "v": B})
    assert _eq(_step_rule(t, "ParPerm"), "(\\x : A. u) |+| (\\x : A. v)", {"u": B, "v": B})


def test_par_perm_stack_pushes_into_every_component():
    gamma = {"x": A, "g": Impl(A, Impl(A, B)), "y": A}
    t = _typed("(nu a : EM[A]. [ \\w : A. efq[B](nota x) || g a ]) y", gamma)
    out = _step_rule(t, "ParPerm")
    assert _eq(out, "nu a : EM[A]. [ (\\w : A. efq[B](nota x)) y || g a y ]", gamma)


def test_par_perm_pair_and_injection():
    gamma = {"u": A, "v": A, "y": B}
    t = _typed("<u |+| v, y>", gamma)
    assert _eq(_step_rule(t, "ParPerm"), "<u, y> |+| <v, y>", gamma)
    t2 = _typed("inj0[A \\/ B](u |+| v)", gamma)
    assert _eq(_step_rule(t2, "ParPerm"), "inj0[A \\/ B](u) |+| inj0[A \\/ B](v)", gamma)


def test_par_par_perm_duplicates_the_session_around_the_inner_node():
    gamma = {"x": A, "u": B, "v": B}
    t = _typed("nu a* : EM[A]. [ efq[B](nota x) || (u |+| v) ]", gamma)
    out = _step_rule(t, "ParParPerm")
    want = "nu a* : EM[A]. [ efq[B](nota x) || u ] |+| nu a* : EM[A]. [ efq[B](nota x) || v ]"
    assert _eq(out, want, gamma)


def test_par_par_perm_keeps_marks_on_their_components():
    gamma = {"f": Impl(B, C), "g": Impl(A, Z), "x": A, "y": B, "h": Impl(Z, C)}
    src = ("nu a* : AX{A -> B, B -> A}. "
           "[ f (a x) || nu c : EM[Z]. [ @efq[C](notc (g (a y))) || h c ] ]")
    out = _step_rule(_typed(src, gamma), "ParParPerm")
    want = ("nu c : EM[Z]. [ nu a* : AX{A -> B, B -> A}. [ f (a x) || @efq[C](notc (g (a y))) ] "
            "|| nu a* : AX{A -> B, B -> A}. [ f (a x) || h c ] ]")
    assert _eq(out, want, gamma)


# --------------------------------------------------------------------------
# communications

def test_activation_freshens_and_wakes_the_binder():
    gamma = {"f": Impl(Z, B), "y": Z}
    t = _typed("nu a : EM[Z -> Z]. [ efq[B](nota (\\z : Z. z)) || f (a y) ]", gamma)
    out = _step_rule(t, "Activation")
    assert out.active
    assert _eq(out, "nu a* : EM[Z -> Z]. [ efq[B](nota (\\z : Z. z)) || f (a y) ]", gamma)


def test_no_activation_without_an_applied_value():
    gamma = {"f": Impl(Z, B), "y": Z, "x": Impl(Z, Z)}
    t = _typed("nu a : EM[Z -> Z]. [ efq[B](nota x) || f (a y) ]", gamma)
    assert not [r for r in find_redexes(t) if r.kind == RedexKind.ACTIVATION]


def test_em_basic_cross_collapses_to_the_receiver():
    gamma = {"f": Impl(Z, B), "y": Z}
    t = _typed("nu a* : EM[Z -> Z]. [ efq[B](nota (\\z : Z. z)) || f (a y) ]", gamma)
    out = _step_rule(t, "BasicCross")
    assert _eq(out, "f ((\\z : Z. z) y)", gamma)


def test_general_basic_cross_feeds_the_receiver_and_keeps_the_sender():
    gamma = {"f": Impl(B, C), "g": Impl(A, C), "x": A, "y": B}
    t = _typed("nu a* : AX{A -> B, B -> A}. [ f (a x) || g (a y) ]", gamma)
    out01 = _step_rule(t, "BasicCross(0,1)")
    assert _eq(out01, "nu a* : AX{A -> B, B -> A}. [ f (a x) || g x ]", gamma)
    out10 = _step_rule(t, "BasicCross(1,0)")
    assert _eq(out10, "nu a* : AX{A -> B, B -> A}. [ f y || g (a y) ]", gamma)


def test_full_cross_mints_a_channel_for_the_captured_variables():
    gamma = {"h": Impl(Impl(Z, V), B), "f": Impl(Z, B), "w": Z}
    src = "nu a* : EM[Z -> Z]. [ h (\\y : Z. efq[V0](nota (\\q : Z. y))) || f (a w) ]"
    t = _typed(src, gamma)
    out = _step_rule(t, "FullCross")
    want = ("nu b : EM[Z]. [ nu a* : EM[Z -> Z]. [ h (\\y : Z. efq[V0](notb y)) || f (a w) ] "
            "|| f ((\\q : Z. b) w) ]")
    assert _eq(out, want, gamma)


def test_broadcast_cross_contracts_the_receivers():
    gamma = {"f": Impl(Z, B), "y": Z, "w": Z}
    src = "nu a* : EMN[Z -> Z; 2]. [ efq[B](nota (\\z : Z. z)) || f (a y) || f (a w) ]"
    out = _step_rule(_typed(src, gamma), "BroadcastCross")
    assert _eq(out, "f ((\\z : Z. z) y) |+| f ((\\z : Z. z) w)", gamma)


def test_garbage_cross_contracts_the_survivors():
    gamma = {"x0": B, "x1": B}
    t = _typed("nu a : EM[A]. [ x0 || x1 ]", gamma)
    out = _step_rule(t, "GarbageCross")
    assert _eq(out, "x0 |+| x1", gamma)


def test_session_comm_complexity_is_the_best_message():
    gamma = {"f": Impl(Z, B), "y": Z}
    t = _typed("nu a : EM[Z -> Z]. [ efq[B](nota (\\z : Z. z)) || f (a y) ]", gamma)
    assert session_comm_complexity(t) == 1  # the identity at Z -> Z
    u = _typed("nu a : EM[Z -> Z]. [ efq[B](nota x) || f (a y) ]",
               {**gamma, "x": Impl(Z, Z)})
    assert session_comm_complexity(u) == 0


# --------------------------------------------------------------------------
# stepping errors and shapes

def test_step_rejects_a_stale_redex():
    gamma = {"y": A}
    t = _typed("(\\x : A. x) y", gamma)
    r = find_redexes(t)[0]
    done = step(t, r)
    with pytest.raises(InvalidRedex):
        step(done, r)


def test_parallel_form_and_height():
    gamma = {"x0": B, "x1": B, "x": A}
    flat = _typed("x0", gamma)
    assert is_parallel_form(flat) and height(flat) == 0
    sess = _typed("nu a : EM[A]. [ efq[B](nota x) || x0 ]", gamma)
    assert is_parallel_form(sess) and height(sess) == 1
    deep = _typed("nu a : EM[A]. [ efq[B](nota x) || (x0 |+| x1) ]", gamma)
    assert is_parallel_form(deep) and height(deep) == 2
    not_pf = _typed("\\w : A. (x0 |+| x1)", gamma)
    assert not is_parallel_form(not_pf)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(["em", "c3", "godel"]))
def test_every_discovered_redex_actually_steps(seed, preset):
    """step() accepts exactly what find_redexes discovered, and the result
    differs from the input except for bare activations."""
    _, t = generate(seed, GenConfig(preset=preset, max_size=16))
    for r in find_redexes(t):
        out = step(t, r)
        assert out is not None
