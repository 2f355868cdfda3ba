"""Formula algebra: connectives, measures, decompositions."""

from hypothesis import given, strategies as st

from lax import (
    BOT,
    TOP,
    Atom,
    Bot,
    Conj,
    Disj,
    Impl,
    Top,
    complexity,
    neg,
    parse_formula,
    prime_factors,
    proper_subformulas,
    show_formula,
    subformulas,
)

atoms = st.sampled_from([Atom("A"), Atom("B"), Atom("C"), Atom("P1"), TOP, BOT])
formulas = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.builds(Impl, sub, sub),
        st.builds(Conj, sub, sub),
        st.builds(Disj, sub, sub),
    ),
    max_leaves=12,
)


def test_negation_is_implication_into_absurdity():
    a = Atom("A")
    assert neg(a) == Impl(a, Bot())
    assert neg(neg(a)) == Impl(Impl(a, Bot()), Bot())


def test_complexity_counts_connectives():
    a, b = Atom("A"), Atom("B")
    assert complexity(a) == 0
    assert complexity(TOP) == 0
    assert complexity(Impl(a, b)) == 1
    assert complexity(Disj(Conj(a, b), Impl(a, BOT))) == 3


def test_constants_are_singletons_by_equality():
    assert Top() == TOP
    assert Bot() == BOT
    assert Top() != Bot()
    assert Atom("A") != Atom("B")


@given(formulas)
def test_subformulas_contains_self_and_is_transitively_closed(f):
    subs = subformulas(f)
    assert f in subs
    for g in subs:
        assert subformulas(g) <= subs


@given(formulas)
def test_proper_subformulas_drops_exactly_self(f):
    assert proper_subformulas(f) == subformulas(f) - {f}


@given(formulas)
def test_complexity_strictly_dominates_subformulas(f):
    for g in proper_subformulas(f):
        assert complexity(g) < complexity(f)


@given(formulas)
def test_prime_factors_multiply_back(f):
    """Factors are conjunction-free and joining them restores the formula
    up to reassociation (right-nesting)."""
    factors = prime_factors(f)
    assert factors
    for g in factors:
        assert not isinstance(g, Conj)
    rebuilt = factors[-1]
    for g in reversed(factors[:-1]):
        rebuilt = Conj(g, rebuilt)
    assert prime_factors(rebuilt) == factors


@given(formulas)
def test_show_parse_round_trip(f):
    assert parse_formula(show_formula(f)) == f


def test_show_formula_precedence():
    a, b, c = Atom("A"), Atom("B"), Atom("C")
    assert show_formula(Impl(a, Impl(b, c))) == "A -> B -> C"
    assert show_formula(Impl(Impl(a, b), c)) == "(A -> B) -> C"
    assert show_formula(Conj(a, Disj(b, c))) == "A /\\ (B \\/ C)"
    assert show_formula(Disj(Conj(a, b), c)) == "A /\\ B \\/ C"


def test_parse_formula_sugar():
    assert parse_formula("~A") == neg(Atom("A"))
    assert parse_formula("~~A") == neg(neg(Atom("A")))
    assert parse_formula("A /\\ B -> Bot") == Impl(Conj(Atom("A"), Atom("B")), BOT)
    assert parse_formula("A \\/ Top") == Disj(Atom("A"), TOP)
