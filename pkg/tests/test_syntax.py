import pytest
from hypothesis import given, settings, strategies as st

from typesim.parser import parse_fo, parse_formula, parse_term
from typesim.syntax import (
    And, App, ArityError, Bounds, Eq, Exists, Forall, FormulaSyntaxError, NonConjunctiveError, Rel, Signature,
    UnknownSymbolError, Var, alpha_normalize, conj, display_form, equation, format_formula, format_term, free_vars,
    quantifier_depth, validate_conjunctive,
)

SIG = Signature.of({"f": 1, "*": 2, "e": 0}, {"R": 2, "P": 1})
y, z1, z2 = Var("y"), Var("z1"), Var("z2")


def test_parse_quantified_formula():
    phi = parse_formula("(forall z)(z * y = z)", SIG)
    assert phi == Forall("z", Eq(App("*", (Var("z"), y)), Var("z")))
    assert free_vars(phi) == {"y"}
    assert quantifier_depth(phi) == 1


def test_unicode_and_ascii_agree():
    a = parse_formula("∀z ∃w (R(z,w) ∧ f(y) ≠ w)", SIG)
    b = parse_formula("(forall z)(exists w)(R(z,w) & f(y) != w)", SIG)
    assert a == b


def test_negation_on_atom_becomes_literal():
    assert parse_formula("~R(y,y)", SIG) == Rel("R", (y, y), False)
    assert parse_formula("~(y = f(y))", SIG) == Eq(y, App("f", (y,)), False)


@pytest.mark.parametrize("text,reason", [
    ("P(y) | R(y,y)", "disjunction"),
    ("P(y) -> P(y)", "implication"),
    ("~(P(y) & P(y))", "negation on non-atom"),
])
def test_non_conjunctive_rejected(text, reason):
    with pytest.raises(NonConjunctiveError) as info:
        parse_formula(text, SIG)
    assert any(v.reason == reason for v in info.value.violations)
    report = validate_conjunctive(parse_fo(text, SIG))
    assert not report.ok


@pytest.mark.parametrize("text,exc", [
    ("R(y)", ArityError),
    ("Q(y)", UnknownSymbolError),
    ("(forall z)(R(y,z)", FormulaSyntaxError),
    ("y = ", FormulaSyntaxError),
    ("f(y,y) = y", ArityError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_formula(text, SIG)


def test_parse_error_has_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("P(y) & & P(y)", SIG)
    assert info.value.pos is not None


def test_infix_terms_print_and_reparse():
    t = parse_term("(y * e) * f(y)", SIG)
    assert format_term(t) == "(y * e) * f(y)"
    assert parse_term(format_term(t), SIG) == t


def test_equation_orients_larger_term_left():
    assert format_formula(equation(y, App("f", (y,)))) == "f(y) = y"


def test_conj_flattens_and_dedups():
    p = Rel("P", (y,))
    assert conj(p, conj(p, Rel("R", (y, y)))) == conj(Rel("R", (y, y)), p)


def test_display_form_renames_bound_variables_only():
    phi = Forall("z1", Exists("z2", Rel("R", (z1, z2))))
    assert format_formula(phi, pretty=True) == "(forall z)(exists z')(R(z,z'))"
    free = Rel("R", (z1, y))
    assert display_form(free) == free


def test_alpha_normalize_identifies_renamings():
    a = Exists("w", Rel("R", (y, Var("w"))))
    b = Exists("u", Rel("R", (y, Var("u"))))
    pool = Bounds().pool
    assert alpha_normalize(a, pool) == alpha_normalize(b, pool)


def test_bounds_parse_and_validate():
    b = Bounds.parse("1,2,0,3")
    assert (b.q, b.c, b.t, b.v) == (1, 2, 0, 3)
    assert b.pool == ("y", "z1", "z2")
    assert str(b) == "1,2,0,3"
    with pytest.raises(ValueError):
        Bounds.parse("1,2,3")
    with pytest.raises(ValueError):
        Bounds(q=-1)


# --- random ASTs ------------------------------------------------------------

VARS = ("y", "z1", "z2")
terms = st.recursive(
    st.sampled_from(VARS).map(Var),
    lambda inner: st.one_of(
        inner.map(lambda t: App("f", (t,))),
        st.tuples(inner, inner).map(lambda p: App("*", p)),
    ),
    max_leaves=4,
)
literals = st.one_of(
    st.builds(lambda a, b, pos: Rel("R", (a, b), pos), terms, terms, st.booleans()),
    st.builds(lambda a, b, pos: Eq(a, b, pos), terms, terms, st.booleans()),
)
formulas = st.recursive(
    literals,
    lambda inner: st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda ps: And(tuple(ps))),
        st.builds(Exists, st.sampled_from(VARS[1:]), inner),
        st.builds(Forall, st.sampled_from(VARS[1:]), inner),
    ),
    max_leaves=6,
)


def _qdepth_oracle(phi):
    if isinstance(phi, (Exists, Forall)):
        return 1 + _qdepth_oracle(phi.body)
    if isinstance(phi, And):
        return max(_qdepth_oracle(p) for p in phi.parts)
    return 0


def _vars_of(t):
    return {t.name} if isinstance(t, Var) else set().union(*(_vars_of(a) for a in t.args))


def _free_oracle(phi, bound=frozenset()):
    if isinstance(phi, Rel):
        return set().union(*(_vars_of(a) for a in phi.args)) - bound
    if isinstance(phi, Eq):
        return (_vars_of(phi.lhs) | _vars_of(phi.rhs)) - bound
    if isinstance(phi, And):
        return set().union(*(_free_oracle(p, bound) for p in phi.parts))
    return _free_oracle(phi.body, bound | {phi.var})


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_random_formulas_roundtrip_and_measures(phi):
    assert validate_conjunctive(phi).ok
    text = format_formula(phi)
    back = parse_formula(text, SIG)
    assert format_formula(back) == text
    assert quantifier_depth(phi) == _qdepth_oracle(phi)
    assert free_vars(phi) == _free_oracle(phi)
