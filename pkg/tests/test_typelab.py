import pytest
from hypothesis import given, settings, strategies as st

from conftest import pair_of
from typesim.evaluator import extension_table
from typesim.explorer import brute_force_universe, random_structure
from typesim.parser import parse_formula
from typesim.structures import StructurePair, relabel
from typesim.syntax import Bounds, Eq, Signature, Var, format_formula, free_vars, quantifier_depth
from typesim.typelab import (
    ResourceLimitError, closure_fingerprints, ctype, enum_fingerprints, enumerate_formulas, shared_type,
    type_included, type_universe,
)

F = Signature.of({"f": 1})
R2 = Signature.of(relations={"R": 2})


def _texts(formulas):
    return {format_formula(p) for p in formulas}


def test_enumeration_literals_only():
    got = _texts(enumerate_formulas(F, Bounds(0, 1, 1, 1)))
    assert got == {"y = y", "y != y", "f(y) = y", "f(y) != y", "f(y) = f(y)", "f(y) != f(y)"}


def test_enumeration_trivial_bounds():
    assert _texts(enumerate_formulas(F, Bounds(0, 0, 0, 1))) == {"y = y", "y != y"}


def test_enumeration_quantified_relation_formulas():
    got = _texts(enumerate_formulas(R2, Bounds(1, 1, 0, 2)))
    for text in ("(exists z1)(R(y,z1))", "(exists z1)(R(z1,y))", "(forall z1)(R(y,z1))", "(forall z1)(~R(z1,y))",
                 "R(y,y)", "~R(y,y)", "y = y"):
        assert text in got


def test_enumeration_respects_bounds():
    b = Bounds(2, 2, 1, 2)
    for phi in enumerate_formulas(F, Bounds(1, 1, 1, 3)):
        assert free_vars(phi) == {"y"}
        assert quantifier_depth(phi) <= 1
    assert len(enumerate_formulas(F, Bounds(1, 1, 1, 2))) <= len(enumerate_formulas(F, Bounds(1, 1, 2, 2)))
    assert b.q == 2


def test_enumeration_resource_guard():
    with pytest.raises(ResourceLimitError):
        enumerate_formulas(F, Bounds(2, 2, 1, 2), max_formulas=100)


def test_ctype_hom(hom):
    pair = pair_of(hom, "A", "B")
    b = Bounds(0, 2, 1, 2)
    fixed = parse_formula("f(y) = y", F)
    assert fixed in ctype(pair, "b", "left", b)
    assert fixed not in ctype(pair, "a", "left", b)


def test_ctype_tri(tri):
    pair = pair_of(tri, "A", "C")
    view = ctype(pair, "a", "left", Bounds(1, 2, 0, 2))
    assert parse_formula("(exists z)(R(y,z))", R2) in view
    assert parse_formula("(exists z)(R(z,y))", R2) not in view


def test_shared_type_tri(tri):
    view = shared_type(pair_of(tri, "A", "B"), "a", "b", Bounds(1, 2, 0, 2))
    assert parse_formula("(exists z)(R(y,z))", R2) in view
    assert parse_formula("~R(y,y)", R2) in view
    assert parse_formula("(exists z)(R(z,y))", R2) not in view


def test_shared_type_symmetry(tri, chain):
    for sf, l, r in ((tri, "A", "C"), (chain, "A", "B")):
        pair = pair_of(sf, l, r)
        for a in pair.left.domain:
            for b in pair.right.domain:
                fwd = shared_type(pair, a, b)
                bwd = shared_type(pair.swapped(), b, a)
                assert {(fp.left.rows, fp.right.rows) for fp in fwd.fingerprints} == \
                       {(fp.right.rows, fp.left.rows) for fp in bwd.fingerprints}


def test_shared_type_of_element_with_itself(chain):
    A = chain["A"]
    pair = StructurePair(A, A)
    for a in A.domain:
        assert shared_type(pair, a, a).mask == ctype(pair, a).mask


def test_closure_on_single_point(hom):
    B = hom["B"]
    fps = closure_fingerprints(StructurePair(B, B), Bounds(0, 2, 1, 1))
    assert {(fp.left.rows, fp.right.rows) for fp in fps} == {(frozenset(), frozenset()), (frozenset({("c",)}),) * 2}


def test_closure_chain_contains_double_step(chain):
    pair = pair_of(chain, "A", "B")
    u = type_universe(pair, Bounds(2, 2, 2, 2), "closure")
    target = (0b110, 0b101)  # left {1,2}, right {0,2}
    hits = [i for i in range(len(u)) if (u.ext_left[i], u.ext_right[i]) == target]
    assert hits
    phi = parse_formula("f(f(y)) = f(y)", F)
    assert extension_table(pair.left, phi, ["y"]).column("y") == {"1", "2"}
    assert extension_table(pair.right, phi, ["y"]).column("y") == {"0", "2"}


def _full_tables(fps):
    return {(fp.left.rows, fp.right.rows) for fp in fps}


@pytest.mark.parametrize("sig,t", [(F, 1), (R2, 0)])
def test_closure_contains_enumeration(sig, t):
    for seed in range(6):
        pair = StructurePair(random_structure(sig, 3, seed, "A"), random_structure(sig, 2, seed + 50, "B"), identity=False)
        clo = _full_tables(closure_fingerprints(pair, Bounds(0, 2, t, 2)))
        for q in (0, 1, 2):
            assert _full_tables(enum_fingerprints(pair, Bounds(q, 2, t, 2))) <= clo


@pytest.mark.parametrize("engine", ["enum", "closure"])
def test_fingerprint_soundness(samples, engine):
    for name, l, r in (("tri", "A", "C"), ("hom", "A", "B"), ("chain", "A", "B")):
        pair = pair_of(samples[name], l, r)
        fps = enum_fingerprints(pair) if engine == "enum" else closure_fingerprints(pair)
        for fp in fps:
            assert extension_table(pair.left, fp.witness, fp.context).rows == fp.left.rows
            assert extension_table(pair.right, fp.witness, fp.context).rows == fp.right.rows


@pytest.mark.parametrize("engine", ["enum", "closure"])
def test_universe_witnesses_are_sound(samples, engine):
    pair = pair_of(samples["chain"], "A", "B")
    u = type_universe(pair, Bounds(), engine)
    for i in range(len(u)):
        phi = u.witness(i)
        assert free_vars(phi) <= {"y"}
        left = extension_table(pair.left, phi, ["y"]).column("y")
        assert left == {a for k, a in enumerate(pair.left.domain) if u.ext_left[i] >> k & 1}


@pytest.mark.parametrize("sig,bounds", [
    (F, Bounds(1, 1, 1, 2)), (R2, Bounds(1, 1, 0, 2)), (F, Bounds(1, 1, 2, 2)), (R2, Bounds(1, 1, 0, 3)),
])
def test_enum_agrees_with_brute_force(sig, bounds):
    for seed in range(8):
        pair = StructurePair(random_structure(sig, 3, seed, "A"), random_structure(sig, 2, seed + 9, "B"), identity=False)
        oracle = brute_force_universe(pair, bounds)
        u = type_universe(pair, bounds, "enum")
        assert set(zip(u.ext_left, u.ext_right)) == set(zip(oracle.ext_left, oracle.ext_right))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6), st.sampled_from([F, R2]))
def test_types_grow_with_bounds(n, seed, sig):
    A = random_structure(sig, n, seed, "A")
    pair = StructurePair(A, A)
    small, big = Bounds(1, 1, 0, 2), Bounds(2, 2, 1, 2)
    us, ub = type_universe(pair, small), type_universe(pair, big)
    classes = set(zip(ub.ext_left, ub.ext_right))
    assert set(zip(us.ext_left, us.ext_right)) <= classes
    for a in A.domain:
        for b in A.domain:
            if type_included(ub, a, b):
                assert type_included(us, a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6), st.sampled_from([F, R2]), st.randoms(use_true_random=False))
def test_isomorphic_elements_have_equal_types(n, seed, sig, rng):
    A = random_structure(sig, n, seed, "A")
    target = [f"x{i}" for i in range(n)]
    rng.shuffle(target)
    B, m = relabel(A, dict(zip(A.domain, target)), "B")
    u = type_universe(StructurePair(A, B))
    for a in A.domain:
        assert u.type_left[A.index[a]] == u.type_right[B.index[m(a)]]


def test_element_params_add_constants(chain):
    pair = pair_of(chain, "A", "B")
    plain = type_universe(pair, Bounds(0, 1, 1, 1))
    params = type_universe(pair, Bounds(0, 1, 1, 1), element_params=True)
    assert len(params) > len(plain)
    mentioned = [format_formula(params.witness(i)) for i in range(len(params))]
    assert any("#" in text for text in mentioned)


def test_swapped_universe_is_cached_and_consistent(tri):
    pair = pair_of(tri, "A", "C")
    u = type_universe(pair)
    w = type_universe(pair.swapped())
    assert (w.ext_left, w.ext_right) == (u.ext_right, u.ext_left)
    fresh = type_universe(pair.swapped(), cache=False)
    assert set(zip(fresh.ext_left, fresh.ext_right)) == set(zip(w.ext_left, w.ext_right))


def test_eq_equation_canonical():
    assert format_formula(Eq(Var("y"), Var("y"))) == "y = y"
