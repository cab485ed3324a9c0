"""Generalization-based similarity: types built only from formulas (exists z)(y = s(z))."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .evaluator import eval_term
from .structures import StructurePair
from .syntax import Y, Bounds, Eq, Exists, Signature, Term, Var, term_key, term_vars
from .typelab import MAX_FORMULAS, ResourceLimitError, TypeUniverse, build_terms


@dataclass(frozen=True)
class GFormula:
    term: Term
    formula: object


def enumerate_terms(sig: Signature, t: int, v: int, max_terms: int = MAX_FORMULAS) -> list[Term]:
    """Terms of depth <= t over z1..zv whose variables first occur in the order z1, z2, ..."""
    pool = [f"z{i}" for i in range(1, v + 1)]
    out = []
    for s in build_terms(sig, pool, t):
        used = term_vars(s)
        if used != tuple(pool[: len(used)]):
            continue
        out.append(s)
        if len(out) > max_terms:
            raise ResourceLimitError(f"term cap of {max_terms} exceeded")
    return sorted(out, key=term_key)


def gformula_of(s: Term) -> GFormula:
    """(exists z1)...(exists zk)(y = s) over exactly the variables of ``s``."""
    variables = term_vars(s)
    if Y in variables:
        raise ValueError("a generating term must not mention y")
    phi = Eq(Var(Y), s)
    for z in reversed(variables):
        phi = Exists(z, phi)
    return GFormula(s, phi)


def is_gformula(phi) -> Term | None:
    """The generating term if ``phi`` has g-formula shape (either equation orientation)."""
    bound = []
    while isinstance(phi, Exists):
        bound.append(phi.var)
        phi = phi.body
    if not isinstance(phi, Eq) or not phi.positive or len(set(bound)) != len(bound):
        return None
    if phi.lhs == Var(Y):
        s = phi.rhs
    elif phi.rhs == Var(Y):
        s = phi.lhs
    else:
        return None
    used = term_vars(s)
    if Y in used or set(used) != set(bound):
        return None
    return s


def term_image(A, s: Term) -> frozenset[str]:
    variables = term_vars(s)
    return frozenset(eval_term(A, s, dict(zip(variables, row))) for row in itertools.product(A.domain, repeat=len(variables)))


def g_universe(pair: StructurePair, bounds: Bounds | None = None, max_formulas: int | None = None) -> TypeUniverse:
    """g-type classes: term images in both structures, terms of depth <= t in v-1 variables."""
    bounds = bounds or Bounds()
    terms = enumerate_terms(pair.left.sig, bounds.t, bounds.v - 1, max_formulas or MAX_FORMULAS)
    ext_l, ext_r, wit = [], [], []
    seen = set()
    for s in terms:
        il, ir = term_image(pair.left, s), term_image(pair.right, s)
        key = (
            sum(1 << k for k, a in enumerate(pair.left.domain) if a in il),
            sum(1 << k for k, b in enumerate(pair.right.domain) if b in ir),
        )
        if key in seen:
            continue
        seen.add(key)
        ext_l.append(key[0])
        ext_r.append(key[1])
        wit.append(gformula_of(s).formula)
    return TypeUniverse(pair, bounds, "g-terms", ext_l, ext_r, wit.__getitem__, fragment="g")


def g_lesssim(pair: StructurePair, a: str, b: str, bounds: Bounds | None = None, **kw):
    from .similarity import lesssim

    return lesssim(pair, a, b, bounds, fragment="g", **kw)


def g_approx(pair: StructurePair, a: str, b: str, bounds: Bounds | None = None, **kw):
    """``(A,B) |= a ~~_g b``."""
    from .similarity import approx

    return approx(pair, a, b, bounds, fragment="g", **kw)
