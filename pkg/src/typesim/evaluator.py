"""Tarskian model checking for the conjunctive fragment."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .structures import Structure
from .syntax import And, App, Eq, Exists, Forall, Rel, Term, Var, free_vars


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ExtensionTable:
    """Assignments over ``context`` (tuples of labels) under which a formula holds."""

    context: tuple[str, ...]
    rows: frozenset

    def column(self, var: str) -> frozenset:
        i = self.context.index(var)
        return frozenset(r[i] for r in self.rows)

    def sorted_rows(self) -> list[tuple[str, ...]]:
        return sorted(self.rows)


def eval_term(A: Structure, t: Term, asg: Mapping[str, str]) -> str:
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name!r}") from None
    if A.sig.fun_arity(t.symbol) != len(t.args):
        raise EvaluationError(f"symbol {t.symbol!r}/{len(t.args)} is not in the signature of {A.name}")
    return A.apply(t.symbol, *(eval_term(A, a, asg) for a in t.args))


def evaluate(A: Structure, phi, asg: Mapping[str, str]) -> bool:
    """Decide ``A |= phi[asg]``."""
    missing = free_vars(phi) - set(asg)
    if missing:
        raise EvaluationError(f"unbound free variables: {', '.join(sorted(missing))}")
    for label in asg.values():
        if label not in A.index:
            raise EvaluationError(f"{label!r} is not an element of {A.name}")
    return _eval(A, phi, dict(asg), {})


def _eval(A: Structure, phi, asg: dict, memo: dict) -> bool:
    if isinstance(phi, Rel):
        if A.sig.rel_arity(phi.symbol) != len(phi.args):
            raise EvaluationError(f"relation {phi.symbol!r}/{len(phi.args)} is not in the signature of {A.name}")
        vals = tuple(_term(A, a, asg, memo) for a in phi.args)
        return A.holds(phi.symbol, *vals) == phi.positive
    if isinstance(phi, Eq):
        return (_term(A, phi.lhs, asg, memo) == _term(A, phi.rhs, asg, memo)) == phi.positive
    if isinstance(phi, And):
        return all(_eval(A, p, asg, memo) for p in phi.parts)
    if isinstance(phi, (Exists, Forall)):
        old = asg.get(phi.var)
        want = isinstance(phi, Exists)
        result = not want
        for d in A.domain:
            asg[phi.var] = d
            if _eval(A, phi.body, asg, {}) == want:
                result = want
                break
        if old is None:
            del asg[phi.var]
        else:
            asg[phi.var] = old
        return result
    raise EvaluationError(f"not a conjunctive formula: {type(phi).__name__}")


def _term(A: Structure, t: Term, asg: dict, memo: dict) -> str:
    # memo is valid only while the assignment is unchanged, i.e. within one quantifier scope
    if t in memo:
        return memo[t]
    value = eval_term(A, t, asg)
    memo[t] = value
    return value


def extension_table(A: Structure, phi, context: Sequence[str]) -> ExtensionTable:
    context = tuple(context)
    extra = free_vars(phi) - set(context)
    if extra:
        raise EvaluationError(f"context {context} misses free variables {sorted(extra)}")
    rows = frozenset(
        row for row in itertools.product(A.domain, repeat=len(context)) if _eval(A, phi, dict(zip(context, row)), {})
    )
    return ExtensionTable(context, rows)


def satisfying_elements(A: Structure, phi, var: str = "y") -> list[str]:
    """Elements ``a`` with ``A |= phi(a)`` (phi may only have ``var`` free)."""
    return [a for a in A.domain if evaluate(A, phi, {var: a})]
