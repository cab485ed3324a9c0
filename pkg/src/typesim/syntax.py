"""Signatures, terms and the conjunctive fragment of first-order logic.

Formulas are immutable dataclasses.  The conjunctive fragment uses
:class:`Rel`, :class:`Eq` (each carrying a ``positive`` flag), :class:`And`,
:class:`Exists` and :class:`Forall`.  The extra nodes :class:`Not`,
:class:`Or` and :class:`Implies` only exist so that general first-order input
can be parsed and then rejected by :func:`validate_conjunctive`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

Y = "y"

_IDENT = re.compile(r"^(#[\w']+|[^\W\d][\w']*)$")
_OPERATOR = re.compile(r"^[*+^@%/⊙⊕⊗·]+$")


class FormulaError(ValueError):
    """Base class for formula errors; ``pos`` is a character offset when known."""

    def __init__(self, message: str, pos: int | None = None):
        self.message = message
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


class FormulaSyntaxError(FormulaError):
    pass


class UnknownSymbolError(FormulaError):
    pass


class ArityError(FormulaError):
    pass


class NonConjunctiveError(FormulaError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        detail = "; ".join(f"{v.reason}: {format_formula(v.node)}" for v in violations)
        super().__init__(f"formula is not conjunctive ({detail})")


class SignatureError(ValueError):
    pass


def is_operator_symbol(name: str) -> bool:
    return bool(_OPERATOR.match(name))


@dataclass(frozen=True)
class Signature:
    """Function symbols (0-ary ones are constants) and relation symbols."""

    functions: tuple[tuple[str, int], ...] = ()
    relations: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple((str(n), int(a)) for n, a in self.functions))
        object.__setattr__(self, "relations", tuple((str(n), int(a)) for n, a in self.relations))
        seen = set()
        for name, arity in self.functions + self.relations:
            if name in seen:
                raise SignatureError(f"duplicate symbol {name!r}")
            seen.add(name)
            if arity < 0:
                raise SignatureError(f"negative arity for {name!r}")
            if is_operator_symbol(name):
                if arity != 2 or (name, arity) not in self.functions:
                    raise SignatureError(f"operator symbol {name!r} must be a binary function")
            elif not _IDENT.match(name):
                raise SignatureError(f"bad symbol name {name!r}")
        for name, arity in self.relations:
            if arity < 1:
                raise SignatureError(f"relation {name!r} needs arity >= 1")

    @classmethod
    def of(cls, functions: dict[str, int] | None = None, relations: dict[str, int] | None = None) -> Signature:
        return cls(tuple((functions or {}).items()), tuple((relations or {}).items()))

    def fun_arity(self, name: str) -> int | None:
        return dict(self.functions).get(name)

    def rel_arity(self, name: str) -> int | None:
        return dict(self.relations).get(name)

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.functions + self.relations)

    def with_constants(self, names: Iterable[str]) -> Signature:
        return Signature(self.functions + tuple((n, 0) for n in names), self.relations)

    def describe(self) -> str:
        parts = [f"fun {n}:{a};" for n, a in self.functions]
        parts += [f"rel {n}:{a};" for n, a in self.relations]
        return "signature { " + " ".join(parts) + " }"


# --- terms -----------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()


Term = Union[Var, App]


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max((term_depth(a) for a in t.args), default=0)


def term_vars(t: Term) -> tuple[str, ...]:
    """Variables of ``t`` in order of first occurrence."""
    out: list[str] = []

    def walk(s):
        if isinstance(s, Var):
            if s.name not in out:
                out.append(s.name)
        else:
            for a in s.args:
                walk(a)

    walk(t)
    return tuple(out)


def var_rank(name: str) -> tuple:
    # bound variables sort before y so canonical witnesses read (forall z)(z * y = z)
    m = re.fullmatch(r"z(\d+)", name)
    if m:
        return (0, int(m.group(1)), "")
    if name == Y:
        return (1, 0, "")
    return (2, 0, name)


def term_key(t: Term) -> tuple:
    if isinstance(t, Var):
        return (0, var_rank(t.name))
    return (term_depth(t), 1, t.symbol, tuple(term_key(a) for a in t.args))


def substitute_term(t: Term, old: str, new: str) -> Term:
    if isinstance(t, Var):
        return Var(new) if t.name == old else t
    return App(t.symbol, tuple(substitute_term(a, old, new) for a in t.args))


# --- formulas --------------------------------------------------------------


@dataclass(frozen=True)
class Rel:
    symbol: str
    args: tuple
    positive: bool = True


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term
    positive: bool = True


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class Forall:
    var: str
    body: object


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    lhs: object
    rhs: object


Literal = Union[Rel, Eq]
ConjFormula = Union[Rel, Eq, And, Exists, Forall]
Formula = Union[Rel, Eq, And, Exists, Forall, Not, Or, Implies]

QUANTIFIERS = (Exists, Forall)


def is_literal(phi) -> bool:
    return isinstance(phi, (Rel, Eq))


def negate_literal(lit: Literal) -> Literal:
    if isinstance(lit, Rel):
        return Rel(lit.symbol, lit.args, not lit.positive)
    return Eq(lit.lhs, lit.rhs, not lit.positive)


def children(phi) -> tuple:
    if isinstance(phi, (And, Or)):
        return phi.parts
    if isinstance(phi, (Exists, Forall, Not)):
        return (phi.body,)
    if isinstance(phi, Implies):
        return (phi.lhs, phi.rhs)
    return ()


def subformulas(phi) -> Iterator:
    yield phi
    for c in children(phi):
        yield from subformulas(c)


def free_vars(phi) -> frozenset[str]:
    if isinstance(phi, Rel):
        return frozenset(v for a in phi.args for v in term_vars(a))
    if isinstance(phi, Eq):
        return frozenset(term_vars(phi.lhs) + term_vars(phi.rhs))
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    return frozenset().union(*(free_vars(c) for c in children(phi)))


def quantifier_depth(phi) -> int:
    if isinstance(phi, (Exists, Forall)):
        return 1 + quantifier_depth(phi.body)
    return max((quantifier_depth(c) for c in children(phi)), default=0)


def max_term_depth(phi) -> int:
    if isinstance(phi, Rel):
        return max((term_depth(a) for a in phi.args), default=0)
    if isinstance(phi, Eq):
        return max(term_depth(phi.lhs), term_depth(phi.rhs))
    return max((max_term_depth(c) for c in children(phi)), default=0)


def all_vars(phi) -> frozenset[str]:
    out = set()
    for sub in subformulas(phi):
        if isinstance(sub, (Exists, Forall)):
            out.add(sub.var)
        elif isinstance(sub, Rel):
            out.update(v for a in sub.args for v in term_vars(a))
        elif isinstance(sub, Eq):
            out.update(term_vars(sub.lhs) + term_vars(sub.rhs))
    return frozenset(out)


_KIND = {Eq: 0, Rel: 1, And: 2, Exists: 3, Forall: 4}


def formula_key(phi) -> tuple:
    """Canonical order: by quantifier depth, then literals before compound nodes."""
    kind = _KIND[type(phi)]
    if isinstance(phi, Eq):
        payload = (term_key(phi.lhs), term_key(phi.rhs), not phi.positive)
    elif isinstance(phi, Rel):
        payload = (phi.symbol, tuple(term_key(a) for a in phi.args), not phi.positive)
    elif isinstance(phi, And):
        payload = tuple(formula_key(p) for p in phi.parts)
    else:
        payload = (var_rank(phi.var), formula_key(phi.body))
    return (quantifier_depth(phi), kind, payload)


def conj(*parts) -> ConjFormula:
    """Flattened, sorted, duplicate-free conjunction."""
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, And) else (p,))
    uniq = sorted(set(flat), key=formula_key)
    if not uniq:
        raise ValueError("empty conjunction")
    return uniq[0] if len(uniq) == 1 else And(tuple(uniq))


def equation(s: Term, t: Term, positive: bool = True) -> Eq:
    """Equation with the canonically larger term on the left."""
    if term_key(s) < term_key(t):
        s, t = t, s
    return Eq(s, t, positive)


def substitute(phi, old: str, new: str):
    """Rename free occurrences of ``old`` to ``new`` (no capture check)."""
    if isinstance(phi, Rel):
        return Rel(phi.symbol, tuple(substitute_term(a, old, new) for a in phi.args), phi.positive)
    if isinstance(phi, Eq):
        return Eq(substitute_term(phi.lhs, old, new), substitute_term(phi.rhs, old, new), phi.positive)
    if isinstance(phi, (Exists, Forall)):
        if phi.var == old:
            return phi
        return type(phi)(phi.var, substitute(phi.body, old, new))
    if isinstance(phi, And):
        return And(tuple(substitute(p, old, new) for p in phi.parts))
    raise TypeError(f"cannot substitute in {type(phi).__name__}")


def _capture_free(phi, old: str, new: str, bound: frozenset = frozenset()) -> bool:
    # True iff no free occurrence of ``old`` sits under a binder of ``new``.
    if isinstance(phi, (Rel, Eq)):
        return old not in free_vars(phi) or new not in bound
    if isinstance(phi, (Exists, Forall)):
        if phi.var == old:
            return True
        return _capture_free(phi.body, old, new, bound | {phi.var})
    return all(_capture_free(c, old, new, bound) for c in children(phi))


def alpha_normalize(phi, pool: tuple[str, ...]):
    """Rename each bound variable to the least pool variable that is safe to use."""
    if isinstance(phi, (Rel, Eq)):
        return phi
    if isinstance(phi, And):
        return conj(*(alpha_normalize(p, pool) for p in phi.parts))
    body = alpha_normalize(phi.body, pool)
    outer = free_vars(type(phi)(phi.var, body))
    for w in pool:
        if w == Y:
            continue
        if w == phi.var:
            break
        if w not in outer and _capture_free(body, phi.var, w):
            return type(phi)(w, alpha_normalize(substitute(body, phi.var, w), pool))
    return type(phi)(phi.var, body)


# --- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    node: object
    reason: str


@dataclass
class ValidityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_conjunctive(phi) -> ValidityReport:
    """Accept iff ``phi`` has no disjunction/implication and negates only atoms."""
    report = ValidityReport()

    def walk(node):
        if isinstance(node, Or):
            report.violations.append(Violation(node, "disjunction"))
        elif isinstance(node, Implies):
            report.violations.append(Violation(node, "implication"))
        elif isinstance(node, Not):
            body = node.body
            if not (isinstance(body, (Rel, Eq)) and body.positive):
                report.violations.append(Violation(node, "negation on non-atom"))
        for c in children(node):
            walk(c)

    walk(phi)
    return report


def to_conjunctive(phi) -> ConjFormula:
    """Turn negated atoms into literals; raise if the formula leaves the fragment."""
    report = validate_conjunctive(phi)
    if not report.ok:
        raise NonConjunctiveError(report.violations)

    def conv(node):
        if isinstance(node, Not):
            return negate_literal(node.body)
        if isinstance(node, And):
            return And(tuple(conv(p) for p in node.parts))
        if isinstance(node, (Exists, Forall)):
            return type(node)(node.var, conv(node.body))
        return node

    return conv(phi)


# --- printing --------------------------------------------------------------


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if is_operator_symbol(t.symbol) and len(t.args) == 2:
        left, right = (format_term(a) for a in t.args)
        if _is_infix(t.args[0]):
            left = f"({left})"
        if _is_infix(t.args[1]):
            right = f"({right})"
        return f"{left} {t.symbol} {right}"
    if not t.args:
        return t.symbol
    return f"{t.symbol}({','.join(format_term(a) for a in t.args)})"


def _is_infix(t: Term) -> bool:
    return isinstance(t, App) and is_operator_symbol(t.symbol)


def _unary(phi) -> str:
    text = format_formula(phi)
    if isinstance(phi, (Rel, Exists, Forall)) or (isinstance(phi, Not) and not isinstance(phi.body, (Or, And, Implies))):
        return text
    return f"({text})"


def display_form(phi):
    """Rename bound z1, z2, ... to z, z', ... for reading; identity if that could clash."""
    names = all_vars(phi)
    if not free_vars(phi) <= {Y} or any(re.fullmatch(r"z'*", n) for n in names):
        return phi
    ren = {n: "z" + "'" * (int(n[1:]) - 1) for n in names if re.fullmatch(r"z[1-9]\d*", n)}
    return _rename_all(phi, ren)


def _rename_all(phi, ren):
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(ren.get(phi.var, phi.var), _rename_all(phi.body, ren))
    if isinstance(phi, And):
        return And(tuple(_rename_all(p, ren) for p in phi.parts))
    if isinstance(phi, Rel):
        return Rel(phi.symbol, tuple(_rename_term(a, ren) for a in phi.args), phi.positive)
    if isinstance(phi, Eq):
        return Eq(_rename_term(phi.lhs, ren), _rename_term(phi.rhs, ren), phi.positive)
    raise TypeError(f"display renaming supports conjunctive formulas only, got {type(phi).__name__}")


def _rename_term(t: Term, ren) -> Term:
    if isinstance(t, Var):
        return Var(ren.get(t.name, t.name))
    return App(t.symbol, tuple(_rename_term(a, ren) for a in t.args))


def format_formula(phi, pretty: bool = False) -> str:
    """Concrete syntax; ``pretty`` renames canonical bound variables z1, z2 to z, z'."""
    if pretty:
        phi = display_form(phi)
    if isinstance(phi, Rel):
        text = f"{phi.symbol}({','.join(format_term(a) for a in phi.args)})"
        return text if phi.positive else "~" + text
    if isinstance(phi, Eq):
        op = "=" if phi.positive else "!="
        return f"{format_term(phi.lhs)} {op} {format_term(phi.rhs)}"
    if isinstance(phi, (Exists, Forall)):
        q = "exists" if isinstance(phi, Exists) else "forall"
        body = format_formula(phi.body)
        if not isinstance(phi.body, (Exists, Forall)):
            body = f"({body})"
        return f"({q} {phi.var}){body}"
    if isinstance(phi, And):
        return " & ".join(f"({format_formula(p)})" if isinstance(p, (And, Or, Implies)) else format_formula(p) for p in phi.parts)
    if isinstance(phi, Or):
        return " | ".join(f"({format_formula(p)})" if isinstance(p, (Or, Implies)) else format_formula(p) for p in phi.parts)
    if isinstance(phi, Implies):
        lhs = format_formula(phi.lhs)
        if isinstance(phi.lhs, Implies):
            lhs = f"({lhs})"
        return f"{lhs} -> {format_formula(phi.rhs)}"
    if isinstance(phi, Not):
        return "~" + _unary(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


# --- bounds ----------------------------------------------------------------


@dataclass(frozen=True)
class Bounds:
    """Quantifier depth, conjunction width, term depth and variable count."""

    q: int = 2
    c: int = 2
    t: int = 1
    v: int = 2

    def __post_init__(self):
        for name in ("q", "c", "t", "v"):
            if getattr(self, name) < 0:
                raise ValueError(f"bound {name} must be >= 0")
        if self.v < 1:
            raise ValueError("bound v must be >= 1 (y is always available)")

    @classmethod
    def parse(cls, text: str) -> Bounds:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError("bounds must look like q,c,t,v")
        return cls(*(int(p) for p in parts))

    @property
    def pool(self) -> tuple[str, ...]:
        return variable_pool(self.v)

    def replace(self, **kw) -> Bounds:
        return Bounds(**{**self.as_dict(), **kw})

    def as_dict(self) -> dict[str, int]:
        return {"q": self.q, "c": self.c, "t": self.t, "v": self.v}

    def __str__(self):
        return f"{self.q},{self.c},{self.t},{self.v}"


def variable_pool(v: int) -> tuple[str, ...]:
    return (Y,) + tuple(f"z{i}" for i in range(1, v))
