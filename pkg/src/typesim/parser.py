"""Recursive descent parser for the ASCII/Unicode formula grammar.

    formula  := disj ('->' formula)?
    disj     := conj ('|' conj)*
    conj     := unary ('&' unary)*
    unary    := '~' unary | quant | '(' formula ')' | atom
    quant    := '(' ('forall'|'exists') VAR ')' unary | ('∀'|'∃') VAR unary
    atom     := REL '(' term (',' term)* ')' | term ('=' | '!=') term
    term     := primary (OP primary)*          (left associative)
    primary  := FUN '(' term, ... ')' | FUN | VAR | '(' term ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And,
    App,
    ArityError,
    ConjFormula,
    Eq,
    Exists,
    Forall,
    FormulaSyntaxError,
    Implies,
    Not,
    Or,
    Rel,
    Signature,
    Term,
    UnknownSymbolError,
    Var,
    to_conjunctive,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->|→)
  | (?P<neq>!=|≠)
  | (?P<eq>=)
  | (?P<not>~|¬|!)
  | (?P<and>&|∧)
  | (?P<or>\||∨)
  | (?P<forall>∀)
  | (?P<exists>∃)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<comma>,)
  | (?P<op>[*+^@%/⊙⊕⊗·∗]+)
  | (?P<name>\#[\w']+|[^\W\d][\w']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group()
        if kind == "name" and value in ("forall", "exists"):
            kind = value
        if kind == "op":
            value = value.replace("∗", "*")
        if kind != "ws":
            tokens.append(Token(kind, value, pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.sig = sig
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self, kind: str | None = None) -> Token:
        tok = self.peek()
        if kind is not None and tok.kind != kind:
            found = tok.text or "end of input"
            raise FormulaSyntaxError(f"expected {kind}, found {found!r}", tok.pos)
        self.i += 1
        return tok

    def parse(self):
        phi = self.formula()
        self.take("eof")
        return phi

    def formula(self):
        lhs = self.disj()
        if self.peek().kind == "arrow":
            self.take()
            return Implies(lhs, self.formula())
        return lhs

    def disj(self):
        parts = [self.conj()]
        while self.peek().kind == "or":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.peek().kind == "and":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok.kind == "not":
            self.take()
            return Not(self.unary())
        if tok.kind in ("forall", "exists"):
            self.take()
            var = self.take("name").text
            return self._quant(tok.kind, var, self.unary())
        if tok.kind == "lp" and self.peek(1).kind in ("forall", "exists"):
            self.take()
            q = self.take().kind
            var = self.variable()
            self.take("rp")
            return self._quant(q, var, self.unary())
        if tok.kind == "lp":
            saved = self.i
            try:
                self.take()
                inner = self.formula()
                self.take("rp")
                if self.peek().kind not in ("eq", "neq", "op"):
                    return inner
            except FormulaSyntaxError:
                pass
            self.i = saved
        return self.atom()

    @staticmethod
    def _quant(kind, var, body):
        return Forall(var, body) if kind == "forall" else Exists(var, body)

    def variable(self) -> str:
        tok = self.take("name")
        if tok.text in self.sig.symbols:
            raise FormulaSyntaxError(f"{tok.text!r} is a symbol, not a variable", tok.pos)
        return tok.text

    def atom(self):
        tok = self.peek()
        if tok.kind == "name" and self.sig.rel_arity(tok.text) is not None:
            self.take()
            args = self.arguments(tok)
            arity = self.sig.rel_arity(tok.text)
            if len(args) != arity:
                raise ArityError(f"relation {tok.text} expects {arity} arguments, got {len(args)}", tok.pos)
            return Rel(tok.text, args)
        lhs = self.term()
        op = self.peek()
        if op.kind not in ("eq", "neq"):
            raise FormulaSyntaxError(f"expected '=' or '!=', found {op.text or 'end of input'!r}", op.pos)
        self.take()
        rhs = self.term()
        return Eq(lhs, rhs) if op.kind == "eq" else Not(Eq(lhs, rhs))

    def arguments(self, head: Token) -> tuple:
        if self.peek().kind != "lp":
            return ()
        self.take()
        args = []
        if self.peek().kind != "rp":
            args.append(self.term())
            while self.peek().kind == "comma":
                self.take()
                args.append(self.term())
        self.take("rp")
        return tuple(args)

    def term(self) -> Term:
        left = self.primary()
        while self.peek().kind == "op":
            tok = self.take()
            if self.sig.fun_arity(tok.text) != 2:
                raise UnknownSymbolError(f"unknown binary function symbol {tok.text!r}", tok.pos)
            left = App(tok.text, (left, self.primary()))
        return left

    def primary(self) -> Term:
        tok = self.peek()
        if tok.kind == "lp":
            self.take()
            t = self.term()
            self.take("rp")
            return t
        if tok.kind != "name":
            raise FormulaSyntaxError(f"expected a term, found {tok.text or 'end of input'!r}", tok.pos)
        self.take()
        arity = self.sig.fun_arity(tok.text)
        if self.sig.rel_arity(tok.text) is not None:
            raise FormulaSyntaxError(f"relation {tok.text!r} used as a term", tok.pos)
        if arity is None:
            if self.peek().kind == "lp":
                raise UnknownSymbolError(f"unknown function symbol {tok.text!r}", tok.pos)
            if tok.text.startswith("#"):
                raise UnknownSymbolError(f"unknown element parameter {tok.text!r}", tok.pos)
            return Var(tok.text)
        args = self.arguments(tok)
        if len(args) != arity:
            raise ArityError(f"function {tok.text} expects {arity} arguments, got {len(args)}", tok.pos)
        return App(tok.text, args)


def parse_fo(text: str, sig: Signature):
    """Parse a general first-order formula (disjunction and negation allowed)."""
    return _Parser(text, sig).parse()


def parse_formula(text: str, sig: Signature) -> ConjFormula:
    """Parse a conjunctive formula; non-conjunctive input raises NonConjunctiveError."""
    return to_conjunctive(parse_fo(text, sig))


def parse_term(text: str, sig: Signature) -> Term:
    p = _Parser(text, sig)
    t = p.term()
    p.take("eof")
    return t
