"""Finite structures, the structure file format, and hom/iso checking."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping as MappingT

from .syntax import Signature, SignatureError, is_operator_symbol


class StructureError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.message = message
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class StructureSyntaxError(StructureError):
    pass


class PartialFunctionError(StructureError):
    pass


class OutOfDomainError(StructureError):
    pass


class DuplicateLabelError(StructureError):
    pass


@dataclass(frozen=True)
class Structure:
    """A finite structure with its tables stored over element indices.

    Function tables are flat tuples indexed by the mixed-radix encoding of the
    argument tuple (first argument most significant).
    """

    name: str
    sig: Signature
    domain: tuple[str, ...]
    fun_tables: tuple[tuple[str, tuple[int, ...]], ...]
    rel_tables: tuple[tuple[str, frozenset], ...]

    @classmethod
    def build(
        cls,
        name: str,
        sig: Signature,
        domain: Iterable[str],
        functions: MappingT[str, MappingT[tuple, str]] | None = None,
        relations: MappingT[str, Iterable[tuple]] | None = None,
    ) -> Structure:
        domain = tuple(str(d) for d in domain)
        if not domain:
            raise StructureError(f"structure {name}: empty domain")
        seen = set()
        for d in domain:
            if d in seen:
                raise DuplicateLabelError(f"structure {name}: duplicate label {d!r}")
            seen.add(d)
        index = {d: i for i, d in enumerate(domain)}
        n = len(domain)
        functions = dict(functions or {})
        relations = dict(relations or {})
        for sym in list(functions) + list(relations):
            if sym not in sig.symbols:
                raise StructureError(f"structure {name}: unknown symbol {sym!r}")

        def idx(label):
            if label not in index:
                raise OutOfDomainError(f"structure {name}: {label!r} is not in the domain")
            return index[label]

        fun_tables = []
        for sym, arity in sig.functions:
            given = {tuple(k): v for k, v in functions.get(sym, {}).items()}
            flat = []
            for args in itertools.product(domain, repeat=arity):
                if args not in given:
                    shown = ", ".join(args)
                    raise PartialFunctionError(f"structure {name}: {sym}({shown}) is undefined")
                flat.append(idx(given[args]))
            for args in given:
                if len(args) != arity:
                    raise StructureError(f"structure {name}: {sym} entry {args} has wrong arity")
                for a in args:
                    idx(a)
            fun_tables.append((sym, tuple(flat)))
        rel_tables = []
        for sym, arity in sig.relations:
            tuples = set()
            for row in relations.get(sym, ()):
                row = tuple(row)
                if len(row) != arity:
                    raise StructureError(f"structure {name}: {sym} tuple {row} has wrong arity")
                tuples.add(tuple(idx(a) for a in row))
            rel_tables.append((sym, frozenset(tuples)))
        return cls(name, sig, domain, tuple(fun_tables), tuple(rel_tables))

    @property
    def size(self) -> int:
        return len(self.domain)

    @cached_property
    def index(self) -> dict[str, int]:
        return {d: i for i, d in enumerate(self.domain)}

    @cached_property
    def _funs(self) -> dict[str, tuple[int, ...]]:
        return dict(self.fun_tables)

    @cached_property
    def _rels(self) -> dict[str, frozenset]:
        return dict(self.rel_tables)

    def fun_table(self, sym: str) -> tuple[int, ...]:
        return self._funs[sym]

    def rel_set(self, sym: str) -> frozenset:
        return self._rels[sym]

    def apply_idx(self, sym: str, args: tuple[int, ...]) -> int:
        code = 0
        for a in args:
            code = code * self.size + a
        return self._funs[sym][code]

    def apply(self, sym: str, *labels: str) -> str:
        return self.domain[self.apply_idx(sym, tuple(self.index[l] for l in labels))]

    def holds(self, sym: str, *labels: str) -> bool:
        return tuple(self.index[l] for l in labels) in self._rels[sym]

    def function_dict(self, sym: str) -> dict[tuple[str, ...], str]:
        arity = self.sig.fun_arity(sym)
        table = self._funs[sym]
        return {args: self.domain[table[k]] for k, args in enumerate(itertools.product(self.domain, repeat=arity))}

    def relation_tuples(self, sym: str) -> list[tuple[str, ...]]:
        return [tuple(self.domain[i] for i in row) for row in sorted(self._rels[sym])]

    def renamed(self, name: str) -> Structure:
        return Structure(name, self.sig, self.domain, self.fun_tables, self.rel_tables)

    def with_constants(self, labels: Iterable[str]) -> Structure:
        """Add a 0-ary function ``#label`` naming each given element."""
        labels = list(labels)
        sig = self.sig.with_constants("#" + l for l in labels)
        extra = tuple(("#" + l, (self.index[l],)) for l in labels)
        return Structure(self.name, sig, self.domain, self.fun_tables + extra, self.rel_tables)


@dataclass(frozen=True)
class StructurePair:
    """Left and right structure; with ``identity`` equal labels denote the same element."""

    left: Structure
    right: Structure
    identity: bool = True

    def __post_init__(self):
        if self.left.sig != self.right.sig:
            raise SignatureError(f"structures {self.left.name} and {self.right.name} have different signatures")

    def swapped(self) -> StructurePair:
        return StructurePair(self.right, self.left, self.identity)

    def left_in_right(self, label: str) -> bool:
        return self.identity and label in self.right.index


@dataclass(frozen=True)
class Mapping:
    source: str
    target: str
    table: tuple[tuple[str, str], ...]

    @classmethod
    def of(cls, source: str, target: str, mapping: MappingT[str, str]) -> Mapping:
        return cls(source, target, tuple(mapping.items()))

    @cached_property
    def as_dict(self) -> dict[str, str]:
        return dict(self.table)

    def __call__(self, label: str) -> str:
        return self.as_dict[label]


@dataclass(frozen=True)
class MappingVerdict:
    ok: bool
    kind: str
    violation: str | None = None

    def __bool__(self):
        return self.ok


def check_mapping(m: Mapping, A: Structure, B: Structure, kind: str = "hom") -> MappingVerdict:
    """Check that ``m`` is a homomorphism (``hom``) or isomorphism (``iso``) from A to B."""
    if kind not in ("hom", "iso"):
        raise ValueError(f"unknown mapping kind {kind!r}")
    if A.sig != B.sig:
        raise SignatureError("signature mismatch")
    f = m.as_dict
    for a in A.domain:
        if a not in f:
            return MappingVerdict(False, kind, f"{a} is not mapped")
        if f[a] not in B.index:
            return MappingVerdict(False, kind, f"{a} maps to {f[a]!r}, outside {B.name}")
    if kind == "iso":
        if len(set(f[a] for a in A.domain)) != A.size:
            return MappingVerdict(False, kind, "not injective")
        if A.size != B.size:
            return MappingVerdict(False, kind, "not surjective")
    for sym, arity in A.sig.functions:
        for args in itertools.product(A.domain, repeat=arity):
            lhs = f[A.apply(sym, *args)]
            rhs = B.apply(sym, *(f[a] for a in args))
            if lhs != rhs:
                shown = ",".join(args)
                return MappingVerdict(False, kind, f"{sym}({shown}) = {A.apply(sym, *args)} maps to {lhs}, but {sym} of the image is {rhs}")
    for sym, arity in A.sig.relations:
        for row in A.relation_tuples(sym):
            if not B.holds(sym, *(f[a] for a in row)):
                return MappingVerdict(False, kind, f"{sym}{row} is not preserved")
        if kind == "iso":
            inv = {v: k for k, v in f.items() if k in A.index}
            for row in B.relation_tuples(sym):
                if not A.holds(sym, *(inv[b] for b in row)):
                    return MappingVerdict(False, kind, f"{sym}{row} is not reflected")
    return MappingVerdict(True, kind)


def relabel(A: Structure, bijection: MappingT[str, str], name: str | None = None) -> tuple[Structure, Mapping]:
    """Transport A along a label bijection; returns the copy and the witnessing map."""
    if set(bijection) != set(A.domain):
        raise ValueError("relabelling must be total on the domain")
    if len(set(bijection.values())) != A.size:
        raise ValueError("relabelling is not injective")
    new_domain = tuple(bijection[a] for a in A.domain)
    functions = {
        sym: {tuple(bijection[a] for a in args): bijection[v] for args, v in A.function_dict(sym).items()}
        for sym, _ in A.sig.functions
    }
    relations = {sym: [tuple(bijection[a] for a in row) for row in A.relation_tuples(sym)] for sym, _ in A.sig.relations}
    B = Structure.build(name or A.name + "'", A.sig, new_domain, functions, relations)
    return B, Mapping.of(A.name, B.name, {a: bijection[a] for a in A.domain})


# --- file format -----------------------------------------------------------

_FILE_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*)|(?P<arrow>->)|(?P<punct>[{};:,()])"
    r"|(?P<op>[*+^@%/⊙⊕⊗·]+)|(?P<word>[\w']+)"
)


@dataclass
class StructureFile:
    sig: Signature
    structures: dict[str, Structure] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Structure:
        try:
            return self.structures[name]
        except KeyError:
            raise KeyError(f"no structure named {name!r}; have {', '.join(self.structures)}") from None

    def names(self) -> list[str]:
        return list(self.structures)


class _FileParser:
    def __init__(self, text: str):
        self.toks = []
        line = 1
        pos = 0
        while pos < len(text):
            m = _FILE_TOKEN.match(text, pos)
            if not m:
                raise StructureSyntaxError(f"unexpected character {text[pos]!r}", line)
            kind = m.lastgroup
            if kind not in ("ws", "comment"):
                self.toks.append((kind, m.group(), line))
            line += m.group().count("\n")
            pos = m.end()
        self.toks.append(("eof", "", line))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, text: str | None = None, kind: str | None = None):
        tok = self.peek()
        if (text is not None and tok[1] != text) or (kind is not None and tok[0] != kind):
            want = text or kind
            raise StructureSyntaxError(f"expected {want!r}, found {tok[1] or 'end of file'!r}", tok[2])
        self.i += 1
        return tok

    def symbol(self) -> str:
        tok = self.peek()
        if tok[0] not in ("word", "op"):
            raise StructureSyntaxError(f"expected a symbol, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok[1]

    def label(self) -> str:
        return self.take(kind="word")[1]

    def parse(self, sig: Signature | None) -> StructureFile:
        if self.peek()[1] == "signature":
            sig = self.signature()
        if sig is None:
            raise StructureSyntaxError("missing signature block", self.peek()[2])
        out = StructureFile(sig)
        while self.peek()[0] != "eof":
            s = self.structure(sig)
            if s.name in out.structures:
                raise StructureSyntaxError(f"duplicate structure name {s.name!r}", self.peek()[2])
            out.structures[s.name] = s
        return out

    def signature(self) -> Signature:
        self.take("signature")
        self.take("{")
        funs, rels = [], []
        while self.peek()[1] != "}":
            kw = self.take(kind="word")
            if kw[1] not in ("fun", "rel"):
                raise StructureSyntaxError(f"expected 'fun' or 'rel', found {kw[1]!r}", kw[2])
            name = self.symbol()
            self.take(":")
            arity = self.take(kind="word")
            if not arity[1].isdigit():
                raise StructureSyntaxError(f"bad arity {arity[1]!r}", arity[2])
            self.take(";")
            (funs if kw[1] == "fun" else rels).append((name, int(arity[1])))
        self.take("}")
        try:
            return Signature(tuple(funs), tuple(rels))
        except SignatureError as e:
            raise StructureSyntaxError(str(e), self.peek()[2]) from None

    def tuple_(self) -> tuple[str, ...]:
        if self.peek()[1] != "(":
            return (self.label(),)
        self.take("(")
        items = []
        if self.peek()[1] != ")":
            items.append(self.label())
            while self.peek()[1] == ",":
                self.take(",")
                items.append(self.label())
        self.take(")")
        return tuple(items)

    def structure(self, sig: Signature) -> Structure:
        start = self.take("structure")[2]
        name = self.label()
        self.take("{")
        domain = None
        functions: dict = {}
        relations: dict = {}
        while self.peek()[1] != "}":
            kw = self.take(kind="word")
            if kw[1] == "domain":
                domain = [self.label()]
                while self.peek()[1] == ",":
                    self.take(",")
                    domain.append(self.label())
                self.take(";")
            elif kw[1] == "fun":
                sym = self.symbol()
                table = functions.setdefault(sym, {})
                self.take("{")
                while self.peek()[1] != "}":
                    line = self.peek()[2]
                    if self.peek()[1] == "->":
                        args: tuple = ()
                    else:
                        args = self.tuple_()
                        while self.peek()[1] == ",":
                            self.take(",")
                            args += (self.label(),)
                    self.take("->")
                    value = self.label()
                    self.take(";")
                    if args in table:
                        raise StructureSyntaxError(f"{sym}{args} defined twice", line)
                    table[args] = value
                self.take("}")
            elif kw[1] == "rel":
                sym = self.symbol()
                rows = relations.setdefault(sym, [])
                self.take("{")
                while self.peek()[1] != "}":
                    rows.append(self.tuple_())
                    self.take(";")
                self.take("}")
            else:
                raise StructureSyntaxError(f"unexpected {kw[1]!r} in structure {name}", kw[2])
        self.take("}")
        if domain is None:
            raise StructureSyntaxError(f"structure {name} has no domain", start)
        try:
            return Structure.build(name, sig, domain, functions, relations)
        except StructureError as e:
            raise type(e)(e.message, start) from None


def parse_structure_file(text: str, sig: Signature | None = None) -> StructureFile:
    """Parse a file holding an optional signature block and one or more structures."""
    return _FileParser(text).parse(sig)


def parse_structure(text: str, sig: Signature | None = None) -> Structure:
    f = parse_structure_file(text, sig)
    if len(f.structures) != 1:
        raise StructureSyntaxError(f"expected exactly one structure, found {len(f.structures)}")
    return next(iter(f.structures.values()))


def load_structure_file(path) -> StructureFile:
    with open(path, encoding="utf-8") as fh:
        return parse_structure_file(fh.read())


def _fmt_tuple(args: tuple[str, ...]) -> str:
    return args[0] if len(args) == 1 else "(" + ", ".join(args) + ")"


def format_structure(A: Structure) -> str:
    lines = [f"structure {A.name} {{", f"  domain {', '.join(A.domain)};"]
    for sym, arity in A.sig.functions:
        entries = []
        for args, value in A.function_dict(sym).items():
            lhs = "" if arity == 0 else _fmt_tuple(args) + " "
            entries.append(f"{lhs}-> {value};")
        lines.append(f"  fun {sym} {{ {' '.join(entries)} }}")
    for sym, _ in A.sig.relations:
        entries = [f"{_fmt_tuple(row)};" for row in A.relation_tuples(sym)]
        lines.append(f"  rel {sym} {{ {' '.join(entries)} }}" if entries else f"  rel {sym} {{ }}")
    lines.append("}")
    return "\n".join(lines)


def format_structure_file(structures: Iterable[Structure], sig: Signature | None = None) -> str:
    structures = list(structures)
    sig = sig or structures[0].sig
    return sig.describe() + "\n" + "\n".join(format_structure(s) for s in structures) + "\n"


def parse_signature(text: str) -> Signature:
    """Parse ``fun f:1; rel R:2`` (with or without the ``signature { }`` wrapper)."""
    text = text.strip()
    if not text.startswith("signature"):
        text = "signature { " + text.rstrip(";") + "; }"
    return _FileParser(text).signature()


__all__ = [
    "Mapping",
    "MappingVerdict",
    "Structure",
    "StructureError",
    "StructureFile",
    "StructurePair",
    "check_mapping",
    "format_structure",
    "format_structure_file",
    "is_operator_symbol",
    "load_structure_file",
    "parse_signature",
    "parse_structure",
    "parse_structure_file",
    "relabel",
]
