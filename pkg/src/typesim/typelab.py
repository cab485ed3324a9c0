"""Bounded conjunctive types.

Two engines compute the finite set of formula classes ("fingerprints") that
stands in for the unbounded c-type:

``enum``
    depth-bounded formula generation (quantifier depth ``q``, conjunction
    width ``c``), deduplicated by fingerprint relative to the pair at hand.
``closure``
    least fixpoint of the literal fingerprints under intersection and
    projection, i.e. the whole ``v``-variable, term-depth-``t`` fragment.

Extension tables are stored as Python ints: bit ``k`` stands for the
assignment whose i-th variable takes value ``(k // n**i) % n``.  A pair
fingerprint packs the left table into the low bits and the right table above.
"""

from __future__ import annotations

import itertools
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .evaluator import ExtensionTable, extension_table
from .structures import Structure, StructurePair
from .syntax import (
    Y,
    App,
    Bounds,
    Eq,
    Exists,
    Forall,
    Rel,
    Signature,
    Term,
    Var,
    alpha_normalize,
    conj,
    equation,
    format_formula,
    formula_key,
    free_vars,
    quantifier_depth,
    subformulas,
    term_key,
)

ENGINES = ("enum", "closure")
MAX_FORMULAS = 10**6
MAX_FINGERPRINTS = 10**5


class ResourceLimitError(RuntimeError):
    pass


# --- syntax generation ------------------------------------------------------


def build_terms(sig: Signature, variables: Sequence[str], depth: int) -> list[Term]:
    """All terms of depth <= ``depth`` over ``variables`` in canonical order."""
    terms: set = {Var(v) for v in variables}
    for _ in range(depth):
        layer = set(terms)
        for sym, arity in sig.functions:
            for args in itertools.product(sorted(terms, key=term_key), repeat=arity):
                layer.add(App(sym, args))
        terms = layer
    return sorted(terms, key=term_key)


def build_literals(sig: Signature, bounds: Bounds) -> list:
    terms = build_terms(sig, bounds.pool, bounds.t)
    lits = []
    for i, s in enumerate(terms):
        for u in terms[: i + 1]:
            e = equation(s, u)
            lits += [e, Eq(e.lhs, e.rhs, False)]
    for sym, arity in sig.relations:
        for args in itertools.product(terms, repeat=arity):
            lits += [Rel(sym, args), Rel(sym, args, False)]
    return sorted(lits, key=formula_key)


class _Syntactic:
    """Keys are the canonical formulas themselves."""

    def __init__(self, pool):
        self.pool = pool

    def literal(self, phi):
        return phi

    def conj(self, phi, keys):
        return phi

    def quant(self, phi, kind, var, key):
        return alpha_normalize(phi, self.pool)


class _Table:
    """Bit-level projection helpers for one structure and context size."""

    def __init__(self, A: Structure, v: int):
        self.A = A
        self.n = n = A.size
        self.v = v
        self.size = n**v
        self.full = (1 << self.size) - 1
        self.zero = []
        for i in range(v):
            stride = n**i
            self.zero.append(sum(1 << k for k in range(self.size) if (k // stride) % n == 0))
        self.y_mask = (1 << n) - 1

    def values(self, t: Term, pool: Sequence[str], cache: dict) -> list[int]:
        if t in cache:
            return cache[t]
        n = self.n
        if isinstance(t, Var):
            stride = n ** pool.index(t.name)
            out = [(k // stride) % n for k in range(self.size)]
        else:
            table = self.A.fun_table(t.symbol)
            if not t.args:
                out = [table[0]] * self.size
            else:
                cols = [self.values(a, pool, cache) for a in t.args]
                out = []
                for k in range(self.size):
                    code = 0
                    for c in cols:
                        code = code * n + c[k]
                    out.append(table[code])
        cache[t] = out
        return out

    def literal(self, lit, pool, cache) -> int:
        if isinstance(lit, Eq):
            a = self.values(lit.lhs, pool, cache)
            b = self.values(lit.rhs, pool, cache)
            bits = [x == y for x, y in zip(a, b)]
        else:
            rel = self.A.rel_set(lit.symbol)
            cols = [self.values(t, pool, cache) for t in lit.args]
            bits = [tuple(c[k] for c in cols) in rel for k in range(self.size)]
        if not lit.positive:
            bits = [not b for b in bits]
        return _pack(bits)

    def exists(self, x: int, i: int) -> int:
        stride = self.n**i
        acc = 0
        for k in range(self.n):
            acc |= x >> (k * stride)
        acc &= self.zero[i]
        out = 0
        for k in range(self.n):
            out |= acc << (k * stride)
        return out

    def forall(self, x: int, i: int) -> int:
        stride = self.n**i
        acc = self.zero[i]
        for k in range(self.n):
            acc &= x >> (k * stride)
        out = 0
        for k in range(self.n):
            out |= acc << (k * stride)
        return out

    def rows(self, x: int, pool) -> frozenset:
        out = []
        for k in range(self.size):
            if x >> k & 1:
                out.append(tuple(self.A.domain[(k // self.n**i) % self.n] for i in range(len(pool))))
        return frozenset(out)


def _pack(bits) -> int:
    x = 0
    for k, b in enumerate(bits):
        if b:
            x |= 1 << k
    return x


class _Semantic:
    """Keys are packed pair fingerprints."""

    def __init__(self, pair: StructurePair, bounds: Bounds):
        self.pool = bounds.pool
        self.L = _Table(pair.left, bounds.v)
        self.R = _Table(pair.right, bounds.v)
        self.shift = self.L.size
        self._cache_l: dict = {}
        self._cache_r: dict = {}

    def split(self, x: int) -> tuple[int, int]:
        return x & self.L.full, x >> self.shift

    def join(self, left: int, right: int) -> int:
        return left | (right << self.shift)

    def literal(self, phi):
        return self.join(self.L.literal(phi, self.pool, self._cache_l), self.R.literal(phi, self.pool, self._cache_r))

    def conj(self, phi, keys):
        x = keys[0]
        for k in keys[1:]:
            x &= k
        return x

    def project(self, kind, var, key):
        i = self.pool.index(var)
        left, right = self.split(key)
        if kind is Exists:
            return self.join(self.L.exists(left, i), self.R.exists(right, i))
        return self.join(self.L.forall(left, i), self.R.forall(right, i))

    def quant(self, phi, kind, var, key):
        return self.project(kind, var, key)

    def cylindrical(self, key) -> bool:
        return all(self.project(Exists, z, key) == key for z in self.pool[1:])

    def y_ext(self, key) -> tuple[int, int]:
        left, right = self.split(key)
        return left & self.L.y_mask, right & self.R.y_mask


def witness_rank(phi) -> tuple:
    """Preference among equivalent formulas: shallow, then short, then canonical order."""
    return quantifier_depth(phi), sum(1 for _ in subformulas(phi)), formula_key(phi)


class _Generator:
    """Level-by-level formula generation with deduplication on keys."""

    def __init__(self, sig, bounds, sem, max_formulas=MAX_FORMULAS, max_fingerprints=MAX_FINGERPRINTS, upgrade=False):
        self.sig = sig
        self.bounds = bounds
        self.sem = sem
        self.max_formulas = max_formulas
        self.max_fingerprints = max_fingerprints
        self.upgrade = upgrade
        self.keys: list = []
        self.witness: list = []
        self.index: dict = {}
        self.prims: list[int] = []
        self.prim_witness: dict[int, object] = {}
        self.count = 0

    def add(self, key, phi, prim: bool) -> bool:
        self.count += 1
        if self.count > self.max_formulas:
            raise ResourceLimitError(f"formula cap of {self.max_formulas} exceeded")
        idx = self.index.get(key)
        new = idx is None
        if new:
            idx = len(self.keys)
            if idx >= self.max_fingerprints:
                raise ResourceLimitError(f"fingerprint cap of {self.max_fingerprints} exceeded")
            self.index[key] = idx
            self.keys.append(key)
            self.witness.append(phi)
        elif self.upgrade and self._better(phi, self.witness[idx]):
            self.witness[idx] = phi
        if prim and idx not in self.prim_witness:
            self.prims.append(idx)
            self.prim_witness[idx] = phi
        return new

    @staticmethod
    def _better(phi, old) -> bool:
        # prefer witnesses with only y free, then the canonically least one
        a, b = free_vars(phi) <= {Y}, free_vars(old) <= {Y}
        if a != b:
            return a
        return witness_rank(phi) < witness_rank(old)

    def conj_step(self, first_new: int) -> list[int]:
        created = []
        for width in range(2, self.bounds.c + 1):
            for j in range(first_new, len(self.prims)):
                for rest in itertools.combinations(range(j), width - 1):
                    members = [self.prims[i] for i in rest] + [self.prims[j]]
                    phi = conj(*(self.prim_witness[m] for m in members))
                    key = self.sem.conj(phi, [self.keys[m] for m in members])
                    before = len(self.keys)
                    self.add(key, phi, prim=False)
                    if len(self.keys) > before:
                        created.append(before)
        return created

    def run(self):
        zs = self.bounds.pool[1:]
        level = []
        for lit in build_literals(self.sig, self.bounds):
            before = len(self.keys)
            self.add(self.sem.literal(lit), lit, prim=True)
            if len(self.keys) > before:
                level.append(before)
        level += self.conj_step(0)
        for _ in range(self.bounds.q):
            first_prim = len(self.prims)
            created = []
            for idx in level:
                body = self.witness[idx]
                fv = free_vars(body)
                for z in zs:
                    if z not in fv:
                        continue
                    for kind in (Exists, Forall):
                        phi = kind(z, body)
                        key = self.sem.quant(phi, kind, z, self.keys[idx])
                        before = len(self.keys)
                        self.add(key, phi, prim=True)
                        if len(self.keys) > before:
                            created.append(before)
            created += self.conj_step(first_prim)
            level = created
            if not level:
                break
        return self


def enumerate_formulas(sig: Signature, bounds: Bounds, max_formulas: int = MAX_FORMULAS, sentences: bool = False) -> list:
    """Canonical conjunctive formulas with free variables exactly {y} within ``bounds``.

    With ``sentences`` closed formulas are included too (read as formulas in y).
    """
    gen = _Generator(sig, bounds, _Syntactic(bounds.pool), max_formulas, max_fingerprints=max_formulas).run()
    if sentences:
        return [phi for phi in gen.witness if free_vars(phi) <= {Y}]
    return [phi for phi in gen.witness if free_vars(phi) == {Y}]


# --- fingerprints and type universes ----------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    """Extension tables of one formula class in both structures of a pair."""

    index: int
    left: ExtensionTable
    right: ExtensionTable
    witness: object
    derivation: tuple = ()

    @property
    def context(self) -> tuple[str, ...]:
        return self.left.context

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "context": list(self.context),
            "left": [list(r) for r in self.left.sorted_rows()],
            "right": [list(r) for r in self.right.sorted_rows()],
            "witness": format_formula(self.witness, pretty=True),
        }


@dataclass
class TypeUniverse:
    """The fingerprints with free variables among {y}, seen through their y-columns.

    ``ext_left[i]``/``ext_right[i]`` are bitmasks over element indices of the
    left/right structure; ``witness(i)`` rebuilds a formula for class ``i``.
    """

    pair: StructurePair
    bounds: Bounds
    engine: str
    ext_left: list[int]
    ext_right: list[int]
    witness_fn: Callable[[int], object] = field(repr=False)
    fragment: str = "c"

    def __len__(self):
        return len(self.ext_left)

    def witness(self, i: int):
        return self.witness_fn(i)

    @cached_property
    def type_left(self) -> list[int]:
        return _member_masks(self.ext_left, self.pair.left.size)

    @cached_property
    def type_right(self) -> list[int]:
        return _member_masks(self.ext_right, self.pair.right.size)

    def shared(self, a: str, b: str) -> int:
        return self.type_left[self.pair.left.index[a]] & self.type_right[self.pair.right.index[b]]

    def swapped(self) -> TypeUniverse:
        return TypeUniverse(self.pair.swapped(), self.bounds, self.engine, self.ext_right, self.ext_left, self.witness_fn, self.fragment)

    def fingerprint(self, i: int) -> Fingerprint:
        left = frozenset((a,) for k, a in enumerate(self.pair.left.domain) if self.ext_left[i] >> k & 1)
        right = frozenset((b,) for k, b in enumerate(self.pair.right.domain) if self.ext_right[i] >> k & 1)
        return Fingerprint(i, ExtensionTable((Y,), left), ExtensionTable((Y,), right), self.witness(i))

    def fingerprints(self, mask: int | None = None) -> list[Fingerprint]:
        return [self.fingerprint(i) for i in _bits(mask) ] if mask is not None else [self.fingerprint(i) for i in range(len(self))]


def _member_masks(exts: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, e in enumerate(exts):
        for k in range(n):
            if e >> k & 1:
                out[k] |= 1 << i
    return out


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _wrap_free(phi):
    for z in sorted(free_vars(phi) - {Y}, reverse=True):
        phi = Exists(z, phi)
    return phi


def _type_universe(pair, bounds, engine, keys, sem, witness_of, fragment="c") -> TypeUniverse:
    ext_l, ext_r, members = [], [], []
    seen = set()
    for i, key in enumerate(keys):
        if not sem.cylindrical(key):
            continue
        yl, yr = sem.y_ext(key)
        if (yl, yr) in seen:
            continue
        seen.add((yl, yr))
        ext_l.append(yl)
        ext_r.append(yr)
        members.append(i)
    cache: dict[int, object] = {}

    def witness(j: int):
        if j not in cache:
            cache[j] = _wrap_free(witness_of(members[j]))
        return cache[j]

    return TypeUniverse(pair, bounds, engine, ext_l, ext_r, witness, fragment)


class _Closure:
    def __init__(self, pair, bounds, max_fingerprints=MAX_FINGERPRINTS):
        self.sem = _Semantic(pair, bounds)
        self.bounds = bounds
        self.max_fingerprints = max_fingerprints
        self.keys: list[int] = []
        self.deriv: list[tuple] = []
        self.index: dict[int, int] = {}
        self._formulas: dict[int, object] = {}

    def add(self, key, deriv):
        if key in self.index:
            return
        if len(self.keys) >= self.max_fingerprints:
            raise ResourceLimitError(f"fingerprint cap of {self.max_fingerprints} exceeded")
        self.index[key] = len(self.keys)
        self.keys.append(key)
        self.deriv.append(deriv)

    def run(self):
        sem = self.sem
        for lit in build_literals(sem.L.A.sig, self.bounds):
            self.add(sem.literal(lit), ("lit", lit))
        zs = self.bounds.pool[1:]
        i = 0
        while i < len(self.keys):
            x = self.keys[i]
            index = self.index
            for j, r in enumerate([x & k for k in self.keys[:i]]):
                if r not in index:
                    self.add(r, ("and", j, i))
            for z in zs:
                self.add(sem.project(Exists, z, x), ("exists", z, i))
                self.add(sem.project(Forall, z, x), ("forall", z, i))
            i += 1
        return self

    def formula(self, i: int):
        # parents always precede children, so fill the memo bottom-up
        todo = [i]
        while todo:
            k = todo[-1]
            if k in self._formulas:
                todo.pop()
                continue
            d = self.deriv[k]
            parents = [p for p in (d[1:] if d[0] == "and" else d[2:] if d[0] != "lit" else ()) if p not in self._formulas]
            if parents:
                todo.extend(parents)
                continue
            todo.pop()
            if d[0] == "lit":
                phi = d[1]
            elif d[0] == "and":
                phi = conj(self._formulas[d[1]], self._formulas[d[2]])
            else:
                phi = (Exists if d[0] == "exists" else Forall)(d[1], self._formulas[d[2]])
            self._formulas[k] = phi
        return self._formulas[i]

    def fingerprints(self) -> list[Fingerprint]:
        pool = self.bounds.pool
        out = []
        for i, key in enumerate(self.keys):
            left, right = self.sem.split(key)
            out.append(
                Fingerprint(
                    i,
                    ExtensionTable(pool, self.sem.L.rows(left, pool)),
                    ExtensionTable(pool, self.sem.R.rows(right, pool)),
                    self.formula(i),
                    self.deriv[i] if self.deriv[i][0] != "lit" else ("lit",),
                )
            )
        return out


def _with_params(pair: StructurePair) -> StructurePair:
    shared = [a for a in pair.left.domain if pair.left_in_right(a)]
    return StructurePair(pair.left.with_constants(shared), pair.right.with_constants(shared), pair.identity)


_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 512


def type_universe(
    pair: StructurePair,
    bounds: Bounds | None = None,
    engine: str = "enum",
    element_params: bool = False,
    max_formulas: int = MAX_FORMULAS,
    max_fingerprints: int = MAX_FINGERPRINTS,
    cache: bool = True,
) -> TypeUniverse:
    """Bounded type classes for ``pair`` computed by the chosen engine (memoized)."""
    bounds = bounds or Bounds()
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    key = (pair, bounds, engine, element_params, max_formulas, max_fingerprints)
    if cache and key in _CACHE:
        _CACHE.move_to_end(key)
        return _CACHE[key]
    twin = (pair.swapped(),) + key[1:]
    if cache and twin in _CACHE:
        result = _CACHE[twin].swapped()
    else:
        work = _with_params(pair) if element_params else pair
        if engine == "enum":
            sem = _Semantic(work, bounds)
            gen = _Generator(work.left.sig, bounds, sem, max_formulas, max_fingerprints, upgrade=True).run()
            result = _type_universe(pair, bounds, engine, gen.keys, sem, gen.witness.__getitem__)
        else:
            clo = _Closure(work, bounds, max_fingerprints).run()
            result = _type_universe(pair, bounds, engine, clo.keys, clo.sem, clo.formula)
    if not cache:
        return result
    _CACHE[key] = result
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return result


def closure_fingerprints(pair: StructurePair, bounds: Bounds | None = None, max_fingerprints: int = MAX_FINGERPRINTS) -> list[Fingerprint]:
    """All fingerprints of the (t, v) fragment over the full variable context."""
    return _Closure(pair, bounds or Bounds(), max_fingerprints).run().fingerprints()


def enum_fingerprints(pair: StructurePair, bounds: Bounds | None = None, max_formulas: int = MAX_FORMULAS) -> list[Fingerprint]:
    """Fingerprints of all generated formula classes over the full variable context."""
    bounds = bounds or Bounds()
    sem = _Semantic(pair, bounds)
    gen = _Generator(pair.left.sig, bounds, sem, max_formulas, upgrade=True).run()
    pool = bounds.pool
    out = []
    for i, key in enumerate(gen.keys):
        left, right = sem.split(key)
        out.append(Fingerprint(i, ExtensionTable(pool, sem.L.rows(left, pool)), ExtensionTable(pool, sem.R.rows(right, pool)), gen.witness[i]))
    return out


def universe_from_formulas(pair: StructurePair, formulas: Iterable, bounds: Bounds | None = None, label: str = "formulas", fragment: str = "c") -> TypeUniverse:
    """Type classes of an explicit formula list, by direct evaluation (first witness wins)."""
    ext_l, ext_r, wit = [], [], []
    seen = set()
    for phi in formulas:
        yl = _pack(r in extension_table(pair.left, phi, (Y,)).rows for r in ((a,) for a in pair.left.domain))
        yr = _pack(r in extension_table(pair.right, phi, (Y,)).rows for r in ((b,) for b in pair.right.domain))
        if (yl, yr) in seen:
            continue
        seen.add((yl, yr))
        ext_l.append(yl)
        ext_r.append(yr)
        wit.append(phi)
    return TypeUniverse(pair, bounds or Bounds(), label, ext_l, ext_r, wit.__getitem__, fragment)


# --- type views ---------------------------------------------------------------


@dataclass(frozen=True)
class TypeView:
    """Fingerprints of a bounded type: of one element, or shared by two."""

    pair: StructurePair
    elements: tuple
    side: str
    bounds: Bounds
    engine: str
    mask: int
    universe: TypeUniverse = field(repr=False, compare=False)

    @property
    def fingerprints(self) -> list[Fingerprint]:
        return self.universe.fingerprints(self.mask)

    def formulas(self) -> list:
        return [fp.witness for fp in self.fingerprints]

    def __len__(self):
        return bin(self.mask).count("1")

    def __contains__(self, phi) -> bool:
        """Whether a formula's fingerprint is one of this view's classes."""
        yl = _pack((a,) in extension_table(self.pair.left, phi, (Y,)).rows for a in self.pair.left.domain)
        yr = _pack((b,) in extension_table(self.pair.right, phi, (Y,)).rows for b in self.pair.right.domain)
        return any(self.universe.ext_left[i] == yl and self.universe.ext_right[i] == yr for i in _bits(self.mask))

    def to_json(self) -> dict:
        return {
            "left": self.pair.left.name,
            "right": self.pair.right.name,
            "elements": list(self.elements),
            "side": self.side,
            "bounds": self.bounds.as_dict(),
            "engine": self.engine,
            "fragment": self.universe.fragment,
            "fingerprints": [fp.to_json() for fp in self.fingerprints],
        }


def _check_element(A: Structure, a: str):
    if a not in A.index:
        raise KeyError(f"{a!r} is not an element of {A.name}")


def ctype(pair: StructurePair, element: str, side: str = "left", bounds: Bounds | None = None, engine: str = "enum", **kw) -> TypeView:
    """Bounded c-type of ``element`` in the left or right structure of ``pair``."""
    u = type_universe(pair, bounds, engine, **kw)
    return type_view(u, element, side)


def type_view(u: TypeUniverse, element: str, side: str = "left") -> TypeView:
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    A = u.pair.left if side == "left" else u.pair.right
    _check_element(A, element)
    masks = u.type_left if side == "left" else u.type_right
    return TypeView(u.pair, (element,), side, u.bounds, u.engine, masks[A.index[element]], u)


def ctype_enum(pair: StructurePair, element: str, side: str = "left", bounds: Bounds | None = None, **kw) -> TypeView:
    return ctype(pair, element, side, bounds, "enum", **kw)


def shared_view(u: TypeUniverse, a: str, b: str) -> TypeView:
    _check_element(u.pair.left, a)
    _check_element(u.pair.right, b)
    return TypeView(u.pair, (a, b), "both", u.bounds, u.engine, u.shared(a, b), u)


def shared_type(pair: StructurePair, a: str, b: str, bounds: Bounds | None = None, engine: str = "enum", **kw) -> TypeView:
    """Justification classes of ``a <~ b``: fingerprints holding at a (left) and b (right)."""
    return shared_view(type_universe(pair, bounds, engine, **kw), a, b)


def type_preorder(u: TypeUniverse) -> frozenset:
    """Type inclusion on the disjoint union of both domains, as tagged pairs."""
    nodes = [("L", a, m) for a, m in zip(u.pair.left.domain, u.type_left)]
    nodes += [("R", b, m) for b, m in zip(u.pair.right.domain, u.type_right)]
    return frozenset(((s, x), (t, y)) for s, x, m in nodes for t, y, k in nodes if m & ~k == 0)


def type_included(u: TypeUniverse, a: str, b: str) -> bool:
    """Bounded c-Type(a) in the left structure is a subset of c-Type(b) in the right."""
    m = u.type_left[u.pair.left.index[a]]
    k = u.type_right[u.pair.right.index[b]]
    return m & ~k == 0
