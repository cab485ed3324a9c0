"""Similarity of elements and structures, justifications and characteristic sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .evaluator import evaluate
from .structures import StructurePair
from .syntax import Y, Bounds, FormulaError, NonConjunctiveError, format_formula, free_vars, validate_conjunctive
from .typelab import TypeUniverse, _bits, shared_view, type_universe, witness_rank

FRAGMENTS = ("c", "g")


@dataclass
class Verdict:
    relation: str
    left: str
    right: str
    a: str | None
    b: str | None
    holds: bool
    bounds: Bounds
    engine: str
    fragment: str = "c"
    dominator: str | None = None
    separating_formula: object = None
    inclusion: bool | None = None
    failing_direction: str | None = None
    justifications: list = field(default_factory=list)
    stabilized: bool = False
    witness_map: dict | None = None
    parts: tuple = ()

    def __bool__(self):
        return self.holds

    @property
    def symbol(self) -> str:
        return {"lesssim": "<~", "approx": "~~", "struct-lesssim": "<~", "struct-approx": "~~"}[self.relation]

    def describe(self) -> str:
        neg = "" if self.holds else "not "
        if self.a is None:
            head = f"{self.left} {neg}{self.symbol} {self.right}"
        else:
            head = f"({self.left},{self.right}) |= {self.a} {neg}{self.symbol} {self.b}"
        lines = [f"{head}   [bounds {self.bounds}, engine {self.engine}, fragment {self.fragment}, stabilized {str(self.stabilized).lower()}]"]
        if self.failing_direction:
            lines.append(f"  fails {self.failing_direction}")
        if self.dominator is not None:
            lines.append(f"  dominated by {self.dominator}")
        if self.separating_formula is not None:
            lines.append(f"  separating formula: {format_formula(self.separating_formula, pretty=True)}")
        if self.witness_map:
            for k, v in self.witness_map.items():
                lines.append(f"  {k} -> {v if v is not None else '(no partner)'}")
        for phi in self.justifications:
            lines.append(f"  justification: {format_formula(phi, pretty=True)}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        out = {
            "relation": self.relation,
            "left": self.left if self.a is None else {"structure": self.left, "element": self.a},
            "right": self.right if self.b is None else {"structure": self.right, "element": self.b},
            "holds": self.holds,
            "bounds": self.bounds.as_dict(),
            "engine": self.engine,
            "fragment": self.fragment,
            "justifications": [format_formula(p, pretty=True) for p in self.justifications],
            "stabilized": bool(self.stabilized),
        }
        if self.dominator is not None:
            out["dominator"] = self.dominator
        if self.separating_formula is not None:
            out["separating_formula"] = format_formula(self.separating_formula, pretty=True)
        if self.failing_direction is not None:
            out["failing_direction"] = self.failing_direction
        if self.witness_map is not None:
            out["witness_map"] = dict(self.witness_map)
        return out


def universe(pair: StructurePair, bounds: Bounds | None = None, engine: str = "enum", fragment: str = "c", **kw) -> TypeUniverse:
    """Type universe for the requested fragment ("c" conjunctive, "g" generalization)."""
    if fragment == "g":
        from .gsim import g_universe

        return g_universe(pair, bounds, max_formulas=kw.get("max_formulas"))
    if fragment != "c":
        raise ValueError(f"unknown fragment {fragment!r}")
    return type_universe(pair, bounds, engine, **kw)


def _bumped(bounds: Bounds, engine: str, fragment: str) -> Bounds:
    if engine == "enum" and fragment == "c":
        return bounds.replace(q=bounds.q + 1)
    return bounds.replace(t=bounds.t + 1)


def lesssim_in(u: TypeUniverse, a: str, b: str, sample: int = 5) -> Verdict:
    """Decide ``a <~ b`` on an already computed universe."""
    pair = u.pair
    view = shared_view(u, a, b)
    S = view.mask
    for b2 in pair.right.domain:
        if b2 == b or (b2 == a and pair.left_in_right(a)):
            continue
        S2 = u.shared(a, b2)
        if S & ~S2 == 0 and S2 != S:
            sep = min(_bits(S2 & ~S), key=lambda i: witness_rank(u.witness(i)))
            return Verdict(
                "lesssim", pair.left.name, pair.right.name, a, b, False, u.bounds, u.engine, u.fragment,
                dominator=b2, separating_formula=u.witness(sep), inclusion=True,
            )
    just = [u.witness(i) for i in _bits(S)[:sample]]
    return Verdict("lesssim", pair.left.name, pair.right.name, a, b, True, u.bounds, u.engine, u.fragment, justifications=just)


def lesssim(pair: StructurePair, a: str, b: str, bounds: Bounds | None = None, engine: str = "enum",
            fragment: str = "c", stability: bool = True, sample: int = 5, **kw) -> Verdict:
    """``(A,B) |= a <~ b`` at the given bounds.

    On failure the verdict names the first dominating ``b'`` (domain order) and
    the canonically least witness of T(a,b') \\ T(a,b).
    """
    bounds = bounds or Bounds()
    verdict = lesssim_in(universe(pair, bounds, engine, fragment, **kw), a, b, sample)
    if stability:
        again = lesssim_in(universe(pair, _bumped(bounds, engine, fragment), engine, fragment, **kw), a, b, sample)
        verdict.stabilized = again.holds == verdict.holds
    return verdict


def approx(pair: StructurePair, a: str, b: str, bounds: Bounds | None = None, engine: str = "enum",
           fragment: str = "c", stability: bool = True, sample: int = 5, **kw) -> Verdict:
    """``(A,B) |= a ~~ b``: a <~ b in (A,B) and b <~ a in (B,A)."""
    bounds = bounds or Bounds()
    fwd = lesssim(pair, a, b, bounds, engine, fragment, stability, sample, **kw)
    bwd = lesssim(pair.swapped(), b, a, bounds, engine, fragment, stability, sample, **kw)
    failing = None if fwd.holds else "left-to-right"
    if failing is None and not bwd.holds:
        failing = "right-to-left"
    bad = fwd if not fwd.holds else bwd
    return Verdict(
        "approx", pair.left.name, pair.right.name, a, b, fwd.holds and bwd.holds, bounds, engine, fragment,
        dominator=None if failing is None else bad.dominator,
        separating_formula=None if failing is None else bad.separating_formula,
        inclusion=None if failing is None else bad.inclusion,
        failing_direction=failing,
        justifications=fwd.justifications if failing is None else [],
        stabilized=fwd.stabilized and bwd.stabilized,
        parts=(fwd, bwd),
    )


def lesssim_matrix(u: TypeUniverse) -> dict[tuple[str, str], bool]:
    return {(a, b): lesssim_in(u, a, b, 0).holds for a in u.pair.left.domain for b in u.pair.right.domain}


def approx_matrix(pair: StructurePair, bounds: Bounds | None = None, engine: str = "enum", fragment: str = "c", **kw) -> dict[tuple[str, str], bool]:
    u = universe(pair, bounds, engine, fragment, **kw)
    fwd = lesssim_matrix(u)
    bwd = lesssim_matrix(u.swapped())
    return {(a, b): fwd[a, b] and bwd[b, a] for a, b in fwd}


def _struct_direction(pair, bounds, engine, fragment, via, kw):
    u = universe(pair, bounds, engine, fragment, **kw)
    if via == "lesssim":
        rel = lesssim_matrix(u)
    else:
        fwd = lesssim_matrix(u)
        bwd = lesssim_matrix(u.swapped())
        rel = {k: fwd[k] and bwd[k[1], k[0]] for k in fwd}
    partner = {}
    for a in pair.left.domain:
        partner[a] = next((b for b in pair.right.domain if rel[a, b]), None)
    return partner


def struct_sim(pair: StructurePair, bounds: Bounds | None = None, engine: str = "enum", fragment: str = "c",
               via: str = "approx", stability: bool = True, **kw) -> Verdict:
    """``A ~~ B``: every element on each side has a similar partner on the other side.

    ``via="lesssim"`` uses element-wise ``<~`` instead of ``~~`` inside the definition.
    """
    bounds = bounds or Bounds()
    if via not in ("approx", "lesssim"):
        raise ValueError("via must be 'approx' or 'lesssim'")

    def run(bd):
        fwd = _struct_direction(pair, bd, engine, fragment, via, kw)
        bwd = _struct_direction(pair.swapped(), bd, engine, fragment, via, kw)
        return fwd, bwd

    fwd, bwd = run(bounds)
    l2r = all(v is not None for v in fwd.values())
    r2l = all(v is not None for v in bwd.values())
    parts = (
        Verdict("struct-lesssim", pair.left.name, pair.right.name, None, None, l2r, bounds, engine, fragment, witness_map=fwd),
        Verdict("struct-lesssim", pair.right.name, pair.left.name, None, None, r2l, bounds, engine, fragment, witness_map=bwd),
    )
    failing = None if l2r else "left-to-right"
    if failing is None and not r2l:
        failing = "right-to-left"
    stable = False
    if stability:
        f2, b2 = run(_bumped(bounds, engine, fragment))
        stable = (all(v is not None for v in f2.values()), all(v is not None for v in b2.values())) == (l2r, r2l)
    return Verdict(
        "struct-approx", pair.left.name, pair.right.name, None, None, l2r and r2l, bounds, engine, fragment,
        failing_direction=failing, witness_map=fwd, stabilized=stable, parts=parts,
    )


# --- characteristic justifications -------------------------------------------


@dataclass
class CharacteristicVerdict:
    holds: bool
    failed_condition: int | None = None
    offender: object = None

    def __bool__(self):
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return "characteristic"
        off = format_formula(self.offender, pretty=True) if self.failed_condition == 1 else self.offender
        return f"not characteristic: condition {self.failed_condition} fails at {off}"


def _check_in_fragment(phi):
    report = validate_conjunctive(phi)
    if not report.ok:
        raise NonConjunctiveError(report.violations)
    if not free_vars(phi) <= {Y}:
        raise FormulaError(f"justification {format_formula(phi)} has free variables other than y")


def is_characteristic(pair: StructurePair, a: str, b: str, J: Iterable) -> CharacteristicVerdict:
    """Exact check (by evaluation) that J pins down ``b`` as the partner of ``a``."""
    J = list(J)
    for phi in J:
        _check_in_fragment(phi)
    for phi in J:
        if not (evaluate(pair.left, phi, {Y: a}) and evaluate(pair.right, phi, {Y: b})):
            return CharacteristicVerdict(False, 1, phi)
    for b2 in pair.right.domain:
        if b2 == b or (b2 == a and pair.left_in_right(a)):
            continue
        if all(evaluate(pair.right, phi, {Y: b2}) for phi in J):
            return CharacteristicVerdict(False, 2, b2)
    return CharacteristicVerdict(True)


def find_characteristic(pair: StructurePair, a: str, b: str, bounds: Bounds | None = None, max_set_size: int = 2,
                        engine: str = "enum", fragment: str = "c", **kw) -> list | None:
    """Smallest characteristic set drawn from the bounded justifications, or None.

    None only means nothing was found within the bounds.
    """
    if max_set_size < 1:
        raise ValueError("max_set_size must be >= 1")
    u = universe(pair, bounds, engine, fragment, **kw)
    R = pair.right
    others = 0
    for k, b2 in enumerate(R.domain):
        if b2 != b and not (b2 == a and pair.left_in_right(a)):
            others |= 1 << k
    candidates = _bits(u.shared(a, b))
    for size in range(0, max_set_size + 1):
        for combo in itertools.combinations(candidates, size):
            alive = others
            for i in combo:
                alive &= u.ext_right[i]
            if alive == 0:
                J = [u.witness(i) for i in combo]
                if is_characteristic(pair, a, b, J):
                    return J
    return None
