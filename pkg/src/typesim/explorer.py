"""Random and exhaustive small structures: theorem suites and counterexample search."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .similarity import approx, approx_matrix, lesssim, lesssim_in, lesssim_matrix
from .structures import Mapping, Structure, StructurePair, check_mapping, format_structure_file, relabel
from .syntax import Bounds, Signature
from .typelab import ResourceLimitError, enumerate_formulas, type_universe, universe_from_formulas

PROPERTIES = ("fit", "sit", "lemma", "symmetry", "single-reflexivity")
SEARCHES = ("pair-reflexivity-failure", "transitivity-failure", "hom-incompatibility")
_ALIASES = {"isomorphism-lemma": "lemma", "reflexivity": "single-reflexivity"}


def _labels(n: int, prefix: str = "") -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


def _from_codes(name: str, sig: Signature, domain: Sequence[str], funs: Sequence[tuple], rels: Sequence[frozenset]) -> Structure:
    fun_tables = tuple((sym, tuple(t)) for (sym, _), t in zip(sig.functions, funs))
    rel_tables = tuple((sym, frozenset(r)) for (sym, _), r in zip(sig.relations, rels))
    return Structure(name, sig, tuple(domain), fun_tables, rel_tables)


def random_structure(sig: Signature, size: int, seed: int, name: str = "S", labels: Sequence[str] | None = None) -> Structure:
    """Uniformly random total function tables and relations; deterministic per seed."""
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = random.Random(seed)
    funs = [tuple(rng.randrange(size) for _ in range(size**arity)) for _, arity in sig.functions]
    rels = [frozenset(t for t in itertools.product(range(size), repeat=arity) if rng.random() < 0.5) for _, arity in sig.relations]
    return _from_codes(name, sig, labels or _labels(size), funs, rels)


def _encode(sig, n, funs, rels, perm) -> tuple:
    out = []
    for (_, arity), table in zip(sig.functions, funs):
        new = [0] * len(table)
        for args in itertools.product(range(n), repeat=arity):
            src = 0
            dst = 0
            for x in args:
                src = src * n + x
                dst = dst * n + perm[x]
            new[dst] = perm[table[src]]
        out.append(tuple(new))
    for rel in rels:
        out.append(tuple(sorted(tuple(perm[x] for x in row) for row in rel)))
    return tuple(out)


def enumerate_structures(sig: Signature, size: int, name: str = "S", labels: Sequence[str] | None = None,
                         up_to_iso: bool = True) -> Iterator[Structure]:
    """All structures on ``size`` elements in canonical order, optionally one per iso class."""
    n = size
    fun_choices = [itertools.product(range(n), repeat=n**arity) for _, arity in sig.functions]
    rel_choices = []
    for _, arity in sig.relations:
        cells = list(itertools.product(range(n), repeat=arity))
        rel_choices.append([frozenset(c for c, bit in zip(cells, bits) if bit) for bits in itertools.product((0, 1), repeat=len(cells))])
    perms = list(itertools.permutations(range(n)))
    ident = tuple(range(n))
    for combo in itertools.product(*(list(c) for c in fun_choices), *rel_choices):
        funs = combo[: len(sig.functions)]
        rels = combo[len(sig.functions):]
        if up_to_iso:
            own = _encode(sig, n, funs, rels, ident)
            if any(_encode(sig, n, funs, rels, p) < own for p in perms):
                continue
        yield _from_codes(name, sig, labels or _labels(n), funs, rels)


@dataclass
class TrialReport:
    property: str
    trials: int
    violations: list = field(default_factory=list)
    elapsed: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self, include_elapsed: bool = False) -> dict:
        out = {"property": self.property, "trials": self.trials, "ok": self.ok, "violations": self.violations, "params": self.params}
        if include_elapsed:
            out["elapsed"] = self.elapsed
        return out

    def describe(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        lines = [f"{self.property}: {self.trials} trials, {status} ({self.elapsed:.2f}s)"]
        for v in self.violations[:5]:
            lines.append(f"  trial {v['trial']} (seed {v['seed']}): {v['detail']}")
        return "\n".join(lines)


def _sig_list(sig) -> list[Signature]:
    return [sig] if isinstance(sig, Signature) else list(sig)


def _permutation(rng: random.Random, labels: Sequence[str], fresh: Sequence[str] | None = None) -> dict[str, str]:
    target = list(fresh if fresh is not None else labels)
    rng.shuffle(target)
    return dict(zip(labels, target))


def verify_theorem(prop: str, sig, trials: int = 100, sizes: tuple[int, int] = (1, 5), bounds: Bounds | None = None,
                   seed: int = 0, engine: str = "enum") -> TrialReport:
    """Run a randomized suite for a property that must hold at any bounds.

    ``sig`` may be one signature or a list; trials cycle through the list.
    """
    prop = _ALIASES.get(prop.lower(), prop.lower())
    if prop not in PROPERTIES:
        raise ValueError(f"unsupported property {prop!r}; choose from {', '.join(PROPERTIES)}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bounds = bounds or Bounds()
    sigs = _sig_list(sig)
    check = _CHECKS[prop]
    report = TrialReport(prop, trials, params={
        "signatures": [s.describe() for s in sigs], "sizes": list(sizes), "bounds": bounds.as_dict(), "seed": seed, "engine": engine,
    })
    start = time.perf_counter()
    for i in range(trials):
        trial_seed = seed * 1_000_003 + i
        rng = random.Random(trial_seed)
        s = sigs[i % len(sigs)]
        n = rng.randint(*sizes)
        problem = check(rng, s, n, bounds, engine)
        if problem is not None:
            detail, structures = problem
            report.violations.append({
                "trial": i, "seed": trial_seed, "detail": detail,
                "structures": format_structure_file(structures),
            })
    report.elapsed = time.perf_counter() - start
    return report


def _iso_copy(rng, s, n, src="A", dst="B", prefix_src="", prefix_dst=None):
    A = random_structure(s, n, rng.randrange(2**32), name=src, labels=_labels(n, prefix_src))
    fresh = None if prefix_dst is None else _labels(n, prefix_dst)
    B, F = relabel(A, _permutation(rng, A.domain, fresh), name=dst)
    return A, B, F


def _check_fit(rng, s, n, bounds, engine):
    A, B, F = _iso_copy(rng, s, n)
    pair = StructurePair(A, B)
    m = approx_matrix(pair, bounds, engine)
    for a in A.domain:
        if not m[a, F(a)]:
            return f"{a} not similar to F({a}) = {F(a)}", [A, B]
    return None


def _check_lemma(rng, s, n, bounds, engine):
    A, B, F = _iso_copy(rng, s, n)
    u = type_universe(StructurePair(A, B), bounds, engine)
    for a in A.domain:
        if u.type_left[A.index[a]] != u.type_right[B.index[F(a)]]:
            return f"type of {a} differs from type of F({a}) = {F(a)}", [A, B]
    return None


def _check_sit(rng, s, n, bounds, engine):
    # disjoint labels everywhere, so the shared-element exception never fires
    A, C, F = _iso_copy(rng, s, n, "A", "C", "a", "c")
    B, D, G = _iso_copy(rng, s, rng.randint(1, n), "B", "D", "b", "d")
    before = approx_matrix(StructurePair(A, B), bounds, engine)
    after = approx_matrix(StructurePair(C, D), bounds, engine)
    for a in A.domain:
        for b in B.domain:
            if before[a, b] != after[F(a), G(b)]:
                return f"{a} ~~ {b} is {before[a, b]} but F({a}) ~~ G({b}) is {after[F(a), G(b)]}", [A, B, C, D]
    return None


def _check_symmetry(rng, s, n, bounds, engine):
    A = random_structure(s, n, rng.randrange(2**32), name="A")
    B = random_structure(s, rng.randint(1, n), rng.randrange(2**32), name="B")
    pair = StructurePair(A, B)
    fwd = approx_matrix(pair, bounds, engine)
    bwd = approx_matrix(pair.swapped(), bounds, engine, cache=False)
    for (a, b), v in fwd.items():
        if v != bwd[b, a]:
            return f"{a} ~~ {b} is {v} but the swapped query gives {bwd[b, a]}", [A, B]
    return None


def _check_single_reflexivity(rng, s, n, bounds, engine):
    A = random_structure(s, n, rng.randrange(2**32), name="A")
    m = approx_matrix(StructurePair(A, A), bounds, engine)
    for a in A.domain:
        if not m[a, a]:
            return f"{a} is not similar to itself", [A]
    return None


_CHECKS = {
    "fit": _check_fit,
    "sit": _check_sit,
    "lemma": _check_lemma,
    "symmetry": _check_symmetry,
    "single-reflexivity": _check_single_reflexivity,
}


# --- counterexample search ------------------------------------------------------


@dataclass
class SearchResult:
    property: str
    found: bool
    examined: int
    structures: list = field(default_factory=list)
    elements: dict = field(default_factory=dict)
    mapping: Mapping | None = None
    evidence: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "found": self.found,
            "examined": self.examined,
            "structures": format_structure_file(self.structures) if self.structures else None,
            "elements": self.elements,
            "mapping": dict(self.mapping.table) if self.mapping else None,
            "evidence": [v.to_json() for v in self.evidence],
            "params": self.params,
        }

    def describe(self) -> str:
        if not self.found:
            return f"{self.property}: exhausted after {self.examined} candidates"
        lines = [f"{self.property}: found after {self.examined} candidates"]
        lines += ["  " + l for l in format_structure_file(self.structures).splitlines()]
        if self.mapping:
            lines.append("  mapping: " + ", ".join(f"{k} -> {v}" for k, v in self.mapping.table))
        for v in self.evidence:
            lines += ["  " + l for l in v.describe().splitlines()]
        return "\n".join(lines)


def brute_force_universe(pair: StructurePair, bounds: Bounds):
    """Oracle route: syntactic enumeration plus direct evaluation, no fingerprint pruning."""
    return universe_from_formulas(pair, enumerate_formulas(pair.left.sig, bounds, sentences=True), bounds, label="brute-force")


def search_counterexample(prop: str, sig: Signature, max_size: int = 3, bounds: Bounds | None = None,
                          engine: str = "enum", max_candidates: int = 10**6) -> SearchResult:
    """Exhaustively look for the smallest witness of a failure property."""
    bounds = bounds or Bounds()
    if prop not in SEARCHES:
        raise ValueError(f"unsupported search {prop!r}; choose from {', '.join(SEARCHES)}")
    if max_size > 4:
        raise ResourceLimitError("exhaustive search is limited to structures of size <= 4")
    params = {"signature": sig.describe(), "max_size": max_size, "bounds": bounds.as_dict(), "engine": engine}
    return _SEARCH[prop](sig, max_size, bounds, engine, params, max_candidates)


def _guard(count, cap):
    if count > cap:
        raise ResourceLimitError(f"search examined more than {cap} candidates")


def _search_pair_reflexivity(sig, max_size, bounds, engine, params, cap):
    examined = 0
    for n in range(1, max_size + 1):
        lefts = list(enumerate_structures(sig, n, name="A"))
        rights = list(enumerate_structures(sig, n, name="B", up_to_iso=False))
        for A in lefts:
            for B in rights:
                examined += 1
                _guard(examined, cap)
                u = type_universe(StructurePair(A, B), bounds, engine)
                for a in A.domain:
                    if a in B.index and not _lesssim_holds(u, a, a):
                        pair = StructurePair(A, B)
                        evidence = [lesssim(pair, a, a, bounds, e, stability=False) for e in ("enum", "closure")]
                        return SearchResult("pair-reflexivity-failure", True, examined, [A, B], {"a": a}, None, evidence, params)
    return SearchResult("pair-reflexivity-failure", False, examined, params=params)


def _lesssim_holds(u, a, b) -> bool:
    return lesssim_in(u, a, b, 0).holds


def _search_transitivity(sig, max_size, bounds, engine, params, cap):
    reps = [S for n in range(1, max_size + 1) for S in enumerate_structures(sig, n)]
    role = {
        r: [_from_codes(r.upper(), sig, _labels(S.size, r), [t for _, t in S.fun_tables], [t for _, t in S.rel_tables]) for S in reps]
        for r in "abc"
    }
    mats: dict = {}

    def mat(i, j):
        if (i, j) not in mats:
            u = type_universe(StructurePair(role["a"][i], role["b"][j], identity=False), bounds, engine)
            mats[i, j] = {(x, y): v for (x, y), v in _index_matrix(u).items()}
        return mats[i, j]

    examined = 0
    for i, j, k in itertools.product(range(len(reps)), repeat=3):
        examined += 1
        _guard(examined, cap)
        ab, bc, ac = mat(i, j), mat(j, k), mat(i, k)
        for x in range(reps[i].size):
            for y in range(reps[j].size):
                if not ab[x, y]:
                    continue
                for z in range(reps[k].size):
                    if bc[y, z] and not ac[x, z]:
                        A, B, C = role["a"][i], role["b"][j], role["c"][k]
                        a, b, c = A.domain[x], B.domain[y], C.domain[z]
                        evidence = [
                            lesssim(StructurePair(A, B, False), a, b, bounds, engine, stability=False),
                            lesssim(StructurePair(B, C, False), b, c, bounds, engine, stability=False),
                            lesssim(StructurePair(A, C, False), a, c, bounds, engine, stability=False),
                        ]
                        return SearchResult("transitivity-failure", True, examined, [A, B, C], {"a": a, "b": b, "c": c}, None, evidence, params)
    return SearchResult("transitivity-failure", False, examined, params=params)


def _index_matrix(u) -> dict:
    m = lesssim_matrix(u)
    L, R = u.pair.left, u.pair.right
    return {(L.index[a], R.index[b]): v for (a, b), v in m.items()}


def _search_hom(sig, max_size, bounds, engine, params, cap):
    examined = 0
    for total in range(2, 2 * max_size + 1):
        for nb in range(1, max_size + 1):
            na = total - nb
            if not 1 <= na <= max_size:
                continue
            for A0 in enumerate_structures(sig, na):
                A = _from_codes("A", sig, _labels(na, "a"), [t for _, t in A0.fun_tables], [t for _, t in A0.rel_tables])
                for B0 in enumerate_structures(sig, nb):
                    B = _from_codes("B", sig, _labels(nb, "b"), [t for _, t in B0.fun_tables], [t for _, t in B0.rel_tables])
                    pair = StructurePair(A, B, identity=False)
                    sim = None
                    for image in itertools.product(B.domain, repeat=na):
                        examined += 1
                        _guard(examined, cap)
                        F = Mapping.of("A", "B", dict(zip(A.domain, image)))
                        if not check_mapping(F, A, B, "hom"):
                            continue
                        if sim is None:
                            sim = approx_matrix(pair, bounds, engine)
                        for a in A.domain:
                            if not sim[a, F(a)]:
                                evidence = [approx(pair, a, F(a), bounds, engine, stability=False)]
                                return SearchResult("hom-incompatibility", True, examined, [A, B], {"a": a, "F(a)": F(a)}, F, evidence, params)
    return SearchResult("hom-incompatibility", False, examined, params=params)


_SEARCH = {
    "pair-reflexivity-failure": _search_pair_reflexivity,
    "transitivity-failure": _search_transitivity,
    "hom-incompatibility": _search_hom,
}


def classify(sig: Signature, max_size: int = 3, bounds: Bounds | None = None, engine: str = "enum") -> dict:
    """Bucket structures (one per iso class) by whether similarity in them is reflexive / transitive.

    This only produces data; it does not characterize the buckets.
    """
    bounds = bounds or Bounds()
    buckets: dict[str, list[str]] = {}
    counts: dict[str, dict[int, int]] = {}
    for n in range(1, max_size + 1):
        for A in enumerate_structures(sig, n):
            m = approx_matrix(StructurePair(A, A), bounds, engine)
            reflexive = all(m[a, a] for a in A.domain)
            transitive = all(
                m[x, z] for x, y, z in itertools.product(A.domain, repeat=3) if m[x, y] and m[y, z]
            )
            key = ("reflexive" if reflexive else "non-reflexive") + "+" + ("transitive" if transitive else "non-transitive")
            buckets.setdefault(key, []).append(format_structure_file([A]))
            counts.setdefault(key, {}).setdefault(n, 0)
            counts[key][n] += 1
    return {
        "signature": sig.describe(), "max_size": max_size, "bounds": bounds.as_dict(), "engine": engine,
        "counts": {k: {str(n): c for n, c in sorted(v.items())} for k, v in sorted(counts.items())},
        "structures": {k: v for k, v in sorted(buckets.items())},
    }
