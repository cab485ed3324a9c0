"""``typesim`` command line: check, type, compare, justify, verify, search."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

from .explorer import PROPERTIES, SEARCHES, classify, search_counterexample, verify_theorem
from .similarity import approx, find_characteristic, lesssim, lesssim_in, struct_sim, universe
from .structures import StructureError, StructurePair, load_structure_file, parse_signature
from .syntax import Bounds, FormulaError, Signature, format_formula
from .typelab import ResourceLimitError, _bits, type_view

EXIT_OK, EXIT_FAILS, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

DEFAULT_SIZES = {"fit": (1, 5), "lemma": (1, 5), "sit": (1, 4), "symmetry": (1, 4), "single-reflexivity": (1, 5)}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    subcommand: str
    paths: list[str] = field(default_factory=list)
    bounds: Bounds = field(default_factory=Bounds)
    engine: str = "enum"
    fragment: str = "c"
    identity: bool = True
    output: str = "text"
    seed: int = 0
    max_formulas: int | None = None
    element_params: bool = False
    struct_via: str = "approx"
    strict: bool = False

    @property
    def universe_kw(self) -> dict:
        kw = {}
        if self.max_formulas is not None:
            kw["max_formulas"] = self.max_formulas
        if self.element_params:
            kw["element_params"] = True
        return kw


def _bounds_arg(text: str) -> Bounds:
    try:
        return Bounds.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _pairs_arg(text: str) -> list[tuple[str, str]]:
    out = []
    for item in text.split(","):
        a, sep, b = item.strip().partition(":")
        if not sep or not a or not b:
            raise argparse.ArgumentTypeError(f"expected a:b, got {item!r}")
        out.append((a, b))
    return out


def _sizes_arg(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("sizes must look like lo,hi") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError("sizes need 1 <= lo <= hi")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bounds", type=_bounds_arg, default=Bounds(), help="q,c,t,v (default 2,2,1,2)")
    common.add_argument("--engine", choices=("enum", "closure"), default="enum")
    common.add_argument("--fragment", choices=("c", "g"), default="c")
    common.add_argument("--distinct-domains", action="store_true", help="never identify equal labels across structures")
    common.add_argument("--struct-via-lesssim", action="store_true", help="use <~ instead of ~~ inside structure similarity")
    common.add_argument("--element-params", action="store_true", help="add constants for shared element labels")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-formulas", type=int, default=None)
    common.add_argument("--assert", dest="strict", action="store_true", help="exit 1 when the relation does not hold")

    parser = argparse.ArgumentParser(prog="typesim", description="Bounded type-based similarity of finite structures.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("check", parents=[common], help="validate structure files")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("type", parents=[common], help="dump the bounded type of an element")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right")
    p.add_argument("--element", required=True)
    p.add_argument("--side", choices=("left", "right"), default="left")

    p = sub.add_parser("compare", parents=[common], help="element or structure similarity")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--pairs", type=_pairs_arg)
    p.add_argument("--relation", choices=("lesssim", "approx"), default="lesssim")

    p = sub.add_parser("justify", parents=[common], help="justifications and characteristic sets")
    p.add_argument("file")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--pair", type=_pairs_arg, required=True)
    p.add_argument("--characteristic", action="store_true")
    p.add_argument("--max-set-size", type=int, default=2)

    p = sub.add_parser("verify", parents=[common], help="randomized theorem suites")
    p.add_argument("--property", choices=PROPERTIES + ("isomorphism-lemma", "reflexivity"), required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--sizes", type=_sizes_arg)
    p.add_argument("--sig", action="append", help="signature such as 'fun f:1' (repeatable)")

    p = sub.add_parser("search", parents=[common], help="exhaustive counterexample search or classification")
    p.add_argument("--property", choices=SEARCHES)
    p.add_argument("--classify", action="store_true")
    p.add_argument("--sig", default="fun f:1")
    p.add_argument("--max-size", type=int, default=3)
    return parser


def config_from(ns: argparse.Namespace) -> CliConfig:
    paths = getattr(ns, "files", None) or ([ns.file] if getattr(ns, "file", None) else [])
    if ns.max_formulas is not None and ns.max_formulas < 1:
        raise UsageError("--max-formulas must be positive")
    return CliConfig(
        subcommand=ns.subcommand, paths=paths, bounds=ns.bounds, engine=ns.engine, fragment=ns.fragment,
        identity=not ns.distinct_domains, output=ns.format, seed=ns.seed, max_formulas=ns.max_formulas,
        element_params=ns.element_params, struct_via="lesssim" if ns.struct_via_lesssim else "approx", strict=ns.strict,
    )


def resolve_path(path: str) -> str:
    """A path on disk, or the name of a bundled sample file."""
    if os.path.exists(path):
        return path
    bundled = resources.files("typesim") / "data" / os.path.basename(path)
    if bundled.is_file():
        return str(bundled)
    raise UsageError(f"file not found: {path}")


def _load(path: str):
    return load_structure_file(resolve_path(path))


def _pair(cfg: CliConfig, sf, left: str, right: str) -> StructurePair:
    try:
        return StructurePair(sf[left], sf[right], identity=cfg.identity)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _element(S, label: str):
    if label not in S.index:
        raise UsageError(f"{label!r} is not an element of {S.name}")


# --- subcommands -----------------------------------------------------------


def cmd_check(cfg: CliConfig, ns) -> tuple[dict, str, bool]:
    files, lines = [], []
    for path in cfg.paths:
        sf = _load(path)
        entry = {
            "path": os.path.basename(path),
            "signature": sf.sig.describe(),
            "structures": [{"name": n, "size": sf[n].size} for n in sf.names()],
        }
        files.append(entry)
        lines.append(f"{entry['path']}: ok, {entry['signature']}")
        lines += [f"  {s['name']}: {s['size']} elements" for s in entry["structures"]]
    return {"command": "check", "files": files}, "\n".join(lines), True


def cmd_type(cfg: CliConfig, ns) -> tuple[dict, str, bool]:
    sf = _load(cfg.paths[0])
    pair = _pair(cfg, sf, ns.left, ns.right or ns.left)
    _element(pair.left if ns.side == "left" else pair.right, ns.element)
    u = universe(pair, cfg.bounds, cfg.engine, cfg.fragment, **cfg.universe_kw)
    view = type_view(u, ns.element, ns.side)
    structure = pair.left.name if ns.side == "left" else pair.right.name
    lines = [f"type of {ns.element} in {structure} (pair {pair.left.name},{pair.right.name}; bounds {cfg.bounds}, "
             f"engine {u.engine}, fragment {u.fragment}): {len(view)} classes"]
    lines += [f"  [{fp.index}] {format_formula(fp.witness, pretty=True)}" for fp in view.fingerprints]
    return {"command": "type", "type": view.to_json()}, "\n".join(lines), True


def cmd_compare(cfg: CliConfig, ns) -> tuple[dict, str, bool]:
    sf = _load(cfg.paths[0])
    pair = _pair(cfg, sf, ns.left, ns.right)
    kw = cfg.universe_kw
    if ns.pairs:
        fn = lesssim if ns.relation == "lesssim" else approx
        verdicts = []
        for a, b in ns.pairs:
            _element(pair.left, a)
            _element(pair.right, b)
            verdicts.append(fn(pair, a, b, cfg.bounds, cfg.engine, cfg.fragment, **kw))
        text = "\n".join(v.describe() for v in verdicts)
        return {"command": "compare", "verdicts": [v.to_json() for v in verdicts]}, text, all(v.holds for v in verdicts)
    u = universe(pair, cfg.bounds, cfg.engine, cfg.fragment, **kw)
    fwd, bwd = u, u.swapped()
    matrix = {}
    for a in pair.left.domain:
        row = {}
        for b in pair.right.domain:
            le = lesssim_in(fwd, a, b, 0).holds
            ge = lesssim_in(bwd, b, a, 0).holds
            row[b] = "~~" if le and ge else "<~" if le else "~>" if ge else "."
        matrix[a] = row
    verdict = struct_sim(pair, cfg.bounds, cfg.engine, cfg.fragment, via=cfg.struct_via, **kw)
    width = max(len(x) for x in (*pair.left.domain, *pair.right.domain, "~~"))
    lines = [" " * width + " | " + " ".join(b.ljust(width) for b in pair.right.domain)]
    lines.append("-" * len(lines[0]))
    lines += [a.ljust(width) + " | " + " ".join(matrix[a][b].ljust(width) for b in pair.right.domain) for a in pair.left.domain]
    lines.append(verdict.describe())
    data = {"command": "compare", "matrix": matrix, "verdict": verdict.to_json()}
    return data, "\n".join(lines), verdict.holds


def cmd_justify(cfg: CliConfig, ns) -> tuple[dict, str, bool]:
    sf = _load(cfg.paths[0])
    pair = _pair(cfg, sf, ns.left, ns.right)
    if len(ns.pair) != 1:
        raise UsageError("--pair takes exactly one a:b")
    a, b = ns.pair[0]
    _element(pair.left, a)
    _element(pair.right, b)
    kw = cfg.universe_kw
    if ns.characteristic:
        if ns.max_set_size < 1:
            raise UsageError("--max-set-size must be >= 1")
        J = find_characteristic(pair, a, b, cfg.bounds, ns.max_set_size, cfg.engine, cfg.fragment, **kw)
        shown = None if J is None else [format_formula(phi, pretty=True) for phi in J]
        if shown is None:
            text = f"no characteristic set of size <= {ns.max_set_size} within bounds {cfg.bounds}"
        elif not shown:
            text = "(empty set: b is the only candidate partner)"
        else:
            text = "\n".join(shown)
        data = {"command": "justify", "pair": [a, b], "characteristic": shown, "bounds": cfg.bounds.as_dict(),
                "engine": cfg.engine, "fragment": cfg.fragment}
        return data, text, J is not None
    u = universe(pair, cfg.bounds, cfg.engine, cfg.fragment, **kw)
    verdict = lesssim_in(u, a, b, sample=0)
    formulas = [format_formula(u.witness(i), pretty=True) for i in _bits(u.shared(a, b))]
    lines = [verdict.describe(), f"justifications ({len(formulas)} classes):"] + [f"  {f}" for f in formulas]
    data = {"command": "justify", "pair": [a, b], "verdict": verdict.to_json(), "justifications": formulas}
    return data, "\n".join(lines), verdict.holds


def _signatures(texts) -> list[Signature]:
    if not texts:
        return [Signature.of({"f": 1}), Signature.of(relations={"R": 2})]
    try:
        return [parse_signature(t) for t in texts]
    except (StructureError, ValueError) as exc:
        raise UsageError(f"bad signature: {exc}") from None


def cmd_verify(cfg: CliConfig, ns) -> tuple[dict, str, bool]:
    if ns.trials < 1:
        raise UsageError("--trials must be >= 1")
    prop = {"isomorphism-lemma": "lemma", "reflexivity": "single-reflexivity"}.get(ns.property, ns.property)
    sizes = ns.sizes or DEFAULT_SIZES[prop]
    report = verify_theorem(prop, _signatures(ns.sig), ns.trials, sizes, cfg.bounds, cfg.seed, cfg.engine)
    return {"command": "verify", "report": report.to_json()}, report.describe(), report.ok


def cmd_search(cfg: CliConfig, ns) -> tuple[dict, str, bool]:
    sig = _signatures([ns.sig])[0]
    if ns.max_size < 1:
        raise UsageError("--max-size must be >= 1")
    if ns.classify:
        data = classify(sig, ns.max_size, cfg.bounds, cfg.engine)
        lines = [f"classification of {data['signature']} up to size {ns.max_size}:"]
        for key, counts in data["counts"].items():
            lines.append(f"  {key}: " + ", ".join(f"size {n}: {c}" for n, c in counts.items()))
        return {"command": "search", "classification": data}, "\n".join(lines), True
    if not ns.property:
        raise UsageError("search needs --property or --classify")
    result = search_counterexample(ns.property, sig, ns.max_size, cfg.bounds, cfg.engine)
    return {"command": "search", "result": result.to_json()}, result.describe(), result.found


COMMANDS = {
    "check": cmd_check, "type": cmd_type, "compare": cmd_compare,
    "justify": cmd_justify, "verify": cmd_verify, "search": cmd_search,
}


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = config_from(ns)
        data, text, holds = COMMANDS[cfg.subcommand](cfg, ns)
    except ResourceLimitError as exc:
        print(f"typesim: resource limit: {exc}", file=err)
        return EXIT_RESOURCE
    except (UsageError, StructureError, FormulaError, OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"typesim: error: {msg}", file=err)
        return EXIT_USAGE
    if cfg.output == "json":
        out.write(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(text + "\n")
    return EXIT_FAILS if cfg.strict and not holds else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
