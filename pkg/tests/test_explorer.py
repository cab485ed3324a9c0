import json

import pytest

from typesim.explorer import (
    classify, enumerate_structures, random_structure, search_counterexample, verify_theorem,
)
from typesim.similarity import approx, lesssim
from typesim.structures import StructurePair, check_mapping, parse_structure_file
from typesim.syntax import Bounds, Signature

F = Signature.of({"f": 1})
R2 = Signature.of(relations={"R": 2})


def test_random_structure_is_deterministic():
    assert random_structure(F, 4, 11) == random_structure(F, 4, 11)
    assert random_structure(R2, 3, 5, labels=["p", "q", "r"]).domain == ("p", "q", "r")


@pytest.mark.parametrize("sig,counts", [(F, [1, 3, 7, 19]), (R2, [2, 10, 104])])
def test_isomorphism_class_counts(sig, counts):
    # unlabeled functional graphs and unlabeled digraphs with loops
    assert [len(list(enumerate_structures(sig, n))) for n in range(1, len(counts) + 1)] == counts


def test_labelled_enumeration_count():
    assert len(list(enumerate_structures(F, 3, up_to_iso=False))) == 27


@pytest.mark.parametrize("prop,sizes", [
    ("fit", (1, 5)), ("lemma", (1, 5)), ("sit", (1, 4)), ("symmetry", (1, 4)), ("single-reflexivity", (1, 5)),
])
def test_theorem_suites_hold(prop, sizes):
    report = verify_theorem(prop, [F, R2], trials=30, sizes=sizes, seed=3)
    assert report.ok, report.describe()


def test_aliases_and_unknown_property():
    assert verify_theorem("reflexivity", F, trials=2).property == "single-reflexivity"
    with pytest.raises(ValueError):
        verify_theorem("nonsense", F)


def test_report_json_is_reproducible():
    a = verify_theorem("symmetry", [F, R2], trials=10, sizes=(1, 3), seed=9).to_json()
    b = verify_theorem("symmetry", [F, R2], trials=10, sizes=(1, 3), seed=9).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert "elapsed" not in a


def test_pair_reflexivity_search_reverifies():
    res = search_counterexample("pair-reflexivity-failure", F, 3)
    assert res.found
    A, B = res.structures
    a = res.elements["a"]
    for engine in ("enum", "closure"):
        assert not lesssim(StructurePair(A, B), a, a, engine=engine).holds
    # reproducer text re-parses to the same structures
    again = parse_structure_file(res.to_json()["structures"])
    assert list(again.structures.values()) == [A, B]


def test_transitivity_search():
    res = search_counterexample("transitivity-failure", R2, 2)
    assert res.found
    A, B, C = res.structures
    x, y, z = res.elements["a"], res.elements["b"], res.elements["c"]
    assert lesssim(StructurePair(A, B, identity=False), x, y).holds
    assert lesssim(StructurePair(B, C, identity=False), y, z).holds
    assert not lesssim(StructurePair(A, C, identity=False), x, z).holds


def test_hom_search():
    res = search_counterexample("hom-incompatibility", F, 2)
    assert res.found
    A, B = res.structures
    assert check_mapping(res.mapping, A, B, "hom")
    a = res.elements["a"]
    assert not approx(StructurePair(A, B), a, res.mapping(a)).holds


def test_search_size_guard():
    from typesim.typelab import ResourceLimitError
    with pytest.raises(ResourceLimitError):
        search_counterexample("hom-incompatibility", F, 9)


def test_classify_buckets_all_structures():
    data = classify(F, 3)
    total = sum(sum(c.values()) for c in data["counts"].values())
    assert total == 1 + 3 + 7
    assert all(key.split("+")[0] == "reflexive" for key in data["counts"])
