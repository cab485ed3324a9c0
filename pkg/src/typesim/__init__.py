"""Bounded type-based similarity of elements of finite first-order structures."""

from .evaluator import EvaluationError, ExtensionTable, eval_term, evaluate, extension_table, satisfying_elements
from .explorer import (
    TrialReport, SearchResult, classify, enumerate_structures, random_structure, search_counterexample, verify_theorem,
)
from .gsim import enumerate_terms, g_approx, g_lesssim, g_universe, gformula_of, is_gformula
from .parser import parse_fo, parse_formula, parse_term
from .similarity import (
    CharacteristicVerdict, Verdict, approx, approx_matrix, find_characteristic, is_characteristic, lesssim,
    lesssim_in, lesssim_matrix, struct_sim, universe,
)
from .structures import (
    Mapping, Structure, StructureError, StructurePair, check_mapping, format_structure, format_structure_file,
    load_structure_file, parse_signature, parse_structure, parse_structure_file, relabel,
)
from .syntax import (
    And, App, Bounds, Eq, Exists, Forall, FormulaError, NonConjunctiveError, Rel, Signature, Var,
    format_formula, free_vars, quantifier_depth, validate_conjunctive,
)
from .typelab import (
    Fingerprint, ResourceLimitError, TypeUniverse, TypeView, ctype, enumerate_formulas, shared_type,
    type_included, type_preorder, type_universe,
)

__version__ = "0.1.0"
