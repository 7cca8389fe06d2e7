"""Finite experiments with 0-1 laws of structures built from a definable equivalence relation.

The pieces, bottom up:

* :mod:`asym.structures` finite relational structures and pair diagrams
* :mod:`asym.logic` first-order formulas, parser and evaluator
* :mod:`asym.compat` compatible Delta-systems and their validation
* :mod:`asym.generators` the sampler and exact age counts
* :mod:`asym.extension` extension axioms, estimates, back-and-forth
* :mod:`asym.meq` imaginary sorts for definable equivalence relations
* :mod:`asym.arithmetic` divisibility laws and span closures
* :mod:`asym.classify` classification of the limit theory
"""

__version__ = "0.1.0"

from .arithmetic import VectorGeometry, check_divisibility, closure_audit, exchange_check
from .classify import check_class_indiscernibility, classify_theory, find_indiscernible_complement
from .compat import ClassAssignment, DeltaSystem, Violation, induced_delta, pad, validate
from .extension import (
    AxiomReport,
    TupleProfile,
    back_and_forth,
    check_all_tau,
    check_sigma_xi,
    check_tau,
    estimate_almost_sure,
    extensions,
    profiles,
)
from .generators import count_age, ratio_table, sample_age_uniform, sample_kn
from .logic import evaluate, parse, to_text
from .meq import expand, relativize
from .structures import FiniteStructure, PairDiagram, UnaryDiagram, Vocabulary, enumerate_structures, pair_diagram

__all__ = [
    "AxiomReport",
    "ClassAssignment",
    "DeltaSystem",
    "FiniteStructure",
    "PairDiagram",
    "TupleProfile",
    "UnaryDiagram",
    "VectorGeometry",
    "Violation",
    "Vocabulary",
    "back_and_forth",
    "check_all_tau",
    "check_class_indiscernibility",
    "check_divisibility",
    "check_sigma_xi",
    "check_tau",
    "classify_theory",
    "closure_audit",
    "count_age",
    "enumerate_structures",
    "estimate_almost_sure",
    "evaluate",
    "exchange_check",
    "expand",
    "extensions",
    "find_indiscernible_complement",
    "induced_delta",
    "pad",
    "pair_diagram",
    "parse",
    "profiles",
    "ratio_table",
    "relativize",
    "sample_age_uniform",
    "sample_kn",
    "to_text",
    "validate",
]
