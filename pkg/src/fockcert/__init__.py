"""Certify nonclassicality of single-mode bosonic states from Fock-basis probabilities."""

from ._numerics import DimensionError, DomainError
from .completeness import ClassicalDecomposition, TripleVerdict, decide, decompose
from .criteria import (
    CertificationReport,
    CertifyOptions,
    CriterionVerdict,
    certify,
    k_infinity,
    klyshko,
    triple,
)
from .fockstates import FAMILIES, FactorialWeights, FockDistribution, make_family
from .majorization import IndexTuple, MajorizationPair, compare, enumerate_pairs, evaluate_pair

__all__ = [
    "CertificationReport",
    "CertifyOptions",
    "ClassicalDecomposition",
    "CriterionVerdict",
    "DimensionError",
    "DomainError",
    "FAMILIES",
    "FactorialWeights",
    "FockDistribution",
    "IndexTuple",
    "MajorizationPair",
    "TripleVerdict",
    "certify",
    "compare",
    "decide",
    "decompose",
    "enumerate_pairs",
    "evaluate_pair",
    "k_infinity",
    "klyshko",
    "make_family",
    "triple",
]
