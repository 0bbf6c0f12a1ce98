"""Coded private information retrieval.

Build and certify k-server PIR codes, run linear multi-server PIR protocols
over coded storage, and serve the result over TCP.

Indices are 0-based everywhere: message parts, code columns (servers),
database positions and protocol slots.
"""

from .arraycodes import ArrayCode, apir, array_retrieve, array_verify, example_2x25
from .bounds import lower_bound, table_closure
from .combinators import balanced_multiplicity_code, concat, direct_sum, even_extend, puncture, shrink
from .constructions import build, cubic_code, constant_weight_code, majority_logic_15_7, steiner_code
from .emulation import CodedStore, Database, distribute, retrieve, retrieve_robust
from .gf import GF2, FieldMatrix, FieldSpec, gf, min_distance
from .oracle import max_pir_k
from .pircode import PirCode, RecoverySet, verify
from .protocols import LinearPirProtocol, RandomTape, privacy_audit, xor2, xork

__version__ = "0.1.0"

__all__ = [
    "GF2",
    "ArrayCode",
    "CodedStore",
    "Database",
    "FieldMatrix",
    "FieldSpec",
    "LinearPirProtocol",
    "PirCode",
    "RandomTape",
    "RecoverySet",
    "apir",
    "array_retrieve",
    "array_verify",
    "balanced_multiplicity_code",
    "build",
    "concat",
    "constant_weight_code",
    "cubic_code",
    "direct_sum",
    "distribute",
    "even_extend",
    "example_2x25",
    "gf",
    "lower_bound",
    "majority_logic_15_7",
    "max_pir_k",
    "min_distance",
    "privacy_audit",
    "puncture",
    "retrieve",
    "retrieve_robust",
    "shrink",
    "steiner_code",
    "table_closure",
    "verify",
    "xor2",
    "xork",
]
