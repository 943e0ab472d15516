"""Inconsistency-tolerant querying of spatial databases.

Relations carry region-valued attributes; denial constraints forbid
certain topological relationships between tuples.  When the data breaks
the constraints, queries are answered against every minimal shrink-only
repair at once, or against a single "core" instance when the constraint
and query shapes make that shortcut sound.
"""

from .bench import BenchReport, BenchRow, run_benchmarks
from .constraints import (Comparison, CoreSIC, DenialSIC, RelAtom, SIC,
                          Violation, as_core_sic, find_violations,
                          is_consistent, normalize_core_sics, parse_sic,
                          parse_sics)
from .core import (ConflictSet, CoreInstance, conflict_sets, core_direct,
                   core_via_repairs, cqa_via_core)
from .errors import (ConstraintError, CorrelationError, EmptyGeometryError,
                     InvalidGeometryError, KeyViolationError,
                     OracleResolutionError, QueryError, RepairInvariantError,
                     SchemaError, SearchLimitExceeded, SpatialCQAError,
                     UnsupportedPredicateError)
from .geometry import (ALL_PREDICATES, BASE_PREDICATES, CONVERSE,
                       DERIVED_PREDICATES, GeometryConfig, Region,
                       base_relation, four_intersection, normalize_predicate,
                       region_key, topo)
from .model import (Correlation, Instance, RelationSchema, Schema,
                    SpatialTuple, delta_instances, delta_regions,
                    load_instance)
from .query import (AnswerRow, AnswerSet, JoinQuery, RangeQuery,
                    answer_table, cqa_via_repairs, eval_query, parse_query)
from .repair import (FIRST_ATOM, SECOND_ATOM, RepairLeaf, RepairNode,
                     RepairSet, VersionSet, apply_step, enumerate_repairs,
                     tr, tr_converse, validate_shrink_repair, versions)
from .sqlgen import emit_all, emit_core_sql
from .synth import gen_synthetic

__version__ = "0.1.0"

__all__ = [
    "ALL_PREDICATES", "AnswerRow", "AnswerSet", "BASE_PREDICATES",
    "BenchReport", "BenchRow", "CONVERSE", "Comparison", "ConflictSet",
    "ConstraintError", "CoreInstance", "CoreSIC", "Correlation",
    "CorrelationError", "DERIVED_PREDICATES", "DenialSIC",
    "EmptyGeometryError", "FIRST_ATOM", "GeometryConfig", "Instance",
    "InvalidGeometryError", "JoinQuery", "KeyViolationError",
    "OracleResolutionError", "QueryError", "RangeQuery", "Region",
    "RelAtom", "RelationSchema", "RepairInvariantError", "RepairLeaf",
    "RepairNode", "RepairSet", "SECOND_ATOM", "SIC", "Schema",
    "SchemaError", "SearchLimitExceeded", "SpatialCQAError", "SpatialTuple",
    "UnsupportedPredicateError", "VersionSet", "Violation", "answer_table",
    "apply_step", "as_core_sic", "base_relation", "conflict_sets",
    "core_direct", "core_via_repairs", "cqa_via_core", "cqa_via_repairs",
    "delta_instances", "delta_regions", "emit_all", "emit_core_sql",
    "enumerate_repairs", "eval_query", "find_violations",
    "four_intersection", "gen_synthetic", "is_consistent", "load_instance",
    "normalize_core_sics", "normalize_predicate", "parse_query", "parse_sic",
    "parse_sics", "region_key", "run_benchmarks", "topo", "tr",
    "tr_converse", "validate_shrink_repair", "versions",
]
