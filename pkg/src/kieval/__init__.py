"""Group-aware evaluation of document key information extraction."""

__version__ = "0.1.0"

from .ingest import DatasetFile, IngestError, load_dataset, pair_documents, parse_dataset
from .matching import brute_force_match, label_entities, match_groups, matching_score
from .metrics import (
    aggregate,
    correction_costs,
    entity_statistics,
    evaluate_pairs,
    group_statistics,
    kieval_aligned,
    kieval_entity_f1,
    kieval_group_f1,
    legacy_entity_f1,
)
from .model import (
    NONGROUP,
    CountLedger,
    Counts,
    DocumentExtraction,
    EntityGroup,
    EvalConfig,
    ExtractedEntity,
    F1Triple,
    GroupMatchResult,
    Label,
    MetricReport,
    validate_document,
)
from .rpa import SweepPoint, knee_point, sweep
