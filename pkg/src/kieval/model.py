"""Domain types shared by ingestion, matching, metrics and the threshold sweep."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union


class _Marker(enum.Enum):
    NONGROUP = "NONGROUP"

    def __repr__(self) -> str:
        return "NONGROUP"


#: Reserved group type of the bucket holding every ungrouped entity.
#: It is an enum member rather than a string so that a user group type
#: spelled "nongroup" can never collide with it.
NONGROUP = _Marker.NONGROUP

GroupType = Union[str, _Marker]


class Label(str, enum.Enum):
    """Alignment label attached to every prediction and ground-truth entity."""

    TP = "TP"
    SUBS = "SUBS"
    ADD = "ADD"
    DEL = "DEL"


class Normalization(str, enum.Enum):
    NONE = "none"
    TRIM = "trim"
    CASEFOLD = "casefold"
    TRIM_CASEFOLD = "trim+casefold"


class MissingDocPolicy(str, enum.Enum):
    ERROR = "error"
    TREAT_AS_EMPTY = "treat_as_empty"


@dataclass(frozen=True)
class ExtractedEntity:
    entity_type: str
    value: str
    confidence: Optional[float] = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.entity_type, self.value)


@dataclass(frozen=True)
class EntityGroup:
    group_type: GroupType
    entities: tuple[ExtractedEntity, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.entities, tuple):
            object.__setattr__(self, "entities", tuple(self.entities))

    @property
    def is_nongroup(self) -> bool:
        return self.group_type is NONGROUP

    def __len__(self) -> int:
        return len(self.entities)


@dataclass(frozen=True)
class DocumentExtraction:
    """All groups of one document, ground truth or prediction.

    The NONGROUP bucket always sits at ``groups[0]``; an empty one is
    inserted when the caller does not supply it.
    """

    doc_id: str
    groups: tuple[EntityGroup, ...] = ()

    def __post_init__(self) -> None:
        groups = tuple(self.groups)
        if not groups or not groups[0].is_nongroup:
            groups = (EntityGroup(NONGROUP),) + groups
        object.__setattr__(self, "groups", groups)

    @classmethod
    def empty(cls, doc_id: str) -> "DocumentExtraction":
        return cls(doc_id)

    def entities(self):
        """Yield ``(group_index, entity_index, entity)`` in document order."""
        for gi, group in enumerate(self.groups):
            for ei, ent in enumerate(group.entities):
                yield gi, ei, ent

    @property
    def n_entities(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def n_grouped(self) -> int:
        """Number of groups other than the NONGROUP bucket."""
        return sum(1 for g in self.groups if not g.is_nongroup)


@dataclass(frozen=True)
class EvalConfig:
    normalization: Normalization = Normalization.NONE
    missing_doc_policy: MissingDocPolicy = MissingDocPolicy.ERROR
    tau_grid: Optional[tuple[float, ...]] = None
    infer_group_type: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        object.__setattr__(self, "missing_doc_policy", MissingDocPolicy(self.missing_doc_policy))
        if self.tau_grid is not None:
            grid = tuple(float(t) for t in self.tau_grid)
            if not grid:
                raise ValueError("tau_grid must not be empty")
            if any(t < 0.0 or t > 1.0 for t in grid):
                raise ValueError("tau_grid values must lie in [0, 1]")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("tau_grid must be strictly increasing")
            object.__setattr__(self, "tau_grid", grid)


EntityRef = tuple[int, int]  # (group index, entity index) within one document


@dataclass(frozen=True)
class Alignment:
    """One row of the entity alignment: a prediction, a ground truth, or both."""

    label: Label
    pred: Optional[EntityRef]
    gt: Optional[EntityRef]
    entity_type: str


@dataclass(frozen=True)
class GroupMatchResult:
    pred: DocumentExtraction
    gt: DocumentExtraction
    pairs: tuple[tuple[int, int], ...]
    pair_scores: tuple[int, ...]
    alignments: tuple[Alignment, ...]
    unmatched_pred_groups: tuple[int, ...]
    unmatched_gt_groups: tuple[int, ...]

    @property
    def total_score(self) -> int:
        return sum(self.pair_scores)

    def pred_labels(self) -> dict[EntityRef, Label]:
        return {a.pred: a.label for a in self.alignments if a.pred is not None}

    def gt_labels(self) -> dict[EntityRef, Label]:
        return {a.gt: a.label for a in self.alignments if a.gt is not None}


COUNT_FIELDS = ("tp", "fp", "fn", "subs", "add", "del")


@dataclass
class Counts:
    """TP/FP/FN and correction counts for one slice of the evaluation."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    subs: int = 0
    add: int = 0
    dele: int = 0

    @property
    def error(self) -> int:
        return self.subs + self.add + self.dele

    def merge(self, other: "Counts") -> "Counts":
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        self.subs += other.subs
        self.add += other.add
        self.dele += other.dele
        return self

    def as_dict(self) -> dict[str, int]:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "subs": self.subs,
            "add": self.add,
            "del": self.dele,
            "error": self.error,
        }


@dataclass
class CountLedger:
    overall: Counts = field(default_factory=Counts)
    per_type: dict[str, Counts] = field(default_factory=dict)
    per_group_type: dict[GroupType, Counts] = field(default_factory=dict)
    # group-level TP/FP/FN, keyed the same way as per_group_type
    group_tp: int = 0
    group_fp: int = 0
    group_fn: int = 0
    per_group_type_groups: dict[GroupType, list[int]] = field(default_factory=dict)
    has_groups: bool = False

    def merge(self, other: "CountLedger") -> "CountLedger":
        self.overall.merge(other.overall)
        for key, counts in other.per_type.items():
            self.per_type.setdefault(key, Counts()).merge(counts)
        for key, counts in other.per_group_type.items():
            self.per_group_type.setdefault(key, Counts()).merge(counts)
        for key, (tp, fp, fn) in other.per_group_type_groups.items():
            acc = self.per_group_type_groups.setdefault(key, [0, 0, 0])
            acc[0] += tp
            acc[1] += fp
            acc[2] += fn
        self.group_tp += other.group_tp
        self.group_fp += other.group_fp
        self.group_fn += other.group_fn
        self.has_groups = self.has_groups or other.has_groups
        return self


@dataclass(frozen=True)
class F1Triple:
    precision: float
    recall: float
    f1: float


@dataclass
class MetricReport:
    legacy_entity_f1: F1Triple
    kieval_entity_f1: F1Triple
    kieval_group_f1: Optional[F1Triple]  # None when no side has grouped entities
    kieval_aligned: float
    ledger: CountLedger
    legacy_counts: Counts
    n_documents: int = 0
    per_doc: Optional[list[tuple[str, "MetricReport"]]] = None


def validate_document(doc: DocumentExtraction) -> list[str]:
    """Return human-readable invariant violations; an empty list means clean."""
    problems: list[str] = []
    if not isinstance(doc.doc_id, str) or not doc.doc_id:
        problems.append("document id must be a non-empty string")
    where = doc.doc_id or "<no id>"
    buckets = [i for i, g in enumerate(doc.groups) if g.is_nongroup]
    if buckets != [0]:
        problems.append(
            f"{where}: expected exactly one NONGROUP bucket at index 0, found {len(buckets)} at {buckets}"
        )
    for gi, group in enumerate(doc.groups):
        if not group.is_nongroup:
            if not isinstance(group.group_type, str) or not group.group_type:
                problems.append(f"{where}: group {gi} has an empty group type")
            if not group.entities:
                problems.append(f"{where}: group {gi} ({group.group_type}) is empty")
        for ei, ent in enumerate(group.entities):
            if not ent.entity_type:
                problems.append(f"{where}: group {gi} entity {ei} has an empty entity type")
            if ent.confidence is not None and not (0.0 <= ent.confidence <= 1.0):
                problems.append(
                    f"{where}: group {gi} entity {ei} ({ent.entity_type}={ent.value!r}) "
                    f"confidence {ent.confidence} outside [0, 1]"
                )
    return problems
