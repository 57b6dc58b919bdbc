"""Dataset file parsing, value normalization and document pairing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .model import (
    NONGROUP,
    DocumentExtraction,
    EntityGroup,
    EvalConfig,
    ExtractedEntity,
    MissingDocPolicy,
    Normalization,
)

_DOC_KEYS = {"id", "groups"}
_GROUP_KEYS = {"group_type", "entities"}
_ENTITY_KEYS = {"type", "value", "confidence"}


class IngestError(ValueError):
    """Raised for unreadable, malformed or schema-violating dataset input."""


class DatasetParseError(IngestError):
    def __init__(self, message: str, line: int, column: int, source: str = "<bytes>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


class DatasetSchemaError(IngestError):
    def __init__(self, message: str, doc_id: Optional[str] = None, field: Optional[str] = None):
        where = []
        if doc_id is not None:
            where.append(f"document {doc_id!r}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.doc_id = doc_id
        self.field = field


class UnpairedDocumentError(IngestError):
    def __init__(self, missing_in_pred: list[str], missing_in_gt: list[str]):
        parts = []
        if missing_in_pred:
            parts.append(f"no prediction for {', '.join(missing_in_pred)}")
        if missing_in_gt:
            parts.append(f"no ground truth for {', '.join(missing_in_gt)}")
        super().__init__("unpaired documents: " + "; ".join(parts))
        self.missing_in_pred = missing_in_pred
        self.missing_in_gt = missing_in_gt


@dataclass
class DatasetFile:
    documents: list[DocumentExtraction]
    source_path: str = "<bytes>"
    unknown_fields: int = 0
    _index: dict[str, DocumentExtraction] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._index = {}
        for doc in self.documents:
            if doc.doc_id in self._index:
                raise DatasetSchemaError("duplicate document id", doc_id=doc.doc_id, field="id")
            self._index[doc.doc_id] = doc

    def __getitem__(self, doc_id: str) -> DocumentExtraction:
        return self._index[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index

    @property
    def n_entities(self) -> int:
        return sum(d.n_entities for d in self.documents)


def normalize(value: str, mode: Union[Normalization, str]) -> str:
    mode = Normalization(mode)
    if mode in (Normalization.TRIM, Normalization.TRIM_CASEFOLD):
        value = value.strip()
    if mode in (Normalization.CASEFOLD, Normalization.TRIM_CASEFOLD):
        value = value.casefold()
        # casefold can expose new outer whitespace only for exotic code points;
        # strip again so that the combined mode stays idempotent
        if mode is Normalization.TRIM_CASEFOLD:
            value = value.strip()
    return value


def _infer_group_type(entities: list[ExtractedEntity], doc_id: str, gi: int) -> str:
    prefixes = {e.entity_type.split(".", 1)[0] for e in entities if "." in e.entity_type}
    if len(prefixes) != 1 or any("." not in e.entity_type for e in entities):
        raise DatasetSchemaError(
            "cannot infer group_type: entity types must share one prefix before '.'",
            doc_id=doc_id,
            field=f"groups[{gi}].group_type",
        )
    return prefixes.pop()


def _parse_entity(raw: Any, doc_id: str, path: str, config: EvalConfig) -> tuple[ExtractedEntity, int]:
    if not isinstance(raw, dict):
        raise DatasetSchemaError("entity must be an object", doc_id=doc_id, field=path)
    unknown = len(set(raw) - _ENTITY_KEYS)
    etype = raw.get("type")
    if not isinstance(etype, str) or not etype:
        raise DatasetSchemaError("entity type must be a non-empty string", doc_id=doc_id, field=f"{path}.type")
    value = raw.get("value")
    if not isinstance(value, str):
        raise DatasetSchemaError("entity value must be a string", doc_id=doc_id, field=f"{path}.value")
    conf = raw.get("confidence")
    if conf is not None:
        # bool is an int subclass; reject it explicitly
        if isinstance(conf, bool) or not isinstance(conf, (int, float)):
            raise DatasetSchemaError("confidence must be a number", doc_id=doc_id, field=f"{path}.confidence")
        conf = float(conf)
    return ExtractedEntity(etype, normalize(value, config.normalization), conf), unknown


def _parse_document(raw: Any, position: int, config: EvalConfig) -> tuple[DocumentExtraction, int]:
    if not isinstance(raw, dict):
        raise DatasetSchemaError(f"documents[{position}] must be an object")
    doc_id = raw.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise DatasetSchemaError(f"documents[{position}] needs a non-empty string id", field="id")
    unknown = len(set(raw) - _DOC_KEYS)
    raw_groups = raw.get("groups", [])
    if not isinstance(raw_groups, list):
        raise DatasetSchemaError("groups must be a list", doc_id=doc_id, field="groups")

    ungrouped: list[ExtractedEntity] = []
    groups: list[EntityGroup] = []
    for gi, rg in enumerate(raw_groups):
        if not isinstance(rg, dict):
            raise DatasetSchemaError("group must be an object", doc_id=doc_id, field=f"groups[{gi}]")
        unknown += len(set(rg) - _GROUP_KEYS)
        raw_entities = rg.get("entities", [])
        if not isinstance(raw_entities, list):
            raise DatasetSchemaError("entities must be a list", doc_id=doc_id, field=f"groups[{gi}].entities")
        entities = []
        for ei, re_ in enumerate(raw_entities):
            ent, n_unknown = _parse_entity(re_, doc_id, f"groups[{gi}].entities[{ei}]", config)
            entities.append(ent)
            unknown += n_unknown

        if "group_type" not in rg and config.infer_group_type:
            if not entities:
                raise DatasetSchemaError("group is empty", doc_id=doc_id, field=f"groups[{gi}].entities")
            groups.append(EntityGroup(_infer_group_type(entities, doc_id, gi), tuple(entities)))
            continue
        gtype = rg.get("group_type")
        if gtype is None:
            ungrouped.extend(entities)
            continue
        if not isinstance(gtype, str) or not gtype:
            raise DatasetSchemaError(
                "group_type must be a non-empty string or null", doc_id=doc_id, field=f"groups[{gi}].group_type"
            )
        if not entities:
            raise DatasetSchemaError("group is empty", doc_id=doc_id, field=f"groups[{gi}].entities")
        groups.append(EntityGroup(gtype, tuple(entities)))

    doc = DocumentExtraction(doc_id, (EntityGroup(NONGROUP, tuple(ungrouped)), *groups))
    return doc, unknown


def parse_dataset(data: Union[bytes, str], config: Optional[EvalConfig] = None, source_path: str = "<bytes>") -> DatasetFile:
    """Parse a dataset JSON document into a :class:`DatasetFile`.

    Ungrouped entities (``group_type`` null or absent) of a document are
    merged, in file order, into the NONGROUP bucket at index 0.
    """
    config = config or EvalConfig()
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DatasetParseError(f"input is not UTF-8 ({exc.reason})", 1, exc.start + 1, source_path) from exc
    else:
        text = data
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetParseError(exc.msg, exc.lineno, exc.colno, source_path) from exc

    if not isinstance(payload, dict) or not isinstance(payload.get("documents"), list):
        raise DatasetSchemaError("top level must be an object with a 'documents' list", field="documents")
    unknown = len(set(payload) - {"documents"})
    documents = []
    for pos, raw in enumerate(payload["documents"]):
        doc, n_unknown = _parse_document(raw, pos, config)
        documents.append(doc)
        unknown += n_unknown
    return DatasetFile(documents, source_path=source_path, unknown_fields=unknown)


def load_dataset(path, config: Optional[EvalConfig] = None) -> DatasetFile:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_dataset(data, config, source_path=str(path))


def dump_dataset(dataset: DatasetFile) -> str:
    """Serialize back to the dataset JSON schema (NONGROUP as ``group_type: null``)."""
    docs = []
    for doc in dataset.documents:
        groups = []
        for group in doc.groups:
            if group.is_nongroup and not group.entities:
                continue
            entities = []
            for ent in group.entities:
                item: dict[str, Any] = {"type": ent.entity_type, "value": ent.value}
                if ent.confidence is not None:
                    item["confidence"] = ent.confidence
                entities.append(item)
            groups.append({"group_type": None if group.is_nongroup else group.group_type, "entities": entities})
        docs.append({"id": doc.doc_id, "groups": groups})
    return json.dumps({"documents": docs}, ensure_ascii=False, indent=2)


def pair_documents(
    gt: DatasetFile, pred: DatasetFile, config: Optional[EvalConfig] = None
) -> list[tuple[DocumentExtraction, DocumentExtraction]]:
    """Pair ground-truth and prediction documents by id, in ground-truth order.

    Prediction-only documents come last, in prediction file order.
    """
    config = config or EvalConfig()
    missing_pred = [d.doc_id for d in gt.documents if d.doc_id not in pred]
    missing_gt = [d.doc_id for d in pred.documents if d.doc_id not in gt]
    if (missing_pred or missing_gt) and config.missing_doc_policy is MissingDocPolicy.ERROR:
        raise UnpairedDocumentError(missing_pred, missing_gt)

    pairs = []
    for doc in gt.documents:
        other = pred[doc.doc_id] if doc.doc_id in pred else DocumentExtraction.empty(doc.doc_id)
        pairs.append((doc, other))
    for doc_id in missing_gt:
        pairs.append((DocumentExtraction.empty(doc_id), pred[doc_id]))
    return pairs
