import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kieval.ingest import (
    DatasetParseError,
    DatasetSchemaError,
    UnpairedDocumentError,
    dump_dataset,
    normalize,
    pair_documents,
    parse_dataset,
)
from kieval.matching import match_groups
from kieval.metrics import entity_statistics
from kieval.model import EvalConfig, MissingDocPolicy, Normalization

from conftest import random_document


def _payload(*docs):
    return json.dumps({"documents": list(docs)}).encode()


def test_trim_normalization():
    data = _payload({"id": "a", "groups": [{"group_type": "menu", "entities": [{"type": "menu.nm", "value": " LATTE "}]}]})
    ds = parse_dataset(data, EvalConfig(normalization="trim"))
    assert ds.documents[0].groups[1].entities[0].value == "LATTE"
    # default keeps the raw value
    assert parse_dataset(data).documents[0].groups[1].entities[0].value == " LATTE "


def test_grouped_only_document_gets_empty_nongroup():
    data = _payload({"id": "a", "groups": [{"group_type": "menu", "entities": [{"type": "menu.nm", "value": "X"}]}]})
    d = parse_dataset(data).documents[0]
    assert d.groups[0].is_nongroup and d.groups[0].entities == ()
    assert len(d.groups) == 2


def test_groups_sharing_a_type_stay_distinct_and_ordered():
    data = _payload(
        {
            "id": "a",
            "groups": [
                {"group_type": "menu", "entities": [{"type": "menu.nm", "value": "FIRST"}]},
                {"group_type": None, "entities": [{"type": "store.name", "value": "S"}]},
                {"group_type": "menu", "entities": [{"type": "menu.nm", "value": "SECOND"}]},
            ],
        }
    )
    d = parse_dataset(data).documents[0]
    grouped = [g for g in d.groups if not g.is_nongroup]
    assert len(grouped) == 2
    assert [g.entities[0].value for g in grouped] == ["FIRST", "SECOND"]


def test_ungrouped_entities_merge_in_file_order():
    data = _payload(
        {
            "id": "a",
            "groups": [
                {"group_type": None, "entities": [{"type": "t", "value": "1"}]},
                {"group_type": "menu", "entities": [{"type": "menu.nm", "value": "X"}]},
                {"entities": [{"type": "t", "value": "2"}, {"type": "t", "value": "3"}]},
            ],
        }
    )
    d = parse_dataset(data).documents[0]
    assert [e.value for e in d.groups[0].entities] == ["1", "2", "3"]


def test_malformed_json_reports_position():
    with pytest.raises(DatasetParseError) as info:
        parse_dataset(b'{"documents": [\n  {"id": "a",, }]}')
    assert info.value.line == 2
    assert info.value.column > 0


@pytest.mark.parametrize(
    "document, field",
    [
        ({"id": "a", "groups": [{"group_type": "menu", "entities": [{"type": "", "value": "x"}]}]}, "type"),
        ({"id": "a", "groups": [{"group_type": "menu", "entities": [{"type": "t", "value": 3}]}]}, "value"),
        ({"id": "a", "groups": [{"group_type": "menu", "entities": [{"type": "t", "value": "x", "confidence": "hi"}]}]}, "confidence"),
        ({"id": "a", "groups": [{"group_type": "menu", "entities": []}]}, "entities"),
        ({"id": "a", "groups": [{"group_type": 5, "entities": [{"type": "t", "value": "x"}]}]}, "group_type"),
    ],
)
def test_schema_violation_names_document_and_field(document, field):
    with pytest.raises(DatasetSchemaError) as info:
        parse_dataset(_payload(document))
    assert info.value.doc_id == "a"
    assert field in info.value.field


def test_missing_id_rejected():
    with pytest.raises(DatasetSchemaError):
        parse_dataset(_payload({"groups": []}))


def test_duplicate_doc_id_rejected():
    with pytest.raises(DatasetSchemaError, match="duplicate"):
        parse_dataset(_payload({"id": "a", "groups": []}, {"id": "a", "groups": []}))


def test_unknown_fields_are_counted():
    data = _payload({"id": "a", "meta": 1, "groups": [{"group_type": None, "bbox": [], "entities": [{"type": "t", "value": "v", "score": 2}]}]})
    assert parse_dataset(data).unknown_fields == 3


def test_group_type_inference_requires_flag():
    data = _payload({"id": "a", "groups": [{"entities": [{"type": "menu.nm", "value": "X"}, {"type": "menu.price", "value": "1"}]}]})
    plain = parse_dataset(data).documents[0]
    assert len(plain.groups) == 1 and len(plain.groups[0]) == 2
    inferred = parse_dataset(data, EvalConfig(infer_group_type=True)).documents[0]
    assert inferred.groups[1].group_type == "menu"
    # explicit null still means ungrouped
    data = _payload({"id": "a", "groups": [{"group_type": None, "entities": [{"type": "menu.nm", "value": "X"}]}]})
    assert len(parse_dataset(data, EvalConfig(infer_group_type=True)).documents[0].groups) == 1


def test_group_type_inference_rejects_mixed_prefixes():
    data = _payload({"id": "a", "groups": [{"entities": [{"type": "menu.nm", "value": "X"}, {"type": "sub.nm", "value": "1"}]}]})
    with pytest.raises(DatasetSchemaError):
        parse_dataset(data, EvalConfig(infer_group_type=True))


@given(st.text(), st.sampled_from(list(Normalization)))
def test_normalization_idempotent(value, mode):
    once = normalize(value, mode)
    assert normalize(once, mode) == once


def test_round_trip_preserves_structure():
    import random

    rng = random.Random(7)
    for i in range(50):
        d = random_document(rng, f"d{i}", confidences=True)
        ds = parse_dataset(_payload({"id": "x", "groups": []}))
        ds.documents = [d]
        again = parse_dataset(dump_dataset(ds)).documents[0]
        assert again == d


def test_entity_count_conserved():
    import random

    rng = random.Random(3)
    from kieval.ingest import DatasetFile

    docs = [random_document(rng, f"d{i}") for i in range(20)]
    text = dump_dataset(DatasetFile(docs))
    assert parse_dataset(text).n_entities == sum(d.n_entities for d in docs)


def _ids(*ids):
    return parse_dataset(_payload(*[{"id": i, "groups": [{"group_type": "menu", "entities": [{"type": "menu.nm", "value": i}]}]} for i in ids]))


def test_pairing_by_id():
    pairs = pair_documents(_ids("a", "b"), _ids("b", "a"))
    assert [(g.doc_id, p.doc_id) for g, p in pairs] == [("a", "a"), ("b", "b")]


def test_missing_prediction_treated_as_empty_is_all_additions():
    gt = _ids("a", "b")
    config = EvalConfig(missing_doc_policy=MissingDocPolicy.TREAT_AS_EMPTY)
    pairs = pair_documents(gt, _ids("a"), config)
    gt_b, pred_b = pairs[1]
    assert pred_b.n_entities == 0 and pred_b.groups[0].is_nongroup
    ledger = entity_statistics(match_groups(pred_b, gt_b))
    assert ledger.overall.add == gt_b.n_entities == ledger.overall.error


def test_unpaired_id_aborts_under_error_policy():
    with pytest.raises(UnpairedDocumentError, match="c"):
        pair_documents(_ids("a"), _ids("a", "c"))
