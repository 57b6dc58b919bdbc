import random
from fractions import Fraction

import pytest

from kieval.matching import match_groups
from kieval.metrics import (
    aggregate,
    correction_costs,
    entity_statistics,
    evaluate_pairs,
    f1_from_counts,
    group_statistics,
    kieval_aligned,
    kieval_entity_f1,
    kieval_group_f1,
    legacy_counts,
    legacy_entity_f1,
)
from kieval.model import CountLedger, Counts, DocumentExtraction

from conftest import doc, group, random_instance
from test_matching import SWAP_GT, SWAP_PRED


def ledger_of(tp, fp, fn):
    led = CountLedger()
    led.overall = Counts(tp=tp, fp=fp, fn=fn)
    return led


def _f1(tp, fp, fn):
    """Exact-fraction reference F1."""
    return float(Fraction(2 * tp, 2 * tp + fp + fn))


def test_f1_triple_consistency():
    t = f1_from_counts(5, 2, 2)
    assert t.f1 == pytest.approx(2 * t.precision * t.recall / (t.precision + t.recall))


@pytest.mark.parametrize("tp,fp,fn,expected", [(5, 2, 2, 10 / 14), (6, 1, 1, 12 / 14), (0, 0, 0, 1.0), (0, 3, 0, 0.0), (0, 0, 3, 0.0)])
def test_kieval_entity_f1_values(tp, fp, fn, expected):
    assert kieval_entity_f1(ledger_of(tp, fp, fn)).f1 == pytest.approx(expected, abs=1e-12)


def test_entity_statistics_perfect_swap_empty():
    led = entity_statistics(match_groups(SWAP_GT, SWAP_GT))
    assert (led.overall.tp, led.overall.fp, led.overall.fn) == (7, 0, 0)
    led = entity_statistics(match_groups(SWAP_PRED, SWAP_GT))
    assert (led.overall.tp, led.overall.fp, led.overall.fn) == (5, 2, 2)
    led = entity_statistics(match_groups(DocumentExtraction.empty("s"), SWAP_GT))
    assert (led.overall.tp, led.overall.fp, led.overall.fn) == (0, 0, 7)


def test_group_statistics():
    assert group_statistics(match_groups(SWAP_GT, SWAP_GT)) == (2, 0, 0)
    assert group_statistics(match_groups(SWAP_PRED, SWAP_GT)) == (0, 2, 2)
    assert kieval_group_f1(entity_statistics(match_groups(SWAP_PRED, SWAP_GT))).f1 == 0.0
    flat = doc("r", [("total", "9.00")])
    assert kieval_group_f1(entity_statistics(match_groups(flat, flat))) is None


def _variant(price=None, drop=False, extra=False):
    menu_b = [("menu.nm", "LATTE"), ("menu.cnt", "2")]
    if not drop:
        menu_b.append(("menu.price", price or "12,000"))
    nongroup = [("store.name", "STARBUCKS")] + ([("store.tel", "000")] if extra else [])
    return doc(
        "s",
        nongroup,
        group("menu", ("menu.nm", "AMERICANO"), ("menu.cnt", "1"), ("menu.price", "7,000")),
        group("menu", *menu_b),
    )


@pytest.mark.parametrize(
    "pred, expected",
    [(_variant(drop=True), (0, 1, 0)), (_variant(price="21,000"), (1, 0, 0)), (_variant(extra=True), (0, 0, 1))],
    ids=["missing", "wrong-value", "spurious"],
)
def test_correction_costs_single_edit(pred, expected):
    m = match_groups(pred, SWAP_GT)
    c = correction_costs(m)
    assert (c.subs, c.add, c.dele) == expected and c.error == 1
    led = entity_statistics(m)
    assert (led.overall.subs, led.overall.add, led.overall.dele) == expected


def test_kieval_aligned_equalizes_fig3_shapes():
    gt_three = doc("d", (), group("menu", ("menu.nm", "A"), ("menu.cnt", "1"), ("menu.price", "7")))
    gt_two = doc("d", (), group("menu", ("menu.nm", "A"), ("menu.price", "7")))
    cases = [
        (doc("d", (), group("menu", ("menu.nm", "A"), ("menu.cnt", "1"))), gt_three, 0.8),
        (doc("d", (), group("menu", ("menu.nm", "A"), ("menu.cnt", "1"), ("menu.price", "8"))), gt_three, 2 / 3),
        (doc("d", (), group("menu", ("menu.nm", "A"), ("menu.price", "7"), ("menu.cnt", "1"))), gt_two, 0.8),
    ]
    for pred, gt, legacy in cases:
        led = entity_statistics(match_groups(pred, gt))
        assert led.overall.tp == 2 and led.overall.error == 1
        assert kieval_aligned(led) == pytest.approx(2 / 3, abs=1e-12)
        assert legacy_entity_f1(pred, gt).f1 == pytest.approx(legacy, abs=1e-12)


def test_kieval_aligned_endpoints():
    assert kieval_aligned(entity_statistics(match_groups(SWAP_GT, SWAP_GT))) == 1.0
    assert kieval_aligned(entity_statistics(match_groups(DocumentExtraction.empty("s"), SWAP_GT))) == 0.0
    empty = DocumentExtraction.empty("e")
    assert kieval_aligned(entity_statistics(match_groups(empty, empty))) == 1.0


def test_legacy_f1():
    assert legacy_entity_f1(SWAP_PRED, SWAP_GT).f1 == 1.0
    assert legacy_entity_f1(SWAP_GT, SWAP_GT).f1 == 1.0
    other = doc("s", [("store.name", "OTHER")])
    assert legacy_entity_f1(other, SWAP_GT).f1 == 0.0


def _doc_ledger(pred, gt):
    return entity_statistics(match_groups(pred, gt)), legacy_counts(pred, gt)


def test_aggregate_micro_average():
    a, la = _doc_ledger(SWAP_PRED, SWAP_GT)
    b, lb = _doc_ledger(SWAP_GT, SWAP_GT)
    report = aggregate([("a", a, la), ("b", b, lb)])
    assert report.kieval_entity_f1.f1 == pytest.approx(_f1(12, 2, 2), abs=1e-12)
    assert report.kieval_entity_f1.f1 == pytest.approx(24 / 28, abs=1e-12)


def test_aggregate_single_and_empty():
    a, la = _doc_ledger(SWAP_PRED, SWAP_GT)
    single = aggregate([("a", a, la)], keep_per_doc=True)
    assert single.kieval_entity_f1 == single.per_doc[0][1].kieval_entity_f1
    assert single.kieval_aligned == single.per_doc[0][1].kieval_aligned
    nothing = aggregate([])
    assert nothing.ledger.overall.as_dict() == Counts().as_dict()
    assert nothing.n_documents == 0
    assert nothing.kieval_group_f1 is None


@pytest.mark.parametrize("seed", range(150))
def test_correction_costs_agree_with_labels(seed):
    gt, pred = random_instance(seed)
    m = match_groups(pred, gt)
    direct = correction_costs(m)
    from_labels = entity_statistics(m).overall
    assert direct.as_dict() == from_labels.as_dict()


def _scores(pred, gt):
    r = evaluate_pairs([(gt, pred)])
    g = r.kieval_group_f1
    return (r.kieval_entity_f1, g, r.kieval_aligned, r.ledger.overall.as_dict(), r.legacy_entity_f1)


@pytest.mark.parametrize("seed", range(150))
def test_symmetry(seed):
    gt, pred = random_instance(seed)
    fwd = evaluate_pairs([(gt, pred)])
    rev = evaluate_pairs([(pred, gt)])
    a, b = fwd.ledger.overall, rev.ledger.overall
    assert (a.tp, a.subs, a.error) == (b.tp, b.subs, b.error)
    assert (a.add, a.dele) == (b.dele, b.add)
    assert fwd.kieval_entity_f1.precision == pytest.approx(rev.kieval_entity_f1.recall, abs=1e-15)
    assert fwd.kieval_aligned == rev.kieval_aligned


@pytest.mark.parametrize("seed", range(150))
def test_permutation_invariance(seed):
    gt, pred = random_instance(seed)
    rng = random.Random(seed)

    def shuffled(d):
        tail = list(d.groups[1:])
        rng.shuffle(tail)
        return DocumentExtraction(d.doc_id, (d.groups[0], *tail))

    base = _scores(pred, gt)
    assert _scores(shuffled(pred), shuffled(gt)) == base
