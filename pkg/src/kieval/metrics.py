"""Entity, group and correction-cost statistics and the scores built on them."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional, Sequence

from .model import (
    CountLedger,
    Counts,
    DocumentExtraction,
    F1Triple,
    GroupMatchResult,
    Label,
    MetricReport,
)


def f1_from_counts(tp: int, fp: int, fn: int) -> F1Triple:
    """Precision, recall and F1 with the zero-denominator conventions.

    A ratio with a zero denominator is 0, except when there is nothing at all
    to compare (no prediction and no ground truth), which scores 1.
    """
    if tp == fp == fn == 0:
        return F1Triple(1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    # 2TP / (2TP + FP + FN) equals the harmonic mean and avoids compounding rounding
    f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return F1Triple(precision, recall, f1)


def entity_statistics(match: GroupMatchResult) -> CountLedger:
    """TP/FP/FN and Subs/Add/Del over the group-matched document.

    Counts are derived from the entity labels, so every slice (overall, per
    entity type, per group type) follows from one pass.  Per matched cell the
    labels realize ``Subs = min(FP, FN)``, ``Add = FN - Subs`` and
    ``Del = FP - Subs``; entities of unmatched groups are Add or Del.
    """
    ledger = CountLedger()
    pred, gt = match.pred, match.gt
    for al in match.alignments:
        # a TP or SUBS row belongs to the group type of its ground-truth side
        side = al.gt if al.gt is not None else al.pred
        doc = gt if al.gt is not None else pred
        group_type = doc.groups[side[0]].group_type
        slices = (
            ledger.overall,
            ledger.per_type.setdefault(al.entity_type, Counts()),
            ledger.per_group_type.setdefault(group_type, Counts()),
        )
        for c in slices:
            if al.label is Label.TP:
                c.tp += 1
            elif al.label is Label.SUBS:
                c.subs += 1
                c.fp += 1
                c.fn += 1
            elif al.label is Label.ADD:
                c.add += 1
                c.fn += 1
            else:
                c.dele += 1
                c.fp += 1

    tp, fp, fn = group_statistics(match)
    ledger.group_tp, ledger.group_fp, ledger.group_fn = tp, fp, fn
    ledger.has_groups = pred.n_grouped + gt.n_grouped > 0
    for gtype, counts in _group_counts_by_type(match).items():
        ledger.per_group_type_groups[gtype] = counts
    return ledger


def _identical(match: GroupMatchResult, p: int, g: int) -> bool:
    a = Counter(e.key for e in match.pred.groups[p].entities)
    b = Counter(e.key for e in match.gt.groups[g].entities)
    return a == b


def group_statistics(match: GroupMatchResult) -> tuple[int, int, int]:
    """Group-level TP/FP/FN over all matched pairs except the NONGROUP pair.

    A pair counts as TP when both groups hold the same entity multiset.
    """
    tp = sum(1 for p, g in match.pairs[1:] if _identical(match, p, g))
    return tp, match.pred.n_grouped - tp, match.gt.n_grouped - tp


def _group_counts_by_type(match: GroupMatchResult) -> dict:
    out: dict = {}
    for doc, slot in ((match.pred, 1), (match.gt, 2)):
        for group in doc.groups[1:]:
            out.setdefault(group.group_type, [0, 0, 0])[slot] += 1
    for p, g in match.pairs[1:]:
        if _identical(match, p, g):
            acc = out[match.gt.groups[g].group_type]
            acc[0] += 1
            acc[1] -= 1
            acc[2] -= 1
    return out


def kieval_entity_f1(ledger: CountLedger) -> F1Triple:
    c = ledger.overall
    return f1_from_counts(c.tp, c.fp, c.fn)


def kieval_group_f1(ledger: CountLedger) -> Optional[F1Triple]:
    """Group-level F1, or ``None`` when neither side has any grouped entity."""
    if not ledger.has_groups:
        return None
    return f1_from_counts(ledger.group_tp, ledger.group_fp, ledger.group_fn)


def correction_costs(match: GroupMatchResult) -> Counts:
    """Subs/Add/Del totals of one document, computed cell by cell.

    This is the direct cell-wise formulation and does not read the entity
    labels; :func:`entity_statistics` must agree with it.
    """
    out = Counts()
    pred, gt = match.pred, match.gt
    for p, g in match.pairs:
        pr_types = Counter(e.entity_type for e in pred.groups[p].entities)
        gt_types = Counter(e.entity_type for e in gt.groups[g].entities)
        shared = Counter(e.key for e in pred.groups[p].entities) & Counter(e.key for e in gt.groups[g].entities)
        same = Counter()
        for (etype, _), n in shared.items():
            same[etype] += n
        for etype in pr_types.keys() | gt_types.keys():
            fp = pr_types[etype] - same[etype]
            fn = gt_types[etype] - same[etype]
            subs = min(fp, fn)
            out.tp += same[etype]
            out.fp += fp
            out.fn += fn
            out.subs += subs
            out.add += fn - subs
            out.dele += fp - subs
    for p in match.unmatched_pred_groups:
        n = len(pred.groups[p])
        out.fp += n
        out.dele += n
    for g in match.unmatched_gt_groups:
        n = len(gt.groups[g])
        out.fn += n
        out.add += n
    return out


def kieval_aligned(ledger: CountLedger) -> float:
    """``TP / (TP + Error)``; 1.0 when there is nothing on either side."""
    c = ledger.overall
    denom = c.tp + c.error
    if denom == 0:
        return 1.0
    return c.tp / denom


def legacy_counts(pred: DocumentExtraction, gt: DocumentExtraction) -> Counts:
    """Grouping-blind TP/FP/FN over each document's whole entity multiset."""
    pr = Counter(e.key for _, _, e in pred.entities())
    g = Counter(e.key for _, _, e in gt.entities())
    tp = sum((pr & g).values())
    return Counts(tp=tp, fp=sum(pr.values()) - tp, fn=sum(g.values()) - tp)


def legacy_entity_f1(pred: DocumentExtraction, gt: DocumentExtraction) -> F1Triple:
    c = legacy_counts(pred, gt)
    return f1_from_counts(c.tp, c.fp, c.fn)


def _report(ledger: CountLedger, legacy: Counts, n_documents: int) -> MetricReport:
    return MetricReport(
        legacy_entity_f1=f1_from_counts(legacy.tp, legacy.fp, legacy.fn),
        kieval_entity_f1=kieval_entity_f1(ledger),
        kieval_group_f1=kieval_group_f1(ledger),
        kieval_aligned=kieval_aligned(ledger),
        ledger=ledger,
        legacy_counts=legacy,
        n_documents=n_documents,
    )


def evaluate_document(match: GroupMatchResult) -> tuple[CountLedger, Counts]:
    return entity_statistics(match), legacy_counts(match.pred, match.gt)


def aggregate(
    per_doc: Iterable[tuple[str, CountLedger, Counts]],
    keep_per_doc: bool = False,
) -> MetricReport:
    """Micro-average: sum every count across documents, then score once."""
    total = CountLedger()
    legacy = Counts()
    docs: list[tuple[str, MetricReport]] = []
    n = 0
    for doc_id, ledger, leg in per_doc:
        n += 1
        total.merge(ledger)
        legacy.merge(leg)
        if keep_per_doc:
            docs.append((doc_id, _report(ledger, leg, 1)))
    report = _report(total, legacy, n)
    if keep_per_doc:
        report.per_doc = docs
    return report


def macro_average(report: MetricReport) -> dict[str, Optional[float]]:
    """Unweighted mean of per-document scores (a secondary view only)."""
    if not report.per_doc:
        return {}
    docs = [r for _, r in report.per_doc]
    n = len(docs)
    groups = [r.kieval_group_f1.f1 for r in docs if r.kieval_group_f1 is not None]
    return {
        "legacy_entity_f1": sum(r.legacy_entity_f1.f1 for r in docs) / n,
        "kieval_entity_f1": sum(r.kieval_entity_f1.f1 for r in docs) / n,
        "kieval_group_f1": sum(groups) / len(groups) if groups else None,
        "kieval_aligned": sum(r.kieval_aligned for r in docs) / n,
    }


def evaluate_pairs(
    pairs: Sequence[tuple[DocumentExtraction, DocumentExtraction]],
    keep_per_doc: bool = False,
    jobs: int = 1,
    matcher=None,
) -> MetricReport:
    """Evaluate ``(gt, pred)`` document pairs and aggregate the result."""
    from .matching import match_groups

    matcher = matcher or match_groups
    results = _map_documents(pairs, jobs, matcher)
    return aggregate(((gt.doc_id, ledger, leg) for (gt, _), (ledger, leg) in zip(pairs, results)), keep_per_doc)


def _evaluate_one(args):
    gt, pred, matcher = args
    return evaluate_document(matcher(pred, gt))


def _map_documents(pairs, jobs: int, matcher):
    work = [(gt, pred, matcher) for gt, pred in pairs]
    if jobs <= 1 or len(work) < 2:
        return [_evaluate_one(w) for w in work]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_one, work, chunksize=max(1, len(work) // (4 * jobs))))
