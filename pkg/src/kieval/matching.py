"""Group matching between a predicted and a ground-truth document.

Groups are matched only within the same group type; the NONGROUP buckets are
paired with each other unconditionally.  Within a type, the assignment
maximizes the total number of identical entities.  Remaining ties are broken,
in order, by the larger number of substitutions (i.e. fewer corrections), by
the larger number of exactly identical groups, and finally by the
lexicographically smallest list of (gt index, pred index) pairs.  The first
two tie-breaks make every reported score independent of group order.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Optional

from .assignment import max_weight_assignment
from .model import (
    Alignment,
    DocumentExtraction,
    EntityGroup,
    GroupMatchResult,
    Label,
)

BRUTE_FORCE_LIMIT = 8


class InstanceTooLarge(ValueError):
    pass


def matching_score(pr: EntityGroup, gt: EntityGroup) -> tuple[int, dict[str, int]]:
    """Count identical ``(entity_type, value)`` entities, multiset semantics.

    Returns the total score and its split per entity type.  Types with no
    identical entity are absent from the split.
    """
    pr_counts = Counter(e.key for e in pr.entities)
    gt_counts = Counter(e.key for e in gt.entities)
    per_type: dict[str, int] = defaultdict(int)
    for key, n in (pr_counts & gt_counts).items():
        per_type[key[0]] += n
    return sum(per_type.values()), dict(per_type)


@dataclass(frozen=True)
class PairStats:
    score: int
    subs: int
    identical: bool


def pair_stats(pr: EntityGroup, gt: EntityGroup) -> PairStats:
    score, per_type = matching_score(pr, gt)
    n_pr = Counter(e.entity_type for e in pr.entities)
    n_gt = Counter(e.entity_type for e in gt.entities)
    subs = 0
    for etype in n_pr.keys() | n_gt.keys():
        s = per_type.get(etype, 0)
        subs += min(n_pr[etype] - s, n_gt[etype] - s)
    identical = score == len(pr.entities) == len(gt.entities)
    return PairStats(score, subs, identical)


def _groups_by_type(doc: DocumentExtraction) -> dict:
    by_type: dict = {}
    for gi, group in enumerate(doc.groups):
        if gi == 0:
            continue
        by_type.setdefault(group.group_type, []).append(gi)
    return by_type


def _solve_type(pred: DocumentExtraction, gt: DocumentExtraction, p_idx: list[int], g_idx: list[int]):
    stats = [[pair_stats(pred.groups[p], gt.groups[g]) for p in p_idx] for g in g_idx]
    k = min(len(p_idx), len(g_idx))
    total_entities = sum(len(pred.groups[p]) for p in p_idx) + sum(len(gt.groups[g]) for g in g_idx)
    # lexicographic (score, subs, identical) packed into one integer
    ident_base = k + 1
    subs_base = (total_entities + 1) * ident_base
    weights = [[s.score * subs_base + s.subs * ident_base + int(s.identical) for s in row] for row in stats]
    row_to_col = max_weight_assignment(weights)
    return [(p_idx[c], g_idx[r]) for r, c in enumerate(row_to_col) if c is not None]


def _brute_force_type(pred: DocumentExtraction, gt: DocumentExtraction, p_idx: list[int], g_idx: list[int]):
    if max(len(p_idx), len(g_idx)) > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(
            f"brute force is limited to {BRUTE_FORCE_LIMIT} groups per type, got {len(p_idx)} x {len(g_idx)}"
        )
    stats = {(p, g): pair_stats(pred.groups[p], gt.groups[g]) for p in p_idx for g in g_idx}
    k = min(len(p_idx), len(g_idx))
    best_key = None
    best_pairs: list[tuple[int, int]] = []
    for gts in itertools.combinations(g_idx, k):
        for preds in itertools.permutations(p_idx, k):
            pairs = sorted(zip(preds, gts), key=lambda pg: pg[1])
            sel = [stats[pg] for pg in pairs]
            objective = (
                sum(s.score for s in sel),
                sum(s.subs for s in sel),
                sum(s.identical for s in sel),
            )
            order = [(g, p) for p, g in pairs]
            key = (tuple(-x for x in objective), order)
            if best_key is None or key < best_key:
                best_key = key
                best_pairs = pairs
    return best_pairs


def _assemble(pred: DocumentExtraction, gt: DocumentExtraction, solver) -> GroupMatchResult:
    pred_types = _groups_by_type(pred)
    gt_types = _groups_by_type(gt)
    pairs: list[tuple[int, int]] = [(0, 0)]
    for gtype in gt_types.keys() & pred_types.keys():
        pairs.extend(solver(pred, gt, pred_types[gtype], gt_types[gtype]))
    pairs[1:] = sorted(pairs[1:], key=lambda pg: (pg[1], pg[0]))

    matched_pred = {p for p, _ in pairs}
    matched_gt = {g for _, g in pairs}
    unmatched_pred = tuple(i for i in range(len(pred.groups)) if i not in matched_pred)
    unmatched_gt = tuple(i for i in range(len(gt.groups)) if i not in matched_gt)
    scores = tuple(matching_score(pred.groups[p], gt.groups[g])[0] for p, g in pairs)
    alignments = label_entities(pred, gt, pairs, unmatched_pred, unmatched_gt)
    return GroupMatchResult(pred, gt, tuple(pairs), scores, alignments, unmatched_pred, unmatched_gt)


def match_groups(pred: DocumentExtraction, gt: DocumentExtraction) -> GroupMatchResult:
    """Match the groups of ``pred`` to those of ``gt`` and label every entity."""
    return _assemble(pred, gt, _solve_type)


def brute_force_match(pred: DocumentExtraction, gt: DocumentExtraction) -> GroupMatchResult:
    """Exhaustive reference for :func:`match_groups` on small documents."""
    return _assemble(pred, gt, _brute_force_type)


def _label_pair(pred: DocumentExtraction, gt: DocumentExtraction, p: int, g: int) -> list[Alignment]:
    out: list[Alignment] = []
    pr_by_type: dict[str, list[int]] = defaultdict(list)
    gt_by_type: dict[str, list[int]] = defaultdict(list)
    for ei, ent in enumerate(pred.groups[p].entities):
        pr_by_type[ent.entity_type].append(ei)
    for ei, ent in enumerate(gt.groups[g].entities):
        gt_by_type[ent.entity_type].append(ei)

    types = list(dict.fromkeys([*gt_by_type, *pr_by_type]))
    for etype in types:
        pr_left = list(pr_by_type.get(etype, ()))
        gt_left = list(gt_by_type.get(etype, ()))
        for pi in list(pr_left):
            value = pred.groups[p].entities[pi].value
            hit: Optional[int] = next((gi for gi in gt_left if gt.groups[g].entities[gi].value == value), None)
            if hit is not None:
                pr_left.remove(pi)
                gt_left.remove(hit)
                out.append(Alignment(Label.TP, (p, pi), (g, hit), etype))
        n_subs = min(len(pr_left), len(gt_left))
        for pi, gi in zip(pr_left[:n_subs], gt_left[:n_subs]):
            out.append(Alignment(Label.SUBS, (p, pi), (g, gi), etype))
        for pi in pr_left[n_subs:]:
            out.append(Alignment(Label.DEL, (p, pi), None, etype))
        for gi in gt_left[n_subs:]:
            out.append(Alignment(Label.ADD, None, (g, gi), etype))
    return out


def label_entities(
    pred: DocumentExtraction,
    gt: DocumentExtraction,
    pairs,
    unmatched_pred,
    unmatched_gt,
) -> tuple[Alignment, ...]:
    """Give every prediction and ground-truth entity exactly one label.

    Inside a matched pair and entity type, identical values are paired in
    input order (TP); the first leftover predictions are then paired with
    the leftover ground truths as substitutions; whatever remains is a
    deletion (prediction side) or an addition (ground-truth side).  Entities
    of unmatched groups are all deletions or additions.
    """
    out: list[Alignment] = []
    for p, g in pairs:
        out.extend(_label_pair(pred, gt, p, g))
    for p in unmatched_pred:
        for ei, ent in enumerate(pred.groups[p].entities):
            out.append(Alignment(Label.DEL, (p, ei), None, ent.entity_type))
    for g in unmatched_gt:
        for ei, ent in enumerate(gt.groups[g].entities):
            out.append(Alignment(Label.ADD, None, (g, ei), ent.entity_type))
    return tuple(out)
