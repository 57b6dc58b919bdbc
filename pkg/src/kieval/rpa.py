"""Confidence-threshold trade-off between automation rate and post-review accuracy.

Prediction entities whose confidence is strictly below a threshold are sent
to a (perfect) human reviewer.  The reviewer fixes substitutions in place and
removes deletions, but never adds missing entities.
"""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass
from typing import Iterable, Optional, Sequence

from .model import GroupMatchResult, Label

CSV_HEADER = ("tau", "auto_rate", "kieval_aligned_tau", "reviewed", "subs_tau", "del_tau", "add", "n_pr_star")


def default_grid(tau_min: float = 0.0, tau_max: float = 1.0, steps: int = 101) -> tuple[float, ...]:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps == 1:
        return (tau_min,)
    span = tau_max - tau_min
    # round away binary noise so the grid prints as 0.07, not 0.07000000000000001
    return tuple(round(tau_min + span * i / (steps - 1), 12) for i in range(steps))


class MissingConfidenceError(ValueError):
    def __init__(self, doc_id: str, group_index: int, entity_index: int, entity_type: str):
        super().__init__(
            f"document {doc_id!r}: prediction group {group_index} entity {entity_index} "
            f"({entity_type}) has no confidence"
        )
        self.doc_id = doc_id
        self.group_index = group_index
        self.entity_index = entity_index


@dataclass(frozen=True)
class SweepPoint:
    tau: float
    auto_rate: float
    kieval_aligned_tau: float
    reviewed_count: int
    remaining_subs: int
    remaining_del: int
    add_count: int
    post_correction_pred_count: int


@dataclass(frozen=True)
class _Scored:
    confidence: float
    label: Label


def _collect(matches: Iterable[GroupMatchResult]) -> tuple[list[_Scored], int]:
    scored: list[_Scored] = []
    n_add = 0
    for match in matches:
        labels = match.pred_labels()
        for gi, ei, ent in match.pred.entities():
            if ent.confidence is None:
                raise MissingConfidenceError(match.pred.doc_id, gi, ei, ent.entity_type)
            scored.append(_Scored(ent.confidence, labels[(gi, ei)]))
        n_add += sum(1 for a in match.alignments if a.label is Label.ADD)
    return scored, n_add


def sweep_point(scored: Sequence[_Scored], n_add: int, tau: float) -> SweepPoint:
    total = len(scored)
    reviewed = [s for s in scored if s.confidence < tau]
    kept = [s for s in scored if s.confidence >= tau]
    reviewed_del = sum(1 for s in reviewed if s.label is Label.DEL)
    subs_tau = sum(1 for s in kept if s.label is Label.SUBS)
    del_tau = sum(1 for s in kept if s.label is Label.DEL)
    n_star = total - reviewed_del
    auto_rate = (total - len(reviewed)) / total if total else 1.0
    denom = n_star + n_add
    aligned = 1.0 - (subs_tau + del_tau + n_add) / denom if denom else 1.0
    return SweepPoint(tau, auto_rate, aligned, len(reviewed), subs_tau, del_tau, n_add, n_star)


def sweep(matches: Iterable[GroupMatchResult], tau_grid: Optional[Sequence[float]] = None) -> list[SweepPoint]:
    """Evaluate every threshold of ``tau_grid`` over the whole dataset.

    Raises :class:`MissingConfidenceError` before computing anything if a
    prediction entity carries no confidence.
    """
    grid = default_grid() if tau_grid is None else tuple(tau_grid)
    if not grid:
        raise ValueError("tau grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("tau grid must be strictly increasing within [0, 1]")
    scored, n_add = _collect(matches)
    return [sweep_point(scored, n_add, tau) for tau in grid]


def knee_point(points: Sequence[SweepPoint], auto_rate_floor: float) -> Optional[SweepPoint]:
    """Largest threshold whose automation rate still reaches ``auto_rate_floor``."""
    eligible = [p for p in points if p.auto_rate >= auto_rate_floor]
    return max(eligible, key=lambda p: p.tau) if eligible else None


def to_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in astuple(p)])
    return buf.getvalue()
