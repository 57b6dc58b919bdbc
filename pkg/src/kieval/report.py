"""Serialization of metric reports: JSON, CSV and an aligned text table."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Optional

from .metrics import f1_from_counts, macro_average
from .model import NONGROUP, Counts, F1Triple, MetricReport

SCORE_ROWS = (
    ("legacy_entity_f1", "Entity F1"),
    ("kieval_entity_f1", "KIEval Entity F1"),
    ("kieval_group_f1", "KIEval Group F1"),
    ("kieval_aligned", "KIEval_Aligned"),
)
CSV_COLUMNS = (
    "scope",
    "legacy_entity_f1",
    "kieval_entity_f1",
    "kieval_group_f1",
    "kieval_aligned",
    "tp",
    "fp",
    "fn",
    "subs",
    "add",
    "del",
    "error",
)


def _f1(t: Optional[F1Triple]) -> Optional[dict[str, float]]:
    if t is None:
        return None
    return {"precision": t.precision, "recall": t.recall, "f1": t.f1}


def _aligned(c: Counts) -> float:
    denom = c.tp + c.error
    return c.tp / denom if denom else 1.0


def _group_key(gtype) -> Optional[str]:
    return None if gtype is NONGROUP else gtype


def _slice(c: Counts) -> dict[str, Any]:
    return {
        "kieval_entity_f1": _f1(f1_from_counts(c.tp, c.fp, c.fn)),
        "kieval_aligned": _aligned(c),
        "counts": c.as_dict(),
    }


def scores_dict(report: MetricReport) -> dict[str, Any]:
    return {
        "legacy_entity_f1": _f1(report.legacy_entity_f1),
        "kieval_entity_f1": _f1(report.kieval_entity_f1),
        "kieval_group_f1": _f1(report.kieval_group_f1),
        "kieval_aligned": report.kieval_aligned,
    }


def counts_dict(report: MetricReport) -> dict[str, Any]:
    ledger = report.ledger
    return {
        "documents": report.n_documents,
        "entity": ledger.overall.as_dict(),
        "legacy": {"tp": report.legacy_counts.tp, "fp": report.legacy_counts.fp, "fn": report.legacy_counts.fn},
        "group": {"tp": ledger.group_tp, "fp": ledger.group_fp, "fn": ledger.group_fn},
        "fp_plus_fn": ledger.overall.fp + ledger.overall.fn,
    }


def _sorted_group_types(keys):
    return sorted(keys, key=lambda k: (k is not NONGROUP, "" if k is NONGROUP else k))


def report_to_dict(report: MetricReport, manifest: Optional[dict[str, Any]] = None) -> dict[str, Any]:
    """Build the JSON report; key order is fixed so output bytes are stable."""
    ledger = report.ledger
    out: dict[str, Any] = {"manifest": manifest or {}}
    out["scores"] = scores_dict(report)
    if report.per_doc is not None:
        out["scores"]["macro"] = macro_average(report)
    out["counts"] = counts_dict(report)
    out["per_type"] = {etype: _slice(ledger.per_type[etype]) for etype in sorted(ledger.per_type)}
    per_group = []
    for gtype in _sorted_group_types(set(ledger.per_group_type) | set(ledger.per_group_type_groups)):
        item = {"group_type": _group_key(gtype)}
        item.update(_slice(ledger.per_group_type.get(gtype, Counts())))
        if gtype is not NONGROUP:
            tp, fp, fn = ledger.per_group_type_groups.get(gtype, (0, 0, 0))
            item["kieval_group_f1"] = _f1(f1_from_counts(tp, fp, fn))
            item["group_counts"] = {"tp": tp, "fp": fp, "fn": fn}
        per_group.append(item)
    out["per_group_type"] = per_group
    if report.per_doc is not None:
        out["per_doc"] = [
            {"id": doc_id, "scores": scores_dict(r), "counts": counts_dict(r)} for doc_id, r in report.per_doc
        ]
    return out


def to_json(report_dict: dict[str, Any]) -> str:
    return json.dumps(report_dict, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _fmt(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.4f}"


def _row_from_dict(scope: str, scores: dict[str, Any], counts: dict[str, Any]) -> dict[str, Any]:
    def f1(key):
        v = scores.get(key)
        return None if v is None else v["f1"]

    row = {
        "scope": scope,
        "legacy_entity_f1": f1("legacy_entity_f1"),
        "kieval_entity_f1": f1("kieval_entity_f1"),
        "kieval_group_f1": f1("kieval_group_f1"),
        "kieval_aligned": scores.get("kieval_aligned"),
    }
    row.update({k: counts[k] for k in ("tp", "fp", "fn", "subs", "add", "del", "error")})
    return row


def _rows(data: dict[str, Any], per_type: bool) -> list[dict[str, Any]]:
    rows = [_row_from_dict("overall", data["scores"], data["counts"]["entity"])]
    for doc in data.get("per_doc") or []:
        rows.append(_row_from_dict(f"doc:{doc['id']}", doc["scores"], doc["counts"]["entity"]))
    if per_type:
        for etype, sl in data["per_type"].items():
            rows.append(_row_from_dict(f"type:{etype}", sl, sl["counts"]))
        for item in data["per_group_type"]:
            name = "(nongroup)" if item["group_type"] is None else item["group_type"]
            rows.append(_row_from_dict(f"group:{name}", item, item["counts"]))
    return rows


def render_csv(data: dict[str, Any], per_type: bool = False) -> str:
    """One row per scope; scores at full precision, inapplicable as ``-``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in _rows(data, per_type):
        writer.writerow(
            ["-" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in CSV_COLUMNS]
        )
    return buf.getvalue()


def _grid(header: list[str], body: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths)))]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
    return lines


def render_table(data: dict[str, Any], per_type: bool = False) -> str:
    """Metrics as rows, scopes as columns, followed by the correction ledger."""
    scopes = [("overall", data["scores"], data["counts"])]
    for doc in data.get("per_doc") or []:
        scopes.append((doc["id"], doc["scores"], doc["counts"]))

    header = ["", *[name for name, _, _ in scopes]]
    body = []
    for key, label in SCORE_ROWS:
        cells = []
        for _, scores, _ in scopes:
            v = scores.get(key)
            cells.append(_fmt(v if key == "kieval_aligned" or v is None else v["f1"]))
        body.append([label, *cells])
    lines = _grid(header, body)

    lines.append("")
    ledger_rows = [("FP + FN", "fp_plus_fn"), ("Subs", "subs"), ("Add", "add"), ("Del", "del"), ("Correction", "error")]
    body = []
    for label, key in ledger_rows:
        cells = []
        for _, _, counts in scopes:
            ent = counts["entity"]
            cells.append(str(ent["fp"] + ent["fn"] if key == "fp_plus_fn" else ent[key]))
        body.append([label, *cells])
    lines.extend(_grid(header, body))

    if per_type:
        lines.append("")
        header = ["entity type", "KIEval Entity F1", "KIEval_Aligned", "TP", "FP", "FN", "Subs", "Add", "Del"]
        body = []
        for etype, sl in data["per_type"].items():
            c = sl["counts"]
            body.append(
                [etype, _fmt(sl["kieval_entity_f1"]["f1"]), _fmt(sl["kieval_aligned"])]
                + [str(c[k]) for k in ("tp", "fp", "fn", "subs", "add", "del")]
            )
        lines.extend(_grid(header, body))
        lines.append("")
        header = ["group type", "KIEval Entity F1", "KIEval Group F1", "KIEval_Aligned", "TP", "FP", "FN"]
        body = []
        for item in data["per_group_type"]:
            c = item["counts"]
            gf1 = item.get("kieval_group_f1")
            body.append(
                [
                    "(nongroup)" if item["group_type"] is None else item["group_type"],
                    _fmt(item["kieval_entity_f1"]["f1"]),
                    _fmt(None if gf1 is None else gf1["f1"]),
                    _fmt(item["kieval_aligned"]),
                ]
                + [str(c[k]) for k in ("tp", "fp", "fn")]
            )
        lines.extend(_grid(header, body))
    return "\n".join(lines) + "\n"
