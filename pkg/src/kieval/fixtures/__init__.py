"""Canonical evaluation scenarios shipped as plain dataset-JSON files.

Each fixture directory holds ``gt.json``, ``pred.json`` and
``expected.json``.  Every expected value carries a provenance tag naming how
it was obtained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Optional, Union

from ..ingest import DatasetFile, parse_dataset
from ..model import EvalConfig

Number = Union[int, Fraction, None]


@dataclass(frozen=True)
class FixtureCase:
    name: str
    description: str
    gt: DatasetFile
    pred: DatasetFile
    expected: dict[str, Number]
    provenance: dict[str, str]
    per_doc: dict[str, dict[str, Number]] = field(default_factory=dict)


def _root():
    return resources.files(__package__).joinpath("data")


def fixture_names() -> list[str]:
    return sorted(p.name for p in _root().iterdir() if p.is_dir())


def fixture_path(name: str, part: str):
    """Filesystem path of ``gt``, ``pred`` or ``expected`` for a fixture."""
    if name not in fixture_names():
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    return _root().joinpath(name, f"{part}.json")


def _number(raw: Any) -> Number:
    if raw is None or isinstance(raw, int):
        return raw
    return Fraction(raw)


def _unpack(block: dict[str, Any]) -> tuple[dict[str, Number], dict[str, str]]:
    values, tags = {}, {}
    for key, item in block.items():
        values[key] = _number(item["value"])
        tags[key] = item["provenance"]
    return values, tags


def load_fixture(name: str, config: Optional[EvalConfig] = None) -> FixtureCase:
    """Load a fixture through the regular ingestion path."""
    gt = parse_dataset(fixture_path(name, "gt").read_bytes(), config, source_path=f"{name}/gt.json")
    pred = parse_dataset(fixture_path(name, "pred").read_bytes(), config, source_path=f"{name}/pred.json")
    meta = json.loads(fixture_path(name, "expected").read_text(encoding="utf-8"))
    expected, provenance = _unpack(meta["expected"])
    per_doc = {doc_id: _unpack(block)[0] for doc_id, block in meta.get("per_doc", {}).items()}
    return FixtureCase(name, meta.get("description", ""), gt, pred, expected, provenance, per_doc)
