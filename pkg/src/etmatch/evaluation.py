"""Alignment scoring, reference loaders, ablation driver, report emission.

Scoring is set-based over (id A, id B) pairs. Precision, recall, and the
F-measures fall back to 0 whenever a denominator is 0, so reports are
total functions of the inputs.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

from .config import RunConfig
from .errors import EvalInputError, ParseError
from .matcher import Alignment, MatchTask, extract_alignment, score_candidates, train_matcher

log = logging.getLogger(__name__)


def f_beta(precision: float, recall: float, beta: float) -> float:
    """Weighted harmonic mean of precision and recall; 0 when undefined."""
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


@dataclass(frozen=True)
class EvalReport:
    """Set-based alignment quality counts and derived measures."""

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_half: float
    f1: float
    f2: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(
            tp=tp,
            fp=fp,
            fn=fn,
            precision=precision,
            recall=recall,
            f_half=f_beta(precision, recall, 0.5),
            f1=f_beta(precision, recall, 1.0),
            f2=f_beta(precision, recall, 2.0),
        )


def _as_pairs(predicted: Alignment | Iterable[tuple[str, str]]) -> set[tuple[str, str]]:
    if isinstance(predicted, Alignment):
        return predicted.pairs()
    return set(predicted)


def score(
    predicted: Alignment | Iterable[tuple[str, str]],
    reference: Iterable[tuple[str, str]],
) -> EvalReport:
    """Compare predicted correspondences against a reference alignment."""
    ref = set(reference)
    if not ref:
        raise EvalInputError("reference alignment is empty")
    pred = _as_pairs(predicted)
    tp = len(pred & ref)
    return EvalReport.from_counts(tp=tp, fp=len(pred) - tp, fn=len(ref) - tp)


def micro_average(reports: list[EvalReport]) -> EvalReport:
    """Pool counts across tasks, then derive the measures once."""
    if not reports:
        raise EvalInputError("no reports to aggregate")
    return EvalReport.from_counts(
        tp=sum(r.tp for r in reports),
        fp=sum(r.fp for r in reports),
        fn=sum(r.fn for r in reports),
    )


def macro_average(reports: list[EvalReport]) -> dict:
    """Unweighted mean of each measure across tasks."""
    if not reports:
        raise EvalInputError("no reports to aggregate")
    n = len(reports)
    return {
        "precision": sum(r.precision for r in reports) / n,
        "recall": sum(r.recall for r in reports) / n,
        "f_half": sum(r.f_half for r in reports) / n,
        "f1": sum(r.f1 for r in reports) / n,
        "f2": sum(r.f2 for r in reports) / n,
    }


def _fragment(uri: str) -> str:
    """Local id of a resource URI: the #fragment, else the last path segment."""
    if "#" in uri:
        return uri.rsplit("#", 1)[1]
    trimmed = uri.rstrip("/")
    if "/" in trimmed:
        return trimmed.rsplit("/", 1)[1]
    return trimmed


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _load_reference_xml(path: Path) -> frozenset[tuple[str, str]]:
    try:
        root = ET.fromstring(path.read_text(encoding="utf-8"))
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else None
        raise ParseError(f"malformed XML: {exc.msg.split(':')[0]}", path=str(path), line=line) from exc
    pairs: set[tuple[str, str]] = set()
    for cell in root.iter():
        if _localname(cell.tag) != "Cell":
            continue
        entity1 = entity2 = relation = None
        for child in cell:
            name = _localname(child.tag)
            if name in ("entity1", "entity2"):
                resource = next(
                    (v for k, v in child.attrib.items() if _localname(k) == "resource"),
                    None,
                )
                if name == "entity1":
                    entity1 = resource
                else:
                    entity2 = resource
            elif name == "relation":
                relation = (child.text or "").strip()
        if entity1 is None or entity2 is None:
            log.warning("%s: skipping correspondence cell without both entities", path)
            continue
        if relation != "=":
            log.warning("%s: skipping non-equivalence relation %r", path, relation)
            continue
        pairs.add((_fragment(entity1), _fragment(entity2)))
    return frozenset(pairs)


def _load_reference_tsv(path: Path) -> frozenset[tuple[str, str]]:
    pairs: set[tuple[str, str]] = set()
    for lineno, rawline in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ParseError(
                f"expected two tab-separated ids, got {len(parts)} fields",
                path=str(path),
                line=lineno,
            )
        pairs.add((parts[0], parts[1]))
    return frozenset(pairs)


def load_reference(path: str | Path) -> frozenset[tuple[str, str]]:
    """Reference alignment from TSV (idA, idB) or an alignment-XML subset."""
    path = Path(path)
    try:
        head = path.read_text(encoding="utf-8").lstrip()[:1]
    except OSError as exc:
        raise ParseError(f"cannot read reference file: {exc}", path=str(path)) from exc
    if path.suffix.lower() in (".xml", ".rdf") or head == "<":
        return _load_reference_xml(path)
    return _load_reference_tsv(path)


def load_predicted(path: str | Path) -> frozenset[tuple[str, str]]:
    """Predicted pairs: decision-1 rows of a match TSV, or a plain pair TSV."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read predicted alignment: {exc}", path=str(path)) from exc
    pairs: set[tuple[str, str]] = set()
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 2:
            pairs.add((parts[0], parts[1]))
        elif len(parts) == 4:
            if parts[3] not in ("0", "1"):
                raise ParseError(
                    f"decision column must be 0 or 1, got {parts[3]!r}",
                    path=str(path),
                    line=lineno,
                )
            if parts[3] == "1":
                pairs.add((parts[0], parts[1]))
        else:
            raise ParseError(
                f"expected 2 or 4 tab-separated fields, got {len(parts)}",
                path=str(path),
                line=lineno,
            )
    return frozenset(pairs)


STANDARD_VARIANTS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("B", ("es_h", "es_v")),
    ("B+ES_v", ("es_h",)),
    ("B+ES_h", ("es_v",)),
    ("B+ES_v+ES_h", ()),
)


@dataclass(frozen=True)
class AblationTask:
    """Train/test split for ablation runs."""

    train_tasks: tuple[MatchTask, ...]
    test_task: MatchTask


def run_ablation(
    task: AblationTask,
    config: RunConfig,
    variants: tuple[tuple[str, tuple[str, ...]], ...] = STANDARD_VARIANTS,
) -> list[tuple[str, EvalReport]]:
    """Train and evaluate one model per feature mask, same seed throughout."""
    rows: list[tuple[str, EvalReport]] = []
    for name, mask in variants:
        model, _ = train_matcher(list(task.train_tasks), config, mask=mask)
        predictions = score_candidates(model, task.test_task.context, config)
        alignment = extract_alignment(
            predictions, policy=config.extraction_policy, threshold=config.threshold
        )
        rows.append((name, score(alignment, task.test_task.reference)))
    return rows


_METRIC_COLUMNS = ("precision", "recall", "f_0.5", "f_1", "f_2")


def emit_report(rows: list[tuple[str, EvalReport]], format: str = "text_table") -> str:
    """Render reports as a 3-decimal text table or full-precision JSON."""
    if format == "machine_json":
        payload = [{"name": name, **asdict(report)} for name, report in rows]
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if format != "text_table":
        raise ValueError(f"unknown report format {format!r}")
    name_width = max([len("variant")] + [len(name) for name, _ in rows])
    lines = [
        "  ".join(["variant".ljust(name_width)] + list(_METRIC_COLUMNS)),
    ]
    for name, report in rows:
        cells = [
            f"{report.precision:.3f}",
            f"{report.recall:.3f}",
            f"{report.f_half:.3f}",
            f"{report.f1:.3f}",
            f"{report.f2:.3f}",
        ]
        lines.append("  ".join([name.ljust(name_width)] + cells))
    return "\n".join(lines) + "\n"


def reports_from_json(document: str) -> list[tuple[str, EvalReport]]:
    """Inverse of the machine format; values round-trip exactly."""
    payload = json.loads(document)
    rows: list[tuple[str, EvalReport]] = []
    for item in payload:
        name = item.pop("name")
        rows.append((name, EvalReport(**item)))
    return rows
