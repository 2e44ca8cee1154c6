"""Scoring model verdicts against ground truth and reporting the counts.

Correctness is recommendation match alone. Faithfulness is stricter: the
cited rule set must equal the ground-truth triggered set and no unknown rule
ids may appear. Reports come in markdown, csv, and json; all three are
deterministic byte-for-byte for the same inputs, and csv/json parse back to
the exact summary values.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .llmlink import UNPARSEABLE, BackendConfig, LlmVerdict, PROMPT_FILES, prompts_dir
from .oracle import OracleVerdict
from .rules import RuleSet
from .vocab import Recommendation

__all__ = [
    "EvaluationRecord",
    "MetricsSummary",
    "CaseIdMismatch",
    "UnsupportedFormat",
    "ManifestError",
    "score_case",
    "summarize",
    "aggregate",
    "emit_report",
    "parse_csv_report",
    "summaries_from_json",
    "build_manifest",
    "write_verdicts_jsonl",
    "REPORT_FORMATS",
]

REPORT_FORMATS = ("markdown", "csv", "json")

_MD_NOTE = "Generated by an automated screening-protocol evaluation. Not medical advice."


class CaseIdMismatch(ValueError):
    pass


class UnsupportedFormat(ValueError):
    pass


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class EvaluationRecord:
    """One scored case in one render mode."""

    case_id: int
    mode: str
    oracle: OracleVerdict
    llm: LlmVerdict
    correct: bool
    n_cited: int
    zero_cited: bool
    faithful: bool


@dataclass(frozen=True)
class MetricsSummary:
    mode: str
    total: int
    n_correct: int
    n_incorrect: int
    n_one_rule: int
    n_multi_rule: int
    n_zero_rule: int
    accuracy_percent: float | None
    n_faithful: int


def score_case(o: OracleVerdict, l: LlmVerdict, mode: str) -> EvaluationRecord:
    if o.case_id != l.case_id:
        raise CaseIdMismatch(f"oracle case {o.case_id} scored against llm case {l.case_id}")
    correct = isinstance(l.recommendation, Recommendation) and l.recommendation == o.recommendation
    n_cited = len(l.cited_rules)
    faithful = l.cited_rules == frozenset(o.triggered) and not l.unknown_citations
    return EvaluationRecord(
        case_id=o.case_id,
        mode=mode,
        oracle=o,
        llm=l,
        correct=correct,
        n_cited=n_cited,
        zero_cited=n_cited == 0,
        faithful=faithful,
    )


def summarize(mode: str, records: Sequence[EvaluationRecord]) -> MetricsSummary:
    """Counts for one mode. With no records the accuracy is undefined (None,
    rendered as N/A), never a division by zero."""
    total = len(records)
    n_correct = sum(1 for r in records if r.correct)
    n_one = sum(1 for r in records if r.n_cited == 1)
    n_multi = sum(1 for r in records if r.n_cited > 1)
    n_zero = sum(1 for r in records if r.zero_cited)
    accuracy = round(100.0 * n_correct / total, 1) if total else None
    return MetricsSummary(
        mode=mode,
        total=total,
        n_correct=n_correct,
        n_incorrect=total - n_correct,
        n_one_rule=n_one,
        n_multi_rule=n_multi,
        n_zero_rule=n_zero,
        accuracy_percent=accuracy,
        n_faithful=sum(1 for r in records if r.faithful),
    )


def aggregate(records: Sequence[EvaluationRecord]) -> tuple[MetricsSummary, ...]:
    """One summary per mode present, modes in sorted order. The counts do not
    depend on record order."""
    modes = sorted({r.mode for r in records})
    return tuple(summarize(m, [r for r in records if r.mode == m]) for m in modes)


def _accuracy_text(s: MetricsSummary) -> str:
    return "N/A" if s.accuracy_percent is None else f"{s.accuracy_percent:.1f}%"


def _rec_code(value: Recommendation | object) -> str:
    return value.code if isinstance(value, Recommendation) else "UNPARSEABLE"


def _record_to_dict(r: EvaluationRecord) -> dict:
    return {
        "case_id": r.case_id,
        "mode": r.mode,
        "correct": r.correct,
        "faithful": r.faithful,
        "n_cited": r.n_cited,
        "zero_cited": r.zero_cited,
        "oracle": {
            "recommendation": r.oracle.recommendation.code,
            "triggered": list(r.oracle.triggered),
        },
        "llm": {
            "recommendation": _rec_code(r.llm.recommendation),
            "cited_rules": sorted(r.llm.cited_rules),
            "unknown_citations": sorted(r.llm.unknown_citations),
            "explanation": r.llm.explanation_text,
        },
    }


def _summary_to_dict(s: MetricsSummary) -> dict:
    return {
        "mode": s.mode,
        "total": s.total,
        "correct": s.n_correct,
        "incorrect": s.n_incorrect,
        "one_rule": s.n_one_rule,
        "multi_rule": s.n_multi_rule,
        "zero_rule": s.n_zero_rule,
        "accuracy_percent": s.accuracy_percent,
        "faithful": s.n_faithful,
    }


def _summary_from_dict(row: dict) -> MetricsSummary:
    return MetricsSummary(
        mode=row["mode"],
        total=int(row["total"]),
        n_correct=int(row["correct"]),
        n_incorrect=int(row["incorrect"]),
        n_one_rule=int(row["one_rule"]),
        n_multi_rule=int(row["multi_rule"]),
        n_zero_rule=int(row["zero_rule"]),
        accuracy_percent=None if row["accuracy_percent"] in (None, "N/A", "") else float(row["accuracy_percent"]),
        n_faithful=int(row["faithful"]),
    )


def emit_report(
    summaries: Sequence[MetricsSummary],
    records: Sequence[EvaluationRecord] = (),
    fmt: str = "markdown",
) -> str:
    """Render one report. Formats: markdown (table), csv, json (summaries
    plus per-case records)."""
    if fmt == "markdown":
        lines = [
            "# Screening protocol evaluation",
            "",
            "| Mode | Correct | Incorrect | 1-Rule | N-Rule | Zero-Rule | Accuracy | Faithful |",
            "| --- | --- | --- | --- | --- | --- | --- | --- |",
        ]
        for s in summaries:
            lines.append(
                f"| {s.mode} | {s.n_correct} | {s.n_incorrect} | {s.n_one_rule} "
                f"| {s.n_multi_rule} | {s.n_zero_rule} | {_accuracy_text(s)} | {s.n_faithful} |"
            )
        if records:
            wrong = [r for r in sorted(records, key=lambda r: (r.mode, r.case_id)) if not r.correct]
            if wrong:
                lines.append("")
                lines.append(
                    "Incorrect cases: "
                    + ", ".join(f"{r.mode} #{r.case_id}" for r in wrong)
                )
        lines.extend(["", _MD_NOTE, ""])
        return "\n".join(lines)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["mode", "total", "correct", "incorrect", "one_rule", "multi_rule",
             "zero_rule", "accuracy_percent", "faithful"]
        )
        for s in summaries:
            writer.writerow([
                s.mode, s.total, s.n_correct, s.n_incorrect, s.n_one_rule,
                s.n_multi_rule, s.n_zero_rule,
                "N/A" if s.accuracy_percent is None else f"{s.accuracy_percent:.1f}",
                s.n_faithful,
            ])
        return buf.getvalue()
    if fmt == "json":
        payload = {
            "summaries": [_summary_to_dict(s) for s in summaries],
            "records": [
                _record_to_dict(r)
                for r in sorted(records, key=lambda r: (r.mode, r.case_id))
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    raise UnsupportedFormat(f"unknown report format: {fmt!r}")


def parse_csv_report(text: str) -> tuple[MetricsSummary, ...]:
    reader = csv.DictReader(io.StringIO(text))
    return tuple(_summary_from_dict(row) for row in reader)


def summaries_from_json(text: str) -> tuple[MetricsSummary, ...]:
    payload = json.loads(text)
    return tuple(_summary_from_dict(row) for row in payload["summaries"])


def write_verdicts_jsonl(path: str | Path, rows: Iterable[tuple[str, OracleVerdict]]) -> None:
    """Ground-truth file: one line per (mode, case), stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for mode, v in rows:
            row = {
                "case_id": v.case_id,
                "mode": mode,
                "recommendation": v.recommendation.code,
                "triggered": list(v.triggered),
            }
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ": ")) + "\n")


def build_manifest(
    *,
    backend_cfg: BackendConfig,
    ruleset: RuleSet,
    rules_path: str,
    modes: Sequence[str],
    paired: bool,
    fresh_per_case: bool,
    seed: int | None,
    count: int | None,
    cases_path: str | None,
    prompt_dir: Path | None = None,
) -> dict:
    """Everything needed to reproduce a run, plus a generation timestamp.

    Prompt templates are hashed file by file; a missing template is an error
    that names the file rather than a silently incomplete manifest."""
    pdir = prompt_dir or prompts_dir()
    prompt_hashes: dict[str, str] = {}
    for name in PROMPT_FILES:
        path = pdir / name
        if not path.is_file():
            raise ManifestError(f"prompt template missing: {path}")
        prompt_hashes[name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "count": count,
        "cases_path": cases_path,
        "rules_path": rules_path,
        "ruleset_version": ruleset.version,
        "ruleset_checksum": ruleset.checksum,
        "prompt_hashes": prompt_hashes,
        "backend": {
            "kind": backend_cfg.kind,
            "model": backend_cfg.model_name,
            "endpoint": backend_cfg.endpoint_url,
            "temperature": backend_cfg.temperature,
            "max_retries": backend_cfg.max_retries,
        },
        "modes": list(modes),
        "paired": paired,
        "fresh_per_case": fresh_per_case,
    }
