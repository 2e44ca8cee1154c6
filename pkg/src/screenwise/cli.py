"""Command-line front end.

Subcommands: `rules check` (parse and validate a rule pack), `gen` (write a
deterministic case file), `run` (drive a backend through the two-phase
protocol and score it), and `report` (re-render a finished run's report).

Option precedence for `run` is flags > config file > environment > defaults.
The only environment input is SCREENWISE_API_KEY, read when the remote
backend is selected; it never appears in config files or manifests.

Exit codes: 0 success, 1 runtime or protocol failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, fields, replace
from datetime import datetime, timezone
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import casegen, evalkit, llmlink, oracle, rules
from .vocab import REGISTRY

__all__ = ["main", "RunConfig", "default_rules_path"]

MODES = ("structured", "unstructured", "both")
BACKENDS = ("remote", "mock-perfect", "mock-noisy")


class UsageError(Exception):
    """Bad flags, bad config values, or missing input files. Exit code 2."""


def default_rules_path() -> Path:
    return Path(__file__).parent / "data" / "default.rules"


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one `run` invocation."""

    rules: str = ""
    cases: str = ""
    seed: int = 1
    count: int = 50
    mode: str = "both"
    backend: str = "mock-perfect"
    endpoint: str = ""
    model: str = "gpt-3.5-turbo"
    noise_profile: str = ""
    out: str = ""
    paired: bool = True
    fresh_per_case: bool = False
    max_retries: int = 2
    temperature: float = 0.0
    timeout_s: float = 30.0


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        with open(p, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    stray = set(data) - known
    if stray:
        raise UsageError(f"config file {path}: unknown keys {sorted(stray)}")
    return data


def _resolve_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    file_values: dict = {}
    if args.config:
        file_values = _load_config_file(args.config)
        try:
            cfg = replace(cfg, **file_values)
        except TypeError as exc:
            raise UsageError(f"config file {args.config}: {exc}") from None
    flag_values = {
        name: getattr(args, name)
        for name in (
            "rules", "cases", "seed", "count", "mode", "backend", "endpoint",
            "model", "noise_profile", "out", "paired", "fresh_per_case",
        )
        if getattr(args, name) is not None
    }
    cfg = replace(cfg, **flag_values)
    for name in ("seed", "count", "max_retries"):
        value = getattr(cfg, name)
        if not isinstance(value, int) or isinstance(value, bool):
            raise UsageError(f"{name} must be an integer, got {value!r}")
    for name in ("paired", "fresh_per_case"):
        if not isinstance(getattr(cfg, name), bool):
            raise UsageError(f"{name} must be a boolean")
    if cfg.mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    if cfg.backend not in BACKENDS:
        raise UsageError(f"backend must be one of {BACKENDS}, got {cfg.backend!r}")
    if cfg.count < 1:
        raise UsageError(f"count must be positive, got {cfg.count}")
    seed_given = args.seed is not None or "seed" in file_values
    count_given = args.count is not None or "count" in file_values
    if cfg.cases and (seed_given or count_given):
        raise UsageError("cases conflicts with seed/count; pick one case source")
    if cfg.noise_profile and cfg.backend != "mock-noisy":
        raise UsageError("--noise-profile only applies to the mock-noisy backend")
    if cfg.backend == "remote" and not cfg.endpoint:
        raise UsageError("remote backend needs --endpoint")
    return cfg


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screenwise",
        description="Rule-based screening advice, synthetic cases, and chat-model evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rules_p = sub.add_parser("rules", help="rule pack utilities")
    rules_sub = rules_p.add_subparsers(dest="rules_command", required=True)
    check_p = rules_sub.add_parser("check", help="parse and validate a rule pack")
    check_p.add_argument("--rules", default=None, help="rule pack path (default: shipped pack)")

    gen_p = sub.add_parser("gen", help="generate a synthetic case file")
    gen_p.add_argument("--seed", type=int, default=1)
    gen_p.add_argument("--count", type=_positive_int, default=50)
    gen_p.add_argument("--out", default="cases.jsonl")

    run_p = sub.add_parser("run", help="run the two-phase protocol and score it")
    run_p.add_argument("--config", default=None, help="TOML config file")
    run_p.add_argument("--rules", default=None)
    run_p.add_argument("--cases", default=None, help="existing case file (conflicts with --seed/--count)")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--count", type=int, default=None)
    run_p.add_argument("--mode", choices=MODES, default=None)
    run_p.add_argument("--backend", choices=BACKENDS, default=None)
    run_p.add_argument("--endpoint", default=None)
    run_p.add_argument("--model", default=None)
    run_p.add_argument("--noise-profile", dest="noise_profile", default=None)
    run_p.add_argument("--out", default=None, help="output directory (default: runs/<stamp>-<hash>)")
    run_p.add_argument("--paired", action=argparse.BooleanOptionalAction, default=None,
                       help="render the same cases in both modes (default: paired)")
    run_p.add_argument("--fresh-per-case", dest="fresh_per_case",
                       action=argparse.BooleanOptionalAction, default=None,
                       help="drop earlier case exchanges from each query's context")

    report_p = sub.add_parser("report", help="re-render a run's report")
    report_p.add_argument("--run-dir", dest="run_dir", required=True)
    report_p.add_argument("--format", dest="fmt", choices=evalkit.REPORT_FORMATS, default="markdown")

    return parser


# --- rules check ------------------------------------------------------------

def _load_ruleset(path_text: str | None) -> tuple[rules.RuleSet, str]:
    path = Path(path_text) if path_text else default_rules_path()
    if not path.is_file():
        raise UsageError(f"rule pack not found: {path}")
    return rules.parse_rules(path.read_text(encoding="utf-8")), str(path)


def cmd_rules_check(args: argparse.Namespace) -> int:
    try:
        rs, path = _load_ruleset(args.rules)
    except (rules.RuleSyntaxError, rules.DuplicateRuleId) as exc:
        print(f"rule pack error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"rule pack error: {exc}", file=sys.stderr)
        return 1
    report = rules.validate_ruleset(rs)
    print(f"{path}: {len(rs.rules)} rules, version {rs.version}, checksum {rs.checksum[:12]}")
    if report.conflicts:
        pairs = ", ".join("/".join(c.rule_ids) for c in report.conflicts)
        print(
            f"note: {len(report.conflicts)} rule pairs can co-trigger with different "
            f"recommendations (resolved by priority): {pairs}"
        )
    if report.unreachable:
        for rule_id in report.unreachable:
            print(f"unreachable rule: {rule_id}", file=sys.stderr)
        return 1
    return 0


# --- gen ---------------------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    cases = casegen.generate_cases(casegen.GeneratorConfig(seed=args.seed, count=args.count))
    casegen.write_cases_jsonl(args.out, cases)
    print(f"wrote {len(cases)} cases to {args.out}")
    return 0


# --- run ----------------------------------------------------------------------

def _out_dir_for(cfg: RunConfig) -> Path:
    if cfg.out:
        return Path(cfg.out)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    digest = hashlib.sha256(repr(cfg).encode("utf-8")).hexdigest()[:8]
    return Path("runs") / f"{stamp}-{digest}"


def _arm_cases(cfg: RunConfig) -> tuple[dict[str, tuple[casegen.UseCase, ...]], dict[str, int], bool]:
    """Cases and template seed per arm; the flag says whether they were
    generated here (and so belong in the output directory)."""
    arms = ["structured", "unstructured"] if cfg.mode == "both" else [cfg.mode]
    if cfg.cases:
        path = Path(cfg.cases)
        if not path.is_file():
            raise UsageError(f"case file not found: {path}")
        shared = casegen.read_cases_jsonl(path)
        return {arm: shared for arm in arms}, {arm: 0 for arm in arms}, False
    by_arm: dict[str, tuple[casegen.UseCase, ...]] = {}
    seeds: dict[str, int] = {}
    for i, arm in enumerate(arms):
        # Unpaired runs draw an independent cohort for the second arm.
        seed = cfg.seed if (cfg.paired or i == 0) else cfg.seed + 1
        seeds[arm] = seed
        by_arm[arm] = casegen.generate_cases(casegen.GeneratorConfig(seed=seed, count=cfg.count))
    return by_arm, seeds, True


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_run_config(args)
    rs, rules_path = _load_ruleset(cfg.rules or None)

    noise_profiles: dict[str, llmlink.NoiseProfile] = {}
    if cfg.backend == "mock-noisy":
        if cfg.noise_profile:
            npath = Path(cfg.noise_profile)
            if not npath.is_file():
                raise UsageError(f"noise profile not found: {npath}")
            try:
                noise_profiles = llmlink.load_noise_profiles(npath)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        else:
            noise_profiles = {m: llmlink.NoiseProfile() for m in ("structured", "unstructured")}

    cases_by_arm, template_seeds, generated = _arm_cases(cfg)
    all_case_ids = {c.case_id for cases in cases_by_arm.values() for c in cases}
    for mode, profile in noise_profiles.items():
        scheduled = (
            profile.wrong_recommendation_indices
            | profile.extra_rule_indices
            | profile.zero_rule_indices
        )
        stray = scheduled - all_case_ids
        if stray:
            raise UsageError(f"noise profile schedules unknown case ids for {mode}: {sorted(stray)}")

    out_dir = _out_dir_for(cfg)
    if out_dir.exists() and any(out_dir.iterdir()):
        raise UsageError(f"output directory {out_dir} already exists and is not empty")
    out_dir.mkdir(parents=True, exist_ok=True)

    backend_kind = cfg.backend.replace("-", "_")
    arms = list(cases_by_arm)
    records: list[evalkit.EvaluationRecord] = []
    verdict_rows: list[tuple[str, oracle.OracleVerdict]] = []
    sessions: list[llmlink.Session] = []
    rendered_by_case: dict[int, dict[str, str]] = {}

    for arm in arms:
        backend_cfg = llmlink.BackendConfig(
            kind=backend_kind,
            endpoint_url=cfg.endpoint,
            model_name=cfg.model,
            temperature=cfg.temperature,
            timeout_s=cfg.timeout_s,
            max_retries=cfg.max_retries,
            noise_profile=noise_profiles.get(arm),
        )
        case_source = cfg.cases if cfg.cases else f"seed={template_seeds[arm]}"
        label = f"{arm}|{case_source}|{rs.checksum}|{backend_kind}|{cfg.model}"
        session = llmlink.start_session(
            backend_cfg, fresh_per_case=cfg.fresh_per_case, session_label=label
        )
        sessions.append(session)
        llmlink.load_rules(session, rs)
        for case in cases_by_arm[arm]:
            rendered = casegen.render_case(case, arm, template_seed=template_seeds[arm])
            rendered_by_case.setdefault(case.case_id, {})[f"rendered_{arm}"] = rendered.text
            llm_verdict = llmlink.query_case(session, rendered)
            truth = oracle.evaluate(case, rs)
            verdict_rows.append((arm, truth))
            records.append(evalkit.score_case(truth, llm_verdict, arm))

    summaries = evalkit.aggregate(records)
    (out_dir / "report.md").write_text(evalkit.emit_report(summaries, records, "markdown"), encoding="utf-8")
    (out_dir / "report.csv").write_text(evalkit.emit_report(summaries, records, "csv"), encoding="utf-8")
    (out_dir / "report.json").write_text(evalkit.emit_report(summaries, records, "json"), encoding="utf-8")
    llmlink.write_transcript(out_dir / "transcript.jsonl", sessions)
    evalkit.write_verdicts_jsonl(out_dir / "verdicts.jsonl", verdict_rows)
    if generated:
        if cfg.paired or cfg.mode != "both":
            first = arms[0]
            casegen.write_cases_jsonl(out_dir / "cases.jsonl", cases_by_arm[first], rendered_by_case)
        else:
            # Independent cohorts: tag each row with its arm.
            with open(out_dir / "cases.jsonl", "w", encoding="utf-8") as fh:
                for arm in arms:
                    for c in cases_by_arm[arm]:
                        row = casegen.case_to_dict(c)
                        row["arm"] = arm
                        row[f"rendered_{arm}"] = rendered_by_case[c.case_id][f"rendered_{arm}"]
                        fh.write(json.dumps(row, sort_keys=True, separators=(",", ": ")) + "\n")
    manifest = evalkit.build_manifest(
        backend_cfg=llmlink.BackendConfig(
            kind=backend_kind,
            endpoint_url=cfg.endpoint,
            model_name=cfg.model,
            temperature=cfg.temperature,
            timeout_s=cfg.timeout_s,
            max_retries=cfg.max_retries,
        ),
        ruleset=rs,
        rules_path=rules_path,
        modes=arms,
        paired=cfg.paired,
        fresh_per_case=cfg.fresh_per_case,
        seed=None if cfg.cases else cfg.seed,
        count=None if cfg.cases else cfg.count,
        cases_path=cfg.cases or None,
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    for s in summaries:
        acc = "N/A" if s.accuracy_percent is None else f"{s.accuracy_percent:.1f}%"
        print(f"{s.mode}: {s.n_correct}/{s.total} correct ({acc}), {s.n_faithful} faithful")
    print(f"run written to {out_dir}")
    return 0


# --- report -------------------------------------------------------------------

def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    report_json = run_dir / "report.json"
    if not report_json.is_file():
        raise UsageError(f"no report.json under {run_dir}")
    text = report_json.read_text(encoding="utf-8")
    if args.fmt == "json":
        sys.stdout.write(text)
        return 0
    summaries = evalkit.summaries_from_json(text)
    if args.fmt == "csv":
        sys.stdout.write(evalkit.emit_report(summaries, (), "csv"))
        return 0
    payload = json.loads(text)
    lines = evalkit.emit_report(summaries, (), "markdown").splitlines()
    wrong = [r for r in payload.get("records", []) if not r.get("correct", True)]
    if wrong:
        listing = "Incorrect cases: " + ", ".join(f"{r['mode']} #{r['case_id']}" for r in wrong)
        lines = lines[:-2] + ["", listing] + lines[-2:]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "rules":
            return cmd_rules_check(args)
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "report":
            return cmd_report(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except llmlink.LinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        rules.RuleSyntaxError,
        rules.DuplicateRuleId,
        casegen.FormatError,
        casegen.InvariantViolation,
        evalkit.CaseIdMismatch,
        evalkit.UnsupportedFormat,
        evalkit.ManifestError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
