#!/usr/bin/env python3
"""End-to-end demo against the deterministic perfect mock.

Loads the shipped rule pack into two sessions (one per presentation mode),
asks each session about the same generated cohort, scores the replies
against the oracle, and prints the summary table. Runs fully offline.

Usage:
    python scripts/run_mock_experiment.py [--seed N] [--count N] [--fresh-per-case]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from screenwise import casegen, evalkit, llmlink, oracle, rules, vocab


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--fresh-per-case", action="store_true")
    args = ap.parse_args()

    pack = Path(rules.__file__).parent / "data" / "default.rules"
    rs = rules.parse_rules(pack.read_text(), vocab.REGISTRY)
    report = rules.validate_ruleset(rs)
    print(f"rule pack: {len(rs.rules)} rules, checksum {rs.checksum[:12]}, "
          f"{len(report.conflicts)} priority-resolved overlap pairs")

    cases = casegen.generate_cases(casegen.GeneratorConfig(seed=args.seed, count=args.count))
    records: list[evalkit.EvaluationRecord] = []
    for mode in ("structured", "unstructured"):
        cfg = llmlink.BackendConfig(kind="mock_perfect")
        session = llmlink.start_session(
            cfg, fresh_per_case=args.fresh_per_case, session_label=f"demo|{mode}|{args.seed}"
        )
        receipt = llmlink.load_rules(session, rs)
        assert receipt.all_confirmed
        for case in cases:
            rendered = casegen.render_case(case, mode, template_seed=args.seed)
            verdict = llmlink.query_case(session, rendered)
            records.append(evalkit.score_case(oracle.evaluate(case, rs), verdict, mode))
        print(f"{mode}: session {session.session_id} exchanged "
              f"{len(session.message_log)} messages")

    print()
    print(evalkit.emit_report(evalkit.aggregate(records), records, fmt="markdown"))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
