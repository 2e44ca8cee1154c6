"""Rule-based breast cancer screening advice and a chat-model evaluation rig.

The pipeline: encode screening guidance as IF/THEN rules, generate synthetic
patient cases deterministically, load the rules into a chat model one by one
with confirmations, query each case under an explainability contract, and
score the replies against a forward-chaining ground-truth evaluator.
"""

from .casegen import (
    GeneratorConfig,
    RenderedCase,
    UseCase,
    generate_cases,
    parse_structured,
    render_structured,
    render_unstructured,
)
from .evalkit import EvaluationRecord, MetricsSummary, aggregate, emit_report, score_case
from .llmlink import (
    BackendConfig,
    LlmVerdict,
    NoiseProfile,
    Session,
    UNPARSEABLE,
    load_rules,
    parse_response,
    query_case,
    start_session,
)
from .oracle import OracleVerdict, enumerate_input_grid, evaluate, resolve_conflicts
from .rules import (
    Rule,
    RuleSet,
    parse_rules,
    render_rule_prompt,
    serialize,
    validate_ruleset,
)
from .vocab import REGISTRY, Recommendation, RiskFactor

__version__ = "0.1.0"
