"""Chat-model link: sessions, the two-phase protocol, and backends.

Phase one loads rules one prompt at a time and requires an explicit
CONFIRMED <rule_id> acknowledgement before moving on. Phase two sends one
case per prompt with a fixed reply-format clause and parses the reply into a
verdict. Backends are pluggable: a remote chat-completions endpoint, or two
offline mocks (perfect and noisy) that run the ground-truth evaluator.

The mocks learn their rules the same way a real model would, by reading the
rule-loading prompts out of the conversation, so protocol bugs surface as
mock failures instead of silently passing.
"""

from __future__ import annotations

import json
import os
import re
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Protocol

import requests

from .casegen import RenderedCase, UseCase, parse_structured
from .oracle import evaluate
from .rules import Rule, RuleSet, make_ruleset, render_rule_prompt
from .vocab import (
    RECOMMENDATION_PHRASES,
    REGISTRY,
    Recommendation,
    Registry,
    code_for_display_name,
    recommendation_phrase,
)

__all__ = [
    "ENV_API_KEY",
    "PROMPT_FILES",
    "UNPARSEABLE",
    "LinkError",
    "MissingCredential",
    "BackendError",
    "BackendTimeout",
    "BackendUnreachable",
    "ConfirmationFailed",
    "EmptyRuleSet",
    "ProtocolError",
    "NoiseProfile",
    "BackendConfig",
    "Message",
    "Session",
    "LoadEntry",
    "LoadReceipt",
    "LlmVerdict",
    "ParsedReply",
    "RemoteBackend",
    "MockBackend",
    "start_session",
    "load_rules",
    "query_case",
    "parse_response",
    "mock_respond",
    "load_noise_profiles",
    "prompts_dir",
    "load_prompt",
    "write_transcript",
    "read_transcript",
]

ENV_API_KEY = "SCREENWISE_API_KEY"
PROMPT_FILES = ("system_role.txt", "rule_confirm.txt", "case_query.txt")

BACKEND_KINDS = ("remote", "mock_perfect", "mock_noisy")


class LinkError(Exception):
    """Base for everything that can go wrong while driving a backend."""


class MissingCredential(LinkError):
    def __init__(self) -> None:
        super().__init__(f"remote backend needs the {ENV_API_KEY} environment variable")


class BackendError(LinkError):
    pass


class BackendTimeout(BackendError):
    pass


class BackendUnreachable(BackendError):
    pass


class ConfirmationFailed(LinkError):
    def __init__(self, rule_id: str, raw_reply: str) -> None:
        self.rule_id = rule_id
        self.raw_reply = raw_reply
        super().__init__(f"rule {rule_id} was never confirmed; last reply: {raw_reply!r}")


class EmptyRuleSet(LinkError):
    pass


class ProtocolError(LinkError):
    """Operation attempted out of protocol order."""


class _UnparseableType:
    """Singleton marker for a reply with no recognizable recommendation."""

    _instance: "_UnparseableType | None" = None

    def __new__(cls) -> "_UnparseableType":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNPARSEABLE"


UNPARSEABLE = _UnparseableType()


@dataclass(frozen=True)
class NoiseProfile:
    """Which case ids get which mutation in the noisy mock. The sets need not
    be disjoint; zeroing is applied last."""

    wrong_recommendation_indices: frozenset[int] = frozenset()
    extra_rule_indices: frozenset[int] = frozenset()
    zero_rule_indices: frozenset[int] = frozenset()


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    endpoint_url: str = ""
    model_name: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    timeout_s: float = 30.0
    max_retries: int = 2
    noise_profile: NoiseProfile | None = None


@dataclass(frozen=True)
class Message:
    role: str
    content: str
    timestamp: str


@dataclass
class Session:
    """One conversation with one backend, with an append-only message log."""

    session_id: str
    backend: "ChatBackend"
    max_retries: int
    message_log: list[Message] = field(default_factory=list)
    rule_id_map: dict[str, bool] = field(default_factory=dict)
    rules_loaded: bool = False
    loaded_rule_ids: tuple[str, ...] = ()
    fresh_per_case: bool = False
    prompts: dict[str, str] = field(default_factory=dict)
    _rules_end: int = 0


@dataclass(frozen=True)
class LoadEntry:
    rule_id: str
    confirmed: bool
    attempts: int
    reply: str


@dataclass(frozen=True)
class LoadReceipt:
    session_id: str
    entries: tuple[LoadEntry, ...]

    @property
    def all_confirmed(self) -> bool:
        return all(e.confirmed for e in self.entries)


@dataclass(frozen=True)
class LlmVerdict:
    case_id: int
    recommendation: Recommendation | _UnparseableType
    cited_rules: frozenset[str]
    unknown_citations: frozenset[str]
    explanation_text: str
    raw_response: str


@dataclass(frozen=True)
class ParsedReply:
    recommendation: Recommendation | _UnparseableType
    cited_rules: frozenset[str]
    unknown_citations: frozenset[str]
    explanation_text: str


class ChatBackend(Protocol):
    def complete(self, messages: list[dict[str, str]]) -> str: ...


# --- prompt templates -------------------------------------------------------

def prompts_dir() -> Path:
    return Path(__file__).parent / "data" / "prompts"


def load_prompt(name: str, prompt_dir: Path | None = None) -> str:
    path = (prompt_dir or prompts_dir()) / name
    return path.read_text(encoding="utf-8").rstrip("\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --- remote backend ---------------------------------------------------------

class RemoteBackend:
    """Chat-completions style HTTP backend, bearer-token authenticated."""

    def __init__(self, cfg: BackendConfig, api_key: str) -> None:
        self.cfg = cfg
        self._api_key = api_key

    def probe(self) -> None:
        try:
            requests.head(self.cfg.endpoint_url, timeout=min(self.cfg.timeout_s, 5.0))
        except requests.exceptions.RequestException as exc:
            raise BackendUnreachable(f"cannot reach {self.cfg.endpoint_url}: {exc}") from exc

    def complete(self, messages: list[dict[str, str]]) -> str:
        payload = {
            "model": self.cfg.model_name,
            "temperature": self.cfg.temperature,
            "messages": messages,
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        try:
            resp = requests.post(
                self.cfg.endpoint_url, json=payload, headers=headers, timeout=self.cfg.timeout_s
            )
        except requests.exceptions.Timeout as exc:
            raise BackendTimeout(f"no reply within {self.cfg.timeout_s}s") from exc
        except requests.exceptions.RequestException as exc:
            raise BackendError(str(exc)) from exc
        if resp.status_code >= 400:
            raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed completion payload: {exc}") from exc


# --- mock backends ----------------------------------------------------------

_CONFIRM_REQUEST_RE = re.compile(r"replying with exactly:\s*CONFIRMED\s+(R\d+)")
_CASE_HEADER_RE = re.compile(r"\ACase (\d+):\n")
_QUERY_CLAUSE_MARKER = "\n\nEvaluate this case using only"
_RENDERED_RULE_RE = re.compile(r"^Rule (R\d+): IF (.+) THEN recommend (.+)\.$", re.MULTILINE)

_PHRASE_TO_REC = {phrase: rec for rec, phrase in RECOMMENDATION_PHRASES.items()}

_GENDER_PHRASE_RE = re.compile(r"\Athe person's gender is (female|male)\Z")
_AGE_PHRASE_RE = re.compile(r"\Athe person's age is between (\d+) and (\d+)\Z")
_FACTOR_PHRASE_RE = re.compile(r"\Athe person has risk factor (.+)\Z")
_COUNT_PHRASE_RE = re.compile(r"\Athe person has at least (\d+) risk factors?\Z")

_FEMALE_WORD_RE = re.compile(r"\b(she|her|hers|woman|female)\b", re.IGNORECASE)
_MALE_WORD_RE = re.compile(r"\b(he|him|his|man|male)\b", re.IGNORECASE)
_INT_RE = re.compile(r"\d+")


def parse_rendered_rule(text: str) -> Rule:
    """Invert render_rule_prompt: recover a Rule from its English form."""
    from .rules import AgeInRange, GenderIs, HasRiskFactor, RiskFactorCountAtLeast

    m = _RENDERED_RULE_RE.search(text)
    if m is None:
        raise ValueError(f"not a rendered rule: {text!r}")
    rule_id, cond_text, rec_phrase = m.group(1), m.group(2), m.group(3)
    conditions = []
    for part in cond_text.split(" AND "):
        if gm := _GENDER_PHRASE_RE.match(part):
            conditions.append(GenderIs(gm.group(1)))
        elif am := _AGE_PHRASE_RE.match(part):
            conditions.append(AgeInRange(int(am.group(1)), int(am.group(2))))
        elif cm := _COUNT_PHRASE_RE.match(part):
            conditions.append(RiskFactorCountAtLeast(int(cm.group(1))))
        elif fm := _FACTOR_PHRASE_RE.match(part):
            conditions.append(HasRiskFactor(code_for_display_name(fm.group(1))))
        else:
            raise ValueError(f"unrecognized condition phrase: {part!r}")
    rec = _PHRASE_TO_REC.get(rec_phrase)
    if rec is None:
        raise ValueError(f"unrecognized recommendation phrase: {rec_phrase!r}")
    name = f"loaded_{rule_id.lower()}"
    return Rule(rule_id, name, tuple(conditions), rec)


def _rules_from_messages(messages: list[dict[str, str]]) -> RuleSet:
    """Rebuild the rule set a model would have stored from this conversation."""
    rules: list[Rule] = []
    seen: set[str] = set()
    for msg in messages:
        if msg.get("role") != "user":
            continue
        for m in _RENDERED_RULE_RE.finditer(msg.get("content", "")):
            rule = parse_rendered_rule(m.group(0))
            if rule.rule_id not in seen:
                seen.add(rule.rule_id)
                rules.append(rule)
    return make_ruleset(tuple(rules), version="loaded")


def extract_profile(
    narrative: str, registry: Registry = REGISTRY
) -> tuple[str | None, int | None, frozenset[str]]:
    """Keyword extraction from a flowing narrative.

    Gender comes from the earliest gendered word, age from the first integer
    inside the case universe, factors from verbatim display-name mentions."""
    fm = _FEMALE_WORD_RE.search(narrative)
    mm = _MALE_WORD_RE.search(narrative)
    if fm and mm:
        gender = "female" if fm.start() <= mm.start() else "male"
    elif fm or mm:
        gender = "female" if fm else "male"
    else:
        gender = None
    age = None
    for m in _INT_RE.finditer(narrative):
        value = int(m.group(0))
        if 16 <= value <= 90:
            age = value
            break
    factors = frozenset(f.code for f in registry if f.display_name in narrative)
    return gender, age, factors


def _ordered_ids(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=lambda rid: int(rid[1:]))


def _perfect_reply(case: UseCase, rs: RuleSet) -> tuple[Recommendation, list[str], str]:
    verdict = evaluate(case, rs)
    ids = list(verdict.triggered)
    if ids:
        noun = "rule" if len(ids) == 1 else "rules"
        joined = ids[0] if len(ids) == 1 else ", ".join(ids[:-1]) + " and " + ids[-1]
        explanation = (
            f"Every condition of {noun} {joined} holds for this case, so the stored "
            f"rules recommend {recommendation_phrase(verdict.recommendation)}."
        )
    else:
        explanation = (
            "No stored rule has all of its conditions satisfied, so the case is "
            "referred to a physician."
        )
    return verdict.recommendation, ids, explanation


_REC_CYCLE = tuple(Recommendation)


def _perturb_recommendation(rec: Recommendation) -> Recommendation:
    return _REC_CYCLE[(_REC_CYCLE.index(rec) + 1) % len(_REC_CYCLE)]


def mock_respond(
    messages: list[dict[str, str]],
    kind: str = "mock_perfect",
    noise_profile: NoiseProfile | None = None,
    loaded_rules: RuleSet | None = None,
    registry: Registry = REGISTRY,
) -> str:
    """Deterministic stand-in for a chat model.

    Rule-loading prompts get the requested confirmation. Case prompts are
    parsed (structured text directly, narratives by keyword extraction), run
    through the ground-truth evaluator, and answered in the canonical
    three-line block. The noisy kind then applies per-case mutations."""
    if not messages:
        return "OK"
    last = messages[-1].get("content", "")

    confirm = _CONFIRM_REQUEST_RE.search(last)
    if confirm:
        return f"CONFIRMED {confirm.group(1)}"

    header = _CASE_HEADER_RE.match(last)
    if header is None:
        return "OK"
    case_id = int(header.group(1))
    narrative = last[header.end():]
    marker = narrative.find(_QUERY_CLAUSE_MARKER)
    if marker >= 0:
        narrative = narrative[:marker]
    narrative = narrative.strip("\n")

    rs = loaded_rules if loaded_rules is not None else _rules_from_messages(messages)

    if narrative.lstrip().startswith("gender:"):
        try:
            case = parse_structured(narrative.strip(), case_id=case_id, registry=registry)
        except ValueError:
            case = None
    else:
        gender, age, factors = extract_profile(narrative, registry)
        if gender is None or age is None:
            case = None
        else:
            case = UseCase(case_id, gender, age, factors, history_text=narrative or "unknown")
    if case is None:
        return (
            "RECOMMENDATION: \n"
            "TRIGGERED_RULES: \n"
            "EXPLANATION: The case description could not be read."
        )

    rec, ids, explanation = _perfect_reply(case, rs)

    if kind == "mock_noisy" and noise_profile is not None:
        if case_id in noise_profile.wrong_recommendation_indices:
            rec = _perturb_recommendation(rec)
        if case_id in noise_profile.extra_rule_indices:
            loaded_ids = _ordered_ids(r.rule_id for r in rs.rules)
            spare = [rid for rid in loaded_ids if rid not in ids]
            if spare:
                ids = ids + [spare[0]]
        if case_id in noise_profile.zero_rule_indices:
            ids = []

    return (
        f"RECOMMENDATION: {rec.code}\n"
        f"TRIGGERED_RULES: {', '.join(ids)}\n"
        f"EXPLANATION: {explanation}"
    )


class MockBackend:
    """ChatBackend over mock_respond. If no rule set is injected, it rebuilds
    one from the rule-loading prompts in the conversation, exactly as an
    attentive model would."""

    def __init__(
        self,
        kind: str = "mock_perfect",
        noise_profile: NoiseProfile | None = None,
        ruleset: RuleSet | None = None,
        registry: Registry = REGISTRY,
    ) -> None:
        if kind not in ("mock_perfect", "mock_noisy"):
            raise ValueError(f"not a mock backend kind: {kind!r}")
        self.kind = kind
        self.noise_profile = noise_profile
        self.ruleset = ruleset
        self.registry = registry

    def complete(self, messages: list[dict[str, str]]) -> str:
        return mock_respond(messages, self.kind, self.noise_profile, self.ruleset, self.registry)


# --- session protocol -------------------------------------------------------

def _make_backend(cfg: BackendConfig) -> ChatBackend:
    if cfg.kind == "remote":
        api_key = os.environ.get(ENV_API_KEY, "")
        if not api_key:
            raise MissingCredential()
        backend = RemoteBackend(cfg, api_key)
        backend.probe()
        return backend
    if cfg.kind in ("mock_perfect", "mock_noisy"):
        return MockBackend(cfg.kind, cfg.noise_profile)
    raise ValueError(f"unknown backend kind: {cfg.kind!r}")


def start_session(
    cfg: BackendConfig,
    prompt_dir: Path | None = None,
    fresh_per_case: bool = False,
    session_label: str = "",
) -> Session:
    """Open a conversation: build the backend and post the system role.

    With a session_label the id is derived from it (stable across runs with
    identical configuration, which keeps transcripts reproducible); without
    one a random id is drawn."""
    backend = _make_backend(cfg)
    if session_label:
        session_id = str(uuid.uuid5(uuid.NAMESPACE_URL, f"screenwise:{session_label}"))
    else:
        session_id = str(uuid.uuid4())
    prompts = {name: load_prompt(name, prompt_dir) for name in PROMPT_FILES}
    system_text = prompts["system_role.txt"].format(session_id=session_id)
    session = Session(
        session_id=session_id,
        backend=backend,
        max_retries=cfg.max_retries,
        fresh_per_case=fresh_per_case,
        prompts=prompts,
    )
    session.message_log.append(Message("system", system_text, _now()))
    return session


def _context(s: Session) -> list[dict[str, str]]:
    """Messages sent to the backend for the prompt just appended to the log.

    In fresh-per-case mode, earlier case exchanges are dropped so each case
    sees only the system message and the rule-loading phase."""
    log = s.message_log
    if s.fresh_per_case and s.rules_loaded and len(log) - 1 > s._rules_end:
        selected = log[: s._rules_end] + [log[-1]]
    else:
        selected = log
    return [{"role": m.role, "content": m.content} for m in selected]


def _send_once(s: Session, prompt: str) -> str:
    s.message_log.append(Message("user", prompt, _now()))
    reply = s.backend.complete(_context(s))
    s.message_log.append(Message("assistant", reply, _now()))
    return reply


def load_rules(s: Session, rs: RuleSet) -> LoadReceipt:
    """Phase one: feed every rule, in order, and require its confirmation.

    Each rule gets at most 1 + max_retries attempts, covering both transport
    failures and unconfirmed replies; the first rule that exhausts its budget
    aborts the load."""
    if not rs.rules:
        raise EmptyRuleSet("refusing to load an empty rule set")
    if s.rules_loaded:
        raise ProtocolError("rules were already loaded in this session")
    template = s.prompts["rule_confirm.txt"]
    entries: list[LoadEntry] = []
    for rule in rs.rules:
        prompt = template.format(rule_text=render_rule_prompt(rule), rule_id=rule.rule_id)
        pattern = re.compile(rf"\bCONFIRMED\s+{re.escape(rule.rule_id)}\b", re.IGNORECASE)
        s.rule_id_map[rule.rule_id] = False
        confirmed = False
        attempts = 0
        last_reply = ""
        last_error: BackendError | None = None
        for _ in range(1 + s.max_retries):
            attempts += 1
            try:
                last_reply = _send_once(s, prompt)
            except BackendError as exc:
                last_error = exc
                continue
            if pattern.search(last_reply):
                confirmed = True
                break
        if not confirmed:
            entries.append(LoadEntry(rule.rule_id, False, attempts, last_reply))
            if last_error is not None and not last_reply:
                raise last_error
            raise ConfirmationFailed(rule.rule_id, last_reply)
        s.rule_id_map[rule.rule_id] = True
        entries.append(LoadEntry(rule.rule_id, True, attempts, last_reply))
    s.rules_loaded = True
    s.loaded_rule_ids = tuple(r.rule_id for r in rs.rules)
    s._rules_end = len(s.message_log)
    return LoadReceipt(s.session_id, tuple(entries))


def query_case(s: Session, rc: RenderedCase) -> LlmVerdict:
    """Phase two: present one rendered case and parse the reply.

    Transport errors are retried with the identical prompt; any reply that
    arrives is accepted and handed to the total parser."""
    if not s.rules_loaded:
        raise ProtocolError("query_case before load_rules completed")
    prompt = s.prompts["case_query.txt"].format(case_id=rc.case_id, case_text=rc.text)
    reply: str | None = None
    last_error: BackendError | None = None
    for _ in range(1 + s.max_retries):
        try:
            reply = _send_once(s, prompt)
            break
        except BackendError as exc:
            last_error = exc
    if reply is None:
        assert last_error is not None
        raise last_error
    parsed = parse_response(reply, s.loaded_rule_ids)
    return LlmVerdict(
        case_id=rc.case_id,
        recommendation=parsed.recommendation,
        cited_rules=parsed.cited_rules,
        unknown_citations=parsed.unknown_citations,
        explanation_text=parsed.explanation_text,
        raw_response=reply,
    )


# --- reply parsing ----------------------------------------------------------

def _recommendation_matchers() -> list[tuple[str, Recommendation]]:
    matchers: dict[str, Recommendation] = {}
    for rec in Recommendation:
        matchers[rec.code.lower()] = rec
        matchers[rec.code.lower().replace("_", " ")] = rec
        matchers[RECOMMENDATION_PHRASES[rec].lower()] = rec
    return sorted(matchers.items(), key=lambda kv: -len(kv[0]))


# Labels tolerate markdown decoration such as "**RECOMMENDATION:**".
_REC_MATCHERS = _recommendation_matchers()
_REC_LINE_RE = re.compile(r"RECOMMENDATION[ \t*_]*:([^\n]*)", re.IGNORECASE)
_RULES_LINE_RE = re.compile(r"TRIGGERED_RULES[ \t*_]*:([^\n]*)", re.IGNORECASE)
_EXPL_RE = re.compile(r"EXPLANATION[ \t*_]*:", re.IGNORECASE)
_RULE_ID_TOKEN_RE = re.compile(r"\bR\d+\b")


def parse_response(raw: str, loaded_rule_ids: Iterable[str] = ()) -> ParsedReply:
    """Total parser for model replies. Never raises on string input.

    The last occurrence of each labeled field wins, so chatter before or
    after a restated block does not matter. Rule ids outside the loaded set
    are kept apart as unknown citations."""
    loaded = frozenset(loaded_rule_ids)

    recommendation: Recommendation | _UnparseableType = UNPARSEABLE
    rec_matches = _REC_LINE_RE.findall(raw)
    if rec_matches:
        remainder = rec_matches[-1].strip().lower()
        for key, rec in _REC_MATCHERS:
            if key in remainder:
                recommendation = rec
                break

    cited: frozenset[str] = frozenset()
    unknown: frozenset[str] = frozenset()
    rule_matches = _RULES_LINE_RE.findall(raw)
    if rule_matches:
        ids = set(_RULE_ID_TOKEN_RE.findall(rule_matches[-1]))
        cited = frozenset(ids & loaded)
        unknown = frozenset(ids - loaded)

    explanation = ""
    expl_matches = list(_EXPL_RE.finditer(raw))
    if expl_matches:
        tail = raw[expl_matches[-1].end():]
        paragraph_break = re.search(r"\n\s*\n", tail)
        if paragraph_break:
            tail = tail[: paragraph_break.start()]
        explanation = tail.strip()

    return ParsedReply(recommendation, cited, unknown, explanation)


# --- transcripts ------------------------------------------------------------

def write_transcript(path: str | Path, sessions: Iterable[Session]) -> None:
    """JSON Lines, one message per line, sessions in order, seq from 1."""
    with open(path, "w", encoding="utf-8") as fh:
        for session in sessions:
            for seq, msg in enumerate(session.message_log, start=1):
                row = {
                    "session_id": session.session_id,
                    "seq": seq,
                    "role": msg.role,
                    "content": msg.content,
                    "timestamp": msg.timestamp,
                }
                fh.write(json.dumps(row, sort_keys=True, separators=(",", ": ")) + "\n")


def read_transcript(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_noise_profiles(path: str | Path) -> dict[str, NoiseProfile]:
    """Read a noise-profile JSON file.

    Either one flat object with the three index arrays (applied to every
    arm), or an object keyed by render mode with one such object per arm."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: noise profile must be a JSON object")

    def one(obj: dict, where: str) -> NoiseProfile:
        def indices(*names: str) -> frozenset[int]:
            for name in names:
                if name in obj:
                    values = obj[name]
                    if not isinstance(values, list) or not all(isinstance(v, int) for v in values):
                        raise ValueError(f"{where}: {name} must be a list of integers")
                    return frozenset(values)
            return frozenset()

        known = {
            "wrong_recommendation", "wrong_recommendation_indices",
            "extra_rule", "extra_rule_indices",
            "zero_rule", "zero_rule_indices",
        }
        stray = set(obj) - known
        if stray:
            raise ValueError(f"{where}: unknown noise profile keys: {sorted(stray)}")
        return NoiseProfile(
            wrong_recommendation_indices=indices("wrong_recommendation", "wrong_recommendation_indices"),
            extra_rule_indices=indices("extra_rule", "extra_rule_indices"),
            zero_rule_indices=indices("zero_rule", "zero_rule_indices"),
        )

    if set(data) <= {"structured", "unstructured"} and all(
        isinstance(v, dict) for v in data.values()
    ):
        profiles = {mode: one(obj, f"{path}:{mode}") for mode, obj in data.items()}
        for mode in ("structured", "unstructured"):
            profiles.setdefault(mode, NoiseProfile())
        return profiles
    flat = one(data, str(path))
    return {"structured": flat, "unstructured": flat}
