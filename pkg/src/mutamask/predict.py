"""Masked-token predictors: every backend answers one masked sequence with
exactly 5 ranked predictions.

Three backends ship: a family-aware n-gram baseline trained on a MiniJ
corpus (offline, deterministic), recorded fixtures keyed by the hash of the
rendered masked text, and an HTTP client speaking the fill-mask wire
protocol. Backend failures raise PredictorError, which the mutant
generator turns into a skipped site, never an aborted run.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import requests

from .lang.tokens import MASK_TEXT, LexError, Token, TokenKind, lex
from .masking import MaskedSequence, OperatorFamily, render_tokens

TOP_K = 5


@dataclass(frozen=True)
class Prediction:
    rank: int  # 1..5
    token_text: str  # verbatim, may carry a leading space
    score: float  # in [0, 1], non-increasing with rank


class PredictorError(Exception):
    """A backend could not answer; the site is reported as skipped."""


@dataclass(frozen=True)
class PredictorConfig:
    backend: str  # "ngram" | "fixture" | "http"
    ngram_order: int = 2
    corpus_path: Optional[str] = None  # directory of .minij files or one file
    model_path: Optional[str] = None  # pre-trained n-gram model JSON
    fixture_path: Optional[str] = None
    endpoint_url: Optional[str] = None
    timeout_ms: int = 10_000


def sequence_key(text: str) -> str:
    """Fixture key: hash of the rendered masked text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _validate_five(raw: list, origin: str) -> list[Prediction]:
    if len(raw) != TOP_K:
        raise PredictorError(f"{origin}: expected {TOP_K} predictions, got {len(raw)}")
    preds = []
    last = None
    for i, item in enumerate(raw):
        token = item.get("token") if isinstance(item, dict) else None
        score = item.get("score") if isinstance(item, dict) else None
        if not isinstance(token, str) or not isinstance(score, (int, float)) or isinstance(score, bool):
            raise PredictorError(f"{origin}: malformed prediction at rank {i + 1}")
        score = float(score)
        if not 0.0 <= score <= 1.0:
            raise PredictorError(f"{origin}: score {score} outside [0, 1] at rank {i + 1}")
        if last is not None and score > last:
            raise PredictorError(f"{origin}: scores increase at rank {i + 1}")
        last = score
        preds.append(Prediction(i + 1, token, score))
    return preds


# ---------------------------------------------------------------------------
# n-gram baseline
# ---------------------------------------------------------------------------

_BINARY_OPS = {"+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||"}
_UNARY_OPS = {"++", "--", "!"}
_COMPOUND_OPS = {"+=", "-=", "*=", "/="}
_LITERAL_KINDS = {TokenKind.INT, TokenKind.STRING, TokenKind.CHAR, TokenKind.BOOL}


def _can_end_expr(tok: Optional[Token]) -> bool:
    if tok is None:
        return False
    return tok.kind in _LITERAL_KINDS or tok.kind is TokenKind.IDENT or tok.lexeme in (")", "]")


def _corpus_occurrences(tokens: list[Token]):
    """Yield (family, index-of-first-token, candidate-text) for every corpus
    position a mask site could cover. Token-kind heuristics stand in for
    parse-level classification so training only needs lexable sources."""
    for i, tok in enumerate(tokens):
        prev = tokens[i - 1] if i > 0 else None
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None
        if tok.kind in _LITERAL_KINDS:
            yield OperatorFamily.LITERAL, i, tok.lexeme
        elif tok.kind is TokenKind.IDENT:
            if nxt is not None and nxt.lexeme == "(":
                yield OperatorFamily.METHOD_NAME, i, tok.lexeme
            elif prev is not None and prev.lexeme == ".":
                yield OperatorFamily.FIELD_NAME, i, tok.lexeme
            elif nxt is not None and nxt.lexeme == "." and tok.lexeme[:1].isupper():
                yield OperatorFamily.TYPE_REFERENCE, i, tok.lexeme
            else:
                yield OperatorFamily.VARIABLE_NAME, i, tok.lexeme
        elif tok.kind is TokenKind.OPERATOR:
            if tok.lexeme in _UNARY_OPS:
                yield OperatorFamily.UNARY_OP, i, tok.lexeme
            elif tok.lexeme in _COMPOUND_OPS:
                yield OperatorFamily.COMPOUND_ASSIGN_OP, i, tok.lexeme[0]
            elif tok.lexeme == "-" and not _can_end_expr(prev):
                yield OperatorFamily.UNARY_OP, i, tok.lexeme
            elif tok.lexeme in _BINARY_OPS:
                yield OperatorFamily.BINARY_OP, i, tok.lexeme
        elif tok.lexeme == "[" and _can_end_expr(prev):
            depth = 1
            j = i + 1
            while j < len(tokens) and depth:
                if tokens[j].lexeme == "[":
                    depth += 1
                elif tokens[j].lexeme == "]":
                    depth -= 1
                j += 1
            if depth == 0 and j - 1 > i + 1:
                yield OperatorFamily.ARRAY_INDEX, i + 1, render_tokens(tokens[i + 1 : j - 1])


class NgramModel:
    """Frequency tables per operator family, conditioned on up to
    (order - 1) preceding token lexemes, with back-off to shorter contexts."""

    def __init__(self, order: int):
        if not 1 <= order <= 3:
            raise ValueError("ngram order must be 1..3")
        self.order = order
        # family -> context tuple -> Counter of candidate texts
        self.tables: dict[OperatorFamily, dict[tuple[str, ...], Counter]] = {f: {} for f in OperatorFamily}

    def _observe(self, family: OperatorFamily, context: tuple[str, ...], candidate: str) -> None:
        for k in range(self.order):
            ctx = context[len(context) - k :] if k else ()
            if k > len(context):
                break
            table = self.tables[family].setdefault(ctx, Counter())
            table[candidate] += 1

    def train(self, sources: list[str]) -> None:
        if not sources:
            raise ValueError("empty corpus")
        for source in sources:
            tokens = lex(source)
            lexemes = [t.lexeme for t in tokens]
            for family, start, candidate in _corpus_occurrences(tokens):
                context = tuple(lexemes[max(0, start - (self.order - 1)) : start])
                self._observe(family, context, candidate)

    def top5(self, family: OperatorFamily, context: tuple[str, ...], original: str) -> list[Prediction]:
        ranked: list[tuple[str, float]] = []
        chosen: set[str] = set()
        for k in range(min(self.order - 1, len(context)), -1, -1):
            ctx = context[len(context) - k :] if k else ()
            table = self.tables[family].get(ctx)
            if not table:
                continue
            total = sum(table.values())
            for text, count in sorted(table.items(), key=lambda kv: (-kv[1], kv[0])):
                if text not in chosen:
                    ranked.append((text, count / total))
                    chosen.add(text)
                    if len(ranked) == TOP_K:
                        break
            break  # only the longest non-empty context contributes scores
        if len(ranked) < TOP_K:
            fallback = self.tables[family].get((), Counter())
            for text, _count in sorted(fallback.items(), key=lambda kv: (-kv[1], kv[0])):
                if text not in chosen:
                    ranked.append((text, 0.0))
                    chosen.add(text)
                if len(ranked) == TOP_K:
                    break
        while len(ranked) < TOP_K:
            ranked.append((original, 0.0))
        return [Prediction(i + 1, text, score) for i, (text, score) in enumerate(ranked)]

    # --- serialization ---

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "tables": {
                family.value: {
                    "\x1f".join(ctx): dict(sorted(counter.items()))
                    for ctx, counter in sorted(tables.items())
                }
                for family, tables in self.tables.items()
                if tables
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NgramModel":
        model = cls(int(data["order"]))
        for family_tag, tables in data.get("tables", {}).items():
            family = OperatorFamily(family_tag)
            for ctx_key, counts in tables.items():
                ctx = tuple(ctx_key.split("\x1f")) if ctx_key else ()
                model.tables[family][ctx] = Counter({k: int(v) for k, v in counts.items()})
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_ngram(sources: list[str], order: int) -> NgramModel:
    """Train the offline baseline on MiniJ sources (they only need to lex)."""
    model = NgramModel(order)
    model.train(sources)
    return model


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

class Predictor:
    def predict(self, sequence: MaskedSequence) -> list[Prediction]:
        raise NotImplementedError


class NgramPredictor(Predictor):
    def __init__(self, model: NgramModel):
        self.model = model

    def predict(self, sequence: MaskedSequence) -> list[Prediction]:
        mask_at = sequence.mask_index
        context = tuple(t.lexeme for t in sequence.tokens[:mask_at])
        return self.model.top5(sequence.site.family, context, sequence.site.original)


class FixturePredictor(Predictor):
    def __init__(self, entries: dict[str, list[Prediction]]):
        self.entries = entries

    @classmethod
    def load(cls, path: str | Path) -> "FixturePredictor":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        entries: dict[str, list[Prediction]] = {}
        for i, entry in enumerate(data.get("entries", [])):
            key = entry.get("key")
            if key is None:
                sequence = entry.get("sequence")
                if sequence is None:
                    raise ValueError(f"fixture entry {i}: needs 'key' or 'sequence'")
                key = sequence_key(sequence)
            elif "sequence" in entry and sequence_key(entry["sequence"]) != key:
                raise ValueError(f"fixture entry {i}: key does not match sequence hash")
            entries[key] = _validate_five(entry.get("predictions", []), f"fixture entry {i}")
        return cls(entries)

    def predict(self, sequence: MaskedSequence) -> list[Prediction]:
        key = sequence_key(sequence.text)
        preds = self.entries.get(key)
        if preds is None:
            raise PredictorError(f"no fixture entry for sequence {key[:12]}…")
        return preds


class HttpPredictor(Predictor):
    def __init__(self, endpoint_url: str, timeout_ms: int = 10_000, session: Optional[requests.Session] = None):
        base = endpoint_url.rstrip("/")
        self.url = base if base.endswith("/v1/fill-mask") else base + "/v1/fill-mask"
        self.timeout = timeout_ms / 1000.0
        self.session = session or requests.Session()

    def predict(self, sequence: MaskedSequence) -> list[Prediction]:
        body = {"sequence": sequence.text, "top_k": TOP_K}
        try:
            resp = self.session.post(self.url, json=body, timeout=self.timeout)
        except requests.RequestException as err:
            raise PredictorError(f"fill-mask endpoint unreachable: {err}") from err
        if resp.status_code != 200:
            raise PredictorError(f"fill-mask endpoint returned {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
        except ValueError as err:
            raise PredictorError("fill-mask endpoint returned non-JSON body") from err
        if not isinstance(payload, dict) or not isinstance(payload.get("predictions"), list):
            raise PredictorError("fill-mask response missing 'predictions'")
        return _validate_five(payload["predictions"], "fill-mask response")


def _read_corpus(path: str) -> list[str]:
    p = Path(path)
    if p.is_dir():
        files = sorted(p.rglob("*.minij"))
        if not files:
            raise ValueError(f"no .minij files under {p}")
        return [f.read_text(encoding="utf-8") for f in files]
    return [p.read_text(encoding="utf-8")]


def build_predictor(config: PredictorConfig) -> Predictor:
    if config.backend == "ngram":
        if config.model_path:
            model = NgramModel.load(config.model_path)
        elif config.corpus_path:
            model = train_ngram(_read_corpus(config.corpus_path), config.ngram_order)
        else:
            raise ValueError("ngram backend needs corpus_path or model_path")
        return NgramPredictor(model)
    if config.backend == "fixture":
        if not config.fixture_path:
            raise ValueError("fixture backend needs fixture_path")
        return FixturePredictor.load(config.fixture_path)
    if config.backend == "http":
        if not config.endpoint_url:
            raise ValueError("http backend needs endpoint_url")
        return HttpPredictor(config.endpoint_url, config.timeout_ms)
    raise ValueError(f"unknown predictor backend {config.backend!r}")


def predict(sequence: MaskedSequence, config: PredictorConfig) -> list[Prediction]:
    """One-shot convenience over build_predictor for a single query."""
    return build_predictor(config).predict(sequence)
