"""Mutant generation: splice predicted tokens into the program, discard
identical and non-compiling variants, deduplicate per site, and persist the
result as a JSON-lines store (docs/store.md)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .lang.ast import Program
from .lang.checker import check_program
from .lang.parser import ParseError, parse_source
from .lang.tokens import LexError, SourceSpan
from .masking import MaskSite, OperatorFamily, enumerate_sites, render_masked
from .predict import Prediction, Predictor, PredictorConfig, PredictorError, build_predictor

TOP_K = 5


class MutantStatus(Enum):
    VIABLE = "viable"
    IDENTICAL = "identical-discarded"
    NON_COMPILING = "non-compiling-discarded"
    DUPLICATE = "duplicate-discarded"


def normalize(text: str) -> str:
    """Whitespace normalization applied to predicted tokens before
    comparison and splicing."""
    return text.strip()


@dataclass(frozen=True)
class MutantRecord:
    """The persisted view of a mutant (one JSON line in the store)."""

    id: int
    family: str
    span: tuple[int, int, int, int]  # start, end, line, col
    original: str
    replacement: str
    status: str
    rank: int
    score: float
    class_name: str
    method_name: str

    def to_json(self) -> str:
        payload = {
            "id": self.id,
            "family": self.family,
            "span": list(self.span),
            "original": self.original,
            "replacement": self.replacement,
            "status": self.status,
            "rank": self.rank,
            "score": self.score,
            "class": self.class_name,
            "method": self.method_name,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str, line_no: int) -> "MutantRecord":
        try:
            data = json.loads(line)
            return cls(
                id=int(data["id"]),
                family=str(data["family"]),
                span=tuple(int(x) for x in data["span"]),
                original=str(data["original"]),
                replacement=str(data["replacement"]),
                status=str(data["status"]),
                rank=int(data["rank"]),
                score=float(data["score"]),
                class_name=str(data["class"]),
                method_name=str(data["method"]),
            )
        except (ValueError, KeyError, TypeError) as err:
            raise StoreFormatError(f"line {line_no}: malformed mutant record: {err}") from err


class StoreFormatError(Exception):
    pass


@dataclass
class Mutant:
    id: int
    site: MaskSite
    rank: int
    prediction: Prediction
    replacement: str  # whitespace-normalized
    status: MutantStatus
    mutated_source: Optional[str] = None  # present iff viable
    mutated_program: Optional[Program] = None  # checked, present iff viable

    @property
    def viable(self) -> bool:
        return self.status is MutantStatus.VIABLE

    def to_record(self) -> MutantRecord:
        span = self.site.target_span
        return MutantRecord(
            id=self.id,
            family=self.site.family.value,
            span=(span.start, span.end, span.line, span.col),
            original=self.site.original,
            replacement=self.replacement,
            status=self.status.value,
            rank=self.rank,
            score=self.prediction.score,
            class_name=self.site.class_name,
            method_name=self.site.method_name,
        )


@dataclass
class SkippedSite:
    site: MaskSite
    reason: str


@dataclass
class MutantSetReport:
    sites_total: int = 0
    sites_predicted: int = 0
    sites_skipped: int = 0
    skipped: list[dict] = field(default_factory=list)
    by_status: dict[str, int] = field(default_factory=dict)
    by_family: dict[str, dict[str, int]] = field(default_factory=dict)
    total_candidates: int = 0
    total_viable: int = 0

    def to_dict(self) -> dict:
        return {
            "sites_total": self.sites_total,
            "sites_predicted": self.sites_predicted,
            "sites_skipped": self.sites_skipped,
            "skipped": self.skipped,
            "by_status": dict(sorted(self.by_status.items())),
            "by_family": {k: dict(sorted(v.items())) for k, v in sorted(self.by_family.items())},
            "total_candidates": self.total_candidates,
            "total_viable": self.total_viable,
        }


def splice(source: str, span: SourceSpan, replacement: str) -> str:
    return source[: span.start] + replacement + source[span.end :]


def compile_mutant(source: str) -> Optional[Program]:
    """Parse and type-check a mutated unit; None when it does not compile."""
    try:
        program = parse_source(source)
    except (LexError, ParseError):
        return None
    if check_program(program):
        return None
    return program


def generate(
    program: Program,
    predictor: PredictorConfig | Predictor,
) -> tuple[list[Mutant], MutantSetReport]:
    """Run the full masking/prediction/classification pipeline.

    Candidates are classified in order: identical (after normalization),
    then duplicate of an earlier-ranked candidate at the same site, then the
    compile check. Ids are dense over candidates in site order, rank order.
    """
    backend = build_predictor(predictor) if isinstance(predictor, PredictorConfig) else predictor
    sites = enumerate_sites(program)
    report = MutantSetReport(sites_total=len(sites))
    mutants: list[Mutant] = []
    next_id = 0

    for site in sites:
        family_stats = report.by_family.setdefault(
            site.family.value, {"sites": 0, "candidates": 0, "viable": 0}
        )
        family_stats["sites"] += 1
        sequence = render_masked(program, site)
        try:
            predictions = backend.predict(sequence)
        except PredictorError as err:
            report.sites_skipped += 1
            report.skipped.append(
                {
                    "family": site.family.value,
                    "span": [site.target_span.start, site.target_span.end],
                    "original": site.original,
                    "reason": str(err),
                }
            )
            continue
        report.sites_predicted += 1

        original_norm = normalize(site.original)
        earlier: set[str] = set()
        for prediction in predictions:
            replacement = normalize(prediction.token_text)
            mutated_source = None
            mutated_program = None
            if replacement == original_norm:
                status = MutantStatus.IDENTICAL
            elif replacement in earlier:
                status = MutantStatus.DUPLICATE
            else:
                earlier.add(replacement)
                candidate_source = splice(program.source, site.target_span, replacement)
                candidate_program = compile_mutant(candidate_source)
                if candidate_program is None:
                    status = MutantStatus.NON_COMPILING
                else:
                    status = MutantStatus.VIABLE
                    mutated_source = candidate_source
                    mutated_program = candidate_program
            mutants.append(
                Mutant(
                    id=next_id,
                    site=site,
                    rank=prediction.rank,
                    prediction=prediction,
                    replacement=replacement,
                    status=status,
                    mutated_source=mutated_source,
                    mutated_program=mutated_program,
                )
            )
            next_id += 1
            report.total_candidates += 1
            report.by_status[status.value] = report.by_status.get(status.value, 0) + 1
            family_stats["candidates"] += 1
            if status is MutantStatus.VIABLE:
                family_stats["viable"] += 1
                report.total_viable += 1

    return mutants, report


def materialize(program: Program, mutant: Mutant) -> str:
    """Source text of a viable mutant: the original with the replacement
    spliced into the site's target span."""
    if not mutant.viable:
        raise ValueError(f"mutant {mutant.id} is not viable ({mutant.status.value})")
    return splice(program.source, mutant.site.target_span, mutant.replacement)


# ---------------------------------------------------------------------------
# store
# ---------------------------------------------------------------------------

def persist(mutants: list[Mutant] | list[MutantRecord], path: str | Path) -> None:
    records = [m.to_record() if isinstance(m, Mutant) else m for m in mutants]
    text = "".join(r.to_json() + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


def load(path: str | Path) -> list[MutantRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                records.append(MutantRecord.from_json(line, line_no))
    return records


@dataclass
class RebuiltMutant:
    record: MutantRecord
    program: Program
    source: str


def rebuild_viable(program: Program, records: list[MutantRecord]) -> list[RebuiltMutant]:
    """Re-materialize the viable mutants of a store against the original
    program (used by analysis commands that start from mutants.jsonl)."""
    rebuilt = []
    for record in records:
        if record.status != MutantStatus.VIABLE.value:
            continue
        span = SourceSpan(*record.span)
        source = splice(program.source, span, record.replacement)
        mutated = compile_mutant(source)
        if mutated is None:
            raise StoreFormatError(
                f"stored viable mutant {record.id} no longer compiles against this program"
            )
        rebuilt.append(RebuiltMutant(record, mutated, source))
    return rebuilt
