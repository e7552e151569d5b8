"""Per-utterance evaluation (SFR + WER/CER) and matrix assembly from corpora."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .analysis import EvalCell, EvalMatrix
from .corpus import CorpusRecord
from .metrics import EditStats, NormalizationPolicy, char_stats, pooled_error_rate, word_stats
from .scripts import ScriptRegistry
from .sfr import CorpusSfr, SfrResult, sfr_corpus, sfr_utterance

UNKNOWN_MODEL = "unknown"


@dataclass(frozen=True)
class UtteranceEval:
    record: CorpusRecord
    language: str
    sfr: SfrResult
    words: EditStats | None = None
    chars: EditStats | None = None
    note: str | None = None

    @property
    def wer(self) -> float | None:
        return None if self.words is None else self.words.error_rate

    @property
    def cer(self) -> float | None:
        return None if self.chars is None else self.chars.error_rate

    def to_dict(self) -> dict:
        return {
            "id": self.record.id,
            "lang": self.language,
            "model": self.record.model,
            "countable_chars": self.sfr.countable_chars,
            "target_chars": self.sfr.target_chars,
            "sfr": self.sfr.sfr,
            "wer": self.wer,
            "cer": self.cer,
        }


@dataclass(frozen=True)
class CorpusEval:
    sfr: CorpusSfr
    wer: float | None
    cer: float | None
    scored_references: int


def evaluate_record(
    rec: CorpusRecord, registry: ScriptRegistry, language: str | None = None
) -> UtteranceEval:
    """Score one record. SFR always uses the raw hypothesis.

    WER/CER are filled in when a usable reference exists; otherwise ``note``
    says why they are missing.
    """
    lang = language if language is not None else rec.lang
    cfg = registry[lang]
    u = rec.to_utterance(lang)
    result = sfr_utterance(u, cfg)
    if rec.reference is None:
        return UtteranceEval(rec, lang, result, note="no reference")
    policy = NormalizationPolicy.for_config(cfg)
    try:
        return UtteranceEval(rec, lang, result, word_stats(u, policy), char_stats(u, policy))
    except ValueError as exc:
        return UtteranceEval(rec, lang, result, note=str(exc))


def evaluate_records(
    records: Iterable[CorpusRecord], registry: ScriptRegistry, language: str | None = None
) -> list[UtteranceEval]:
    return [evaluate_record(r, registry, language) for r in records]


def aggregate(evals: Sequence[UtteranceEval]) -> CorpusEval:
    words = [e.words for e in evals if e.words is not None]
    chars = [e.chars for e in evals if e.chars is not None]
    return CorpusEval(
        sfr=sfr_corpus(e.sfr for e in evals),
        wer=pooled_error_rate(words),
        cer=pooled_error_rate(chars),
        scored_references=len(words),
    )


def build_matrix(evals: Iterable[UtteranceEval]) -> EvalMatrix:
    """One cell per (model, language): mean SFR and pooled WER, in percent."""
    groups: dict[tuple[str, str], list[UtteranceEval]] = {}
    for e in evals:
        groups.setdefault((e.record.model or UNKNOWN_MODEL, e.language), []).append(e)
    cells = []
    for (model, lang), items in groups.items():
        agg = aggregate(items)
        if agg.sfr.mean_sfr is None:
            cells.append(EvalCell(model, lang, None, None))
            continue
        wer = None if agg.wer is None else 100 * agg.wer
        cells.append(EvalCell(model, lang, 100 * agg.sfr.mean_sfr, wer))
    return EvalMatrix(tuple(cells))
