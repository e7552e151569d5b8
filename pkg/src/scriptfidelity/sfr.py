"""Script Fidelity Rate for single utterances and whole corpora.

SFR of a hypothesis is the share of its countable characters that belong to
the target language's script. Countable characters are what remains after
NFC normalization once whitespace, punctuation (``P*``) and control/format
(``C*``) characters are dropped. A hypothesis with no countable characters
has a null SFR.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .scripts import ScriptConfig


@dataclass(frozen=True)
class Utterance:
    id: str
    language_id: str | None
    hypothesis: str
    reference: str | None = None
    model_id: str | None = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class SfrResult:
    utterance_id: str
    countable_chars: int
    target_chars: int

    @property
    def sfr(self) -> float | None:
        if self.countable_chars == 0:
            return None
        return self.target_chars / self.countable_chars

    @property
    def is_null(self) -> bool:
        return self.countable_chars == 0

    def to_dict(self) -> dict:
        return {
            "id": self.utterance_id,
            "countable_chars": self.countable_chars,
            "target_chars": self.target_chars,
            "sfr": self.sfr,
        }


@dataclass(frozen=True)
class CorpusSfr:
    """Corpus aggregate.

    ``mean_sfr`` is the headline value: the unweighted mean over non-null
    utterances. ``weighted_sfr`` pools characters across the corpus.
    """

    utterance_count: int
    null_count: int
    mean_sfr: float | None
    weighted_sfr: float | None
    per_utterance: tuple[SfrResult, ...] = field(repr=False)

    @property
    def target_chars(self) -> int:
        return sum(r.target_chars for r in self.per_utterance)

    @property
    def countable_chars(self) -> int:
        return sum(r.countable_chars for r in self.per_utterance)

    def to_dict(self) -> dict:
        return {
            "utterances": self.utterance_count,
            "null": self.null_count,
            "mean_sfr": self.mean_sfr,
            "weighted_sfr": self.weighted_sfr,
        }


def is_countable(c: str) -> bool:
    if c.isspace():
        return False
    return unicodedata.category(c)[0] not in "PC"


def countable_chars(h: str) -> list[str]:
    """NFC-normalize ``h`` and keep characters that are not whitespace, P* or C*."""
    return [c for c in unicodedata.normalize("NFC", h) if is_countable(c)]


def sfr_counts(hypothesis: str, cfg: ScriptConfig) -> tuple[int, int]:
    """Return ``(countable, target)`` character counts for raw text."""
    chars = countable_chars(hypothesis)
    contains = cfg.contains
    return len(chars), sum(1 for c in chars if contains(ord(c)))


def sfr_text(hypothesis: str, cfg: ScriptConfig) -> float | None:
    n, k = sfr_counts(hypothesis, cfg)
    return k / n if n else None


def sfr_utterance(u: Utterance, cfg: ScriptConfig) -> SfrResult:
    """Score the raw hypothesis of ``u`` against ``cfg``.

    Never call this on WER-normalized text: normalization can strip or remap
    code points and change the ratio.
    """
    n, k = sfr_counts(u.hypothesis, cfg)
    return SfrResult(u.id, n, k)


def sfr_corpus(results: Iterable[SfrResult]) -> CorpusSfr:
    results = tuple(results)
    present = [r.sfr for r in results if not r.is_null]
    total_countable = sum(r.countable_chars for r in results)
    total_target = sum(r.target_chars for r in results)
    mean = sum(present) / len(present) if present else None
    weighted = total_target / total_countable if total_countable else None
    return CorpusSfr(
        utterance_count=len(results),
        null_count=len(results) - len(present),
        mean_sfr=mean,
        weighted_sfr=weighted,
        per_utterance=results,
    )


def score_utterances(utterances: Sequence[Utterance], cfg: ScriptConfig) -> CorpusSfr:
    return sfr_corpus(sfr_utterance(u, cfg) for u in utterances)
