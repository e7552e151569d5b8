"""Language-specific normalization and WER/CER.

Three normalization policies mirror the evaluation protocol:

* ``ArabicScript`` strips diacritics and punctuation,
* ``Indic`` strips punctuation and native digits (ASCII digits are kept),
* ``LatinLowercase`` lowercases and strips punctuation.

Every policy then collapses whitespace runs to one space and trims.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from .scripts import CodePointRange, NormalizationKind, ScriptConfig
from .sfr import Utterance

ARABIC_DIACRITICS = (
    CodePointRange(0x064B, 0x065F),
    CodePointRange(0x0670, 0x0670),
    CodePointRange(0x06D6, 0x06ED),
)
INDIC_DIGITS = (
    CodePointRange(0x0966, 0x096F),  # Devanagari
    CodePointRange(0x09E6, 0x09EF),  # Bengali
    CodePointRange(0x0D66, 0x0D6F),  # Malayalam
)


@dataclass(frozen=True)
class NormalizationPolicy:
    policy: NormalizationKind
    diacritic_ranges: tuple[CodePointRange, ...] = ARABIC_DIACRITICS
    digit_ranges: tuple[CodePointRange, ...] = INDIC_DIGITS

    def __post_init__(self):
        object.__setattr__(self, "policy", NormalizationKind(self.policy))

    @classmethod
    def for_config(cls, cfg: ScriptConfig) -> "NormalizationPolicy":
        kwargs = {}
        if cfg.diacritic_ranges is not None:
            kwargs["diacritic_ranges"] = cfg.diacritic_ranges
        if cfg.digit_ranges is not None:
            kwargs["digit_ranges"] = cfg.digit_ranges
        return cls(cfg.normalization_policy, **kwargs)

    def _stripped(self) -> tuple[CodePointRange, ...]:
        if self.policy is NormalizationKind.ARABIC_SCRIPT:
            return self.diacritic_ranges
        if self.policy is NormalizationKind.INDIC:
            return self.digit_ranges
        return ()


def normalize(text: str, policy: NormalizationPolicy) -> str:
    if policy.policy is NormalizationKind.LATIN_LOWERCASE:
        text = text.lower()
    strip = policy._stripped()
    kept = []
    for c in text:
        if unicodedata.category(c).startswith("P"):
            continue
        cp = ord(c)
        if any(r.start <= cp <= r.end for r in strip):
            continue
        kept.append(c)
    return " ".join("".join(kept).split())


@dataclass(frozen=True)
class EditStats:
    substitutions: int
    deletions: int
    insertions: int
    reference_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def error_rate(self) -> float:
        """(S + D + I) / N; exceeds 1.0 when insertions pile up."""
        return self.errors / self.reference_len

    def __add__(self, other: "EditStats") -> "EditStats":
        return EditStats(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.reference_len + other.reference_len,
        )


def edit_distance_stats(reference: Sequence, hypothesis: Sequence) -> EditStats:
    """Levenshtein alignment counts.

    Among alignments of equal total cost the backtrace takes the diagonal
    first, so a substitution wins over an insertion/deletion pair.
    """
    n, m = len(reference), len(hypothesis)
    if n == 0:
        raise ValueError("reference is empty; error rate is undefined")
    # d[i][j]: cost of aligning reference[:i] with hypothesis[:j]
    d = [list(range(m + 1))]
    for i in range(1, n + 1):
        prev = d[-1]
        r = reference[i - 1]
        row = [i]
        left = i
        for j in range(1, m + 1):
            best = prev[j - 1] + (r != hypothesis[j - 1])
            up = prev[j] + 1
            if up < best:
                best = up
            left += 1
            if left < best:
                best = left
            row.append(best)
            left = best
        d.append(row)

    s = de = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            mismatch = reference[i - 1] != hypothesis[j - 1]
            if d[i][j] == d[i - 1][j - 1] + mismatch:
                s += mismatch
                i -= 1
                j -= 1
                continue
        if i > 0 and d[i][j] == d[i - 1][j] + 1:
            de += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditStats(s, de, ins, n)


def _normalized_pair(u: Utterance, policy: NormalizationPolicy) -> tuple[str, str]:
    if u.reference is None:
        raise ValueError(f"utterance {u.id!r} has no reference")
    ref = normalize(u.reference, policy)
    if not ref:
        raise ValueError(f"utterance {u.id!r}: reference is empty after normalization")
    return ref, normalize(u.hypothesis, policy)


def word_stats(u: Utterance, policy: NormalizationPolicy) -> EditStats:
    ref, hyp = _normalized_pair(u, policy)
    return edit_distance_stats(ref.split(" "), hyp.split(" ") if hyp else [])


def char_stats(u: Utterance, policy: NormalizationPolicy) -> EditStats:
    ref, hyp = _normalized_pair(u, policy)
    return edit_distance_stats(ref, hyp)


def wer(u: Utterance, policy: NormalizationPolicy) -> float:
    return word_stats(u, policy).error_rate


def cer(u: Utterance, policy: NormalizationPolicy) -> float:
    """Character error rate; the single spaces left by normalization count."""
    return char_stats(u, policy).error_rate


def pooled_error_rate(stats: Iterable[EditStats]) -> float | None:
    """Total edits over total reference length (corpus WER/CER)."""
    errors = total = 0
    for s in stats:
        errors += s.errors
        total += s.reference_len
    return errors / total if total else None
