"""Dominant-script taxonomy and decoder-loop detection.

Each hypothesis is labelled with the script holding the majority of its
countable characters and mapped into one of four buckets (Latin, Devanagari,
Target, Other). Group-level tables give the share of utterances per bucket.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .rounding import round_half_away
from .scripts import ScriptConfig, ScriptRegistry
from .sfr import Utterance, countable_chars

DEFAULT_DOMINANCE = 0.5
NONE = "none"
MIXED = "mixed"
UNCLASSIFIED = "unclassified"
NON_TARGET_SUFFIX = " (non-target)"


class Bucket(str, enum.Enum):
    LATIN = "Latin"
    DEVANAGARI = "Devanagari"
    TARGET = "Target"
    OTHER = "Other"


BUCKETS = tuple(Bucket)


@dataclass(frozen=True)
class LoopingParams:
    max_n: int = 5
    min_coverage: float = 0.5
    min_tokens: int = 10


@dataclass(frozen=True)
class TaxonomyLabel:
    utterance_id: str
    dominant_script: str
    dominant_fraction: float | None
    bucket: Bucket
    looping_flag: bool
    looping_score: float
    tie: bool = False
    script_counts: Mapping[str, int] = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "id": self.utterance_id,
            "dominant_script": self.dominant_script,
            "dominant_fraction": self.dominant_fraction,
            "bucket": self.bucket.value,
            "tie": self.tie,
            "looping_score": self.looping_score,
            "looping": self.looping_flag,
        }


def _non_overlapping(tokens: Sequence[str], gram: tuple[str, ...]) -> int:
    n = len(gram)
    count = i = 0
    while i <= len(tokens) - n:
        if tuple(tokens[i : i + n]) == gram:
            count += 1
            i += n
        else:
            i += 1
    return count


def detect_looping(h: str, params: LoopingParams = LoopingParams()) -> tuple[float, bool]:
    """Repetition score in [0, 1] and a looping flag for a hypothesis.

    For n = 1..max_n the most frequent n-gram is located and the share of
    tokens covered by its non-overlapping repeats is measured; the score is
    the best share. Longer n-grams only count when they actually repeat, so
    text with no repetition scores 1/len(tokens).
    """
    tokens = h.split()
    total = len(tokens)
    if total == 0:
        return 0.0, False
    best = 0.0
    for n in range(1, min(params.max_n, total) + 1):
        grams = Counter(tuple(tokens[i : i + n]) for i in range(total - n + 1))
        gram, _ = grams.most_common(1)[0]
        repeats = _non_overlapping(tokens, gram)
        if n > 1 and repeats < 2:
            continue
        best = max(best, repeats * n / total)
    flag = best > params.min_coverage and total >= params.min_tokens
    return best, flag


def _tie_rank(registry: ScriptRegistry, target: ScriptConfig):
    order = {d.name: i for i, d in enumerate(registry.detection_scripts)}
    last = len(order)
    target_pos = order.get(target.script_name)
    if target_pos is None:
        probe = target.ranges[0].start
        target_pos = next(
            (i for i, d in enumerate(registry.detection_scripts) if d.contains(probe)), last
        )

    def rank(key: str) -> tuple[int, int]:
        if key == target.script_name:
            return (target_pos, 0)
        if key == UNCLASSIFIED:
            return (last + 1, 1)
        return (order.get(key.removesuffix(NON_TARGET_SUFFIX), last), 1)

    return rank


def script_counts(text: str, registry: ScriptRegistry, target: ScriptConfig) -> Counter:
    """Countable characters per script name.

    Characters accepted by the target config are attributed to the target
    script first. Characters from a detection script that shares the target's
    name but lie outside the target config get a ``(non-target)`` suffix.
    """
    counts: Counter = Counter()
    for c in countable_chars(text):
        cp = ord(c)
        if target.contains(cp):
            counts[target.script_name] += 1
            continue
        for det in registry.detection_scripts:
            if det.contains(cp):
                name = det.name
                if name == target.script_name:
                    name += NON_TARGET_SUFFIX
                counts[name] += 1
                break
        else:
            counts[UNCLASSIFIED] += 1
    return counts


def bucket_for(dominant: str, target: ScriptConfig) -> Bucket:
    if dominant == target.script_name:
        return Bucket.TARGET
    base = dominant.removesuffix(NON_TARGET_SUFFIX)
    if base == Bucket.LATIN.value:
        return Bucket.LATIN
    if base == Bucket.DEVANAGARI.value:
        return Bucket.DEVANAGARI
    return Bucket.OTHER


def classify_dominant(
    u: Utterance,
    registry: ScriptRegistry,
    target_cfg: ScriptConfig,
    dominance: float = DEFAULT_DOMINANCE,
    looping: LoopingParams = LoopingParams(),
) -> TaxonomyLabel:
    score, flag = detect_looping(u.hypothesis, looping)
    counts = script_counts(u.hypothesis, registry, target_cfg)
    total = sum(counts.values())
    if total == 0:
        return TaxonomyLabel(u.id, NONE, None, Bucket.OTHER, flag, score)

    rank = _tie_rank(registry, target_cfg)
    top = max(counts.values())
    leaders = sorted((k for k, v in counts.items() if v == top), key=rank)
    share = top / total
    if share >= dominance:
        dominant = leaders[0]
        tie = len(leaders) > 1
    else:
        dominant, tie = MIXED, False
    return TaxonomyLabel(
        utterance_id=u.id,
        dominant_script=dominant,
        dominant_fraction=share,
        bucket=bucket_for(dominant, target_cfg),
        looping_flag=flag,
        looping_score=score,
        tie=tie,
        script_counts=dict(counts),
    )


@dataclass(frozen=True)
class TaxonomyTable:
    group_id: str
    counts: Mapping[Bucket, int]
    n: int

    @property
    def fractions(self) -> dict[Bucket, float]:
        return {b: (self.counts[b] / self.n if self.n else 0.0) for b in BUCKETS}

    @property
    def percentages(self) -> dict[Bucket, int]:
        """Independently rounded; a row may not add up to exactly 100."""
        return {b: int(round_half_away(100 * f, 0)) for b, f in self.fractions.items()}


def taxonomy_table(
    labels: Iterable[TaxonomyLabel], grouping: Mapping[str, str]
) -> list[TaxonomyTable]:
    labels = list(labels)
    label_ids = {lab.utterance_id for lab in labels}
    missing = [lab.utterance_id for lab in labels if lab.utterance_id not in grouping]
    if missing:
        raise ValueError(f"no group for utterance ids: {missing[:5]}")
    stray = [uid for uid in grouping if uid not in label_ids]
    if stray:
        raise ValueError(f"grouping names unknown utterance ids: {stray[:5]}")

    groups: dict[str, Counter] = {}
    for lab in labels:
        groups.setdefault(grouping[lab.utterance_id], Counter())[lab.bucket] += 1
    return [
        TaxonomyTable(gid, {b: c.get(b, 0) for b in BUCKETS}, sum(c.values()))
        for gid, c in groups.items()
    ]


def looping_rate(labels: Sequence[TaxonomyLabel]) -> float | None:
    if not labels:
        return None
    return sum(lab.looping_flag for lab in labels) / len(labels)
