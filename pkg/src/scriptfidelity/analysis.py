"""Collapse statistics over a model x language evaluation matrix.

Values in the matrix are percentages (SFR 0-100, WER unbounded above).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Iterable, Mapping, Sequence

from .rounding import fmt_pct

COLLAPSE_THRESHOLD = 10.0
BIMODAL_LOW = 10.0
BIMODAL_HIGH = 90.0
DEFAULT_GATE = 0.8
WER_SPLIT = 50.0


@dataclass(frozen=True)
class EvalCell:
    model_id: str
    language_id: str
    sfr_percent: float | None
    wer_percent: float | None = None

    def __post_init__(self):
        if self.sfr_percent is None and self.wer_percent is not None:
            raise ValueError(
                f"{self.model_id}/{self.language_id}: WER given for an unevaluated cell"
            )
        if self.sfr_percent is not None and not 0.0 <= self.sfr_percent <= 100.0:
            raise ValueError(
                f"{self.model_id}/{self.language_id}: SFR {self.sfr_percent} outside [0, 100]"
            )

    @property
    def evaluated(self) -> bool:
        return self.sfr_percent is not None

    @property
    def key(self) -> tuple[str, str]:
        return (self.model_id, self.language_id)


@dataclass(frozen=True)
class EvalMatrix:
    cells: tuple[EvalCell, ...]
    models: tuple[str, ...] = ()
    languages: tuple[str, ...] = ()

    def __post_init__(self):
        cells = tuple(self.cells)
        seen = set()
        for c in cells:
            if c.key in seen:
                raise ValueError(f"duplicate cell for model={c.model_id} language={c.language_id}")
            seen.add(c.key)
        models = list(self.models)
        languages = list(self.languages)
        for c in cells:
            if c.model_id not in models:
                models.append(c.model_id)
            if c.language_id not in languages:
                languages.append(c.language_id)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "models", tuple(models))
        object.__setattr__(self, "languages", tuple(languages))

    def cell(self, model: str, language: str) -> EvalCell | None:
        for c in self.cells:
            if c.key == (model, language):
                return c
        return None

    @property
    def evaluated(self) -> list[EvalCell]:
        return [c for c in self.cells if c.evaluated]

    def __len__(self):
        return len(self.cells)


# --- collapse ---------------------------------------------------------------


def wilson_ci(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError(f"successes={successes} outside [0, {n}]")
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0, 1)")
    z = NormalDist().inv_cdf(1 - (1 - confidence) / 2)
    p = successes / n
    z2 = z * z
    denom = 1 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == n else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class CollapseReport:
    threshold_percent: float
    collapsed_pairs: tuple[tuple[str, str], ...]
    n_evaluated: int
    proportion: float
    wilson_ci: tuple[float, float]
    gap: tuple[float, float] | None
    bimodality: Mapping[str, int]

    @property
    def n_collapsed(self) -> int:
        return len(self.collapsed_pairs)

    @property
    def insensitive_interval(self) -> tuple[float, float] | None:
        """Thresholds in ``(low, high]`` select the same collapsed set.

        ``None`` when either side is empty or the sides touch.
        """
        if self.gap is None or self.gap[0] >= self.gap[1]:
            return None
        return self.gap

    @property
    def gap_width(self) -> float | None:
        return None if self.gap is None else self.gap[1] - self.gap[0]


def classify_collapse(
    m: EvalMatrix,
    threshold: float = COLLAPSE_THRESHOLD,
    confidence: float = 0.95,
    bimodal_bounds: tuple[float, float] = (BIMODAL_LOW, BIMODAL_HIGH),
) -> CollapseReport:
    if not 0 < threshold < 100:
        raise ValueError("threshold must be in (0, 100)")
    cells = m.evaluated
    if not cells:
        raise ValueError("matrix has no evaluated cells")
    collapsed = [c for c in cells if c.sfr_percent < threshold]
    kept = [c for c in cells if c.sfr_percent >= threshold]
    gap = None
    if collapsed and kept:
        gap = (max(c.sfr_percent for c in collapsed), min(c.sfr_percent for c in kept))
    lo, hi = bimodal_bounds
    sfrs = [c.sfr_percent for c in cells]
    bimodality = {
        "below": sum(v < lo for v in sfrs),
        "intermediate": sum(lo <= v <= hi for v in sfrs),
        "above": sum(v > hi for v in sfrs),
    }
    k, n = len(collapsed), len(cells)
    return CollapseReport(
        threshold_percent=threshold,
        collapsed_pairs=tuple(c.key for c in collapsed),
        n_evaluated=n,
        proportion=k / n,
        wilson_ci=wilson_ci(k, n, confidence),
        gap=gap,
        bimodality=bimodality,
    )


# --- family summaries -------------------------------------------------------

_FAMILY_PREFIXES = {"whisper": "Whisper", "mms": "MMS-1B", "seamless": "SeamlessM4T-v2"}


def infer_family(model_id: str) -> str:
    """Family name from a model id prefix (``whisper-tiny`` -> ``Whisper``)."""
    prefix = model_id.lower().split("-", 1)[0]
    return _FAMILY_PREFIXES.get(prefix, prefix)


@dataclass(frozen=True)
class FamilySummary:
    family: str
    mean_sfr: float
    median_sfr: float
    collapsed: int
    evaluated: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mean_sfr": self.mean_sfr,
            "median_sfr": self.median_sfr,
            "collapsed": self.collapsed,
            "evaluated": self.evaluated,
        }


ALL_MODELS = "All models"


def family_summary(
    m: EvalMatrix,
    family_of: Mapping[str, str] | Callable[[str], str] = infer_family,
    threshold: float = COLLAPSE_THRESHOLD,
) -> list[FamilySummary]:
    """Per-family and overall SFR mean/median and collapse counts.

    Unevaluated cells are left out. The last row covers all models.
    """
    lookup = family_of if callable(family_of) else None
    groups: dict[str, list[float]] = {}
    for c in m.evaluated:
        if lookup is not None:
            fam = lookup(c.model_id)
        else:
            if c.model_id not in family_of:
                raise ValueError(f"model {c.model_id!r} has no family")
            fam = family_of[c.model_id]
        groups.setdefault(fam, []).append(c.sfr_percent)

    def row(name: str, values: Sequence[float]) -> FamilySummary:
        return FamilySummary(
            family=name,
            mean_sfr=statistics.fmean(values),
            median_sfr=statistics.median(values),
            collapsed=sum(v < threshold for v in values),
            evaluated=len(values),
        )

    rows = [row(name, vals) for name, vals in groups.items()]
    everything = [v for vals in groups.values() for v in vals]
    if everything:
        rows.append(row(ALL_MODELS, everything))
    return rows


# --- scatter / quadrants ----------------------------------------------------


def quadrant(
    wer_percent: float | None,
    sfr_percent: float,
    sfr_split: float = COLLAPSE_THRESHOLD,
    wer_split: float = WER_SPLIT,
) -> str:
    """Fig.-style regime tag such as ``high-wer/low-sfr``."""
    s = "low" if sfr_percent < sfr_split else "high"
    if wer_percent is None:
        return f"na-wer/{s}-sfr"
    w = "high" if wer_percent >= wer_split else "low"
    return f"{w}-wer/{s}-sfr"


@dataclass(frozen=True)
class ScatterPoint:
    model_id: str
    language_id: str
    wer_percent: float | None
    sfr_percent: float
    collapsed: bool
    quadrant: str

    def to_row(self) -> dict:
        return {
            "model": self.model_id,
            "language": self.language_id,
            "wer": "" if self.wer_percent is None else repr(self.wer_percent),
            "sfr": repr(self.sfr_percent),
            "collapsed": int(self.collapsed),
            "quadrant": self.quadrant,
        }


def scatter_data(
    m: EvalMatrix,
    threshold: float = COLLAPSE_THRESHOLD,
    wer_split: float = WER_SPLIT,
) -> list[ScatterPoint]:
    return [
        ScatterPoint(
            c.model_id,
            c.language_id,
            c.wer_percent,
            c.sfr_percent,
            c.sfr_percent < threshold,
            quadrant(c.wer_percent, c.sfr_percent, threshold, wer_split),
        )
        for c in m.evaluated
    ]


# --- gated report -----------------------------------------------------------

MEANINGLESS = "WER orthographically meaningless: SFR below the {gate}% gate"


@dataclass(frozen=True)
class GatedCell:
    cell: EvalCell
    collapsed: bool
    wer_flagged: bool


@dataclass(frozen=True)
class GatedReport:
    matrix: EvalMatrix
    sfr_gate: float
    threshold: float
    cells: tuple[GatedCell, ...] = field(repr=False)

    @property
    def flagged(self) -> list[tuple[str, str]]:
        return [g.cell.key for g in self.cells if g.wer_flagged]

    def rows(self) -> list[dict]:
        out = []
        for g in self.cells:
            c = g.cell
            out.append(
                {
                    "model": c.model_id,
                    "language": c.language_id,
                    "sfr": "" if c.sfr_percent is None else repr(c.sfr_percent),
                    "wer": "" if c.wer_percent is None else repr(c.wer_percent),
                    "collapsed": int(g.collapsed),
                    "wer_meaningful": "" if c.sfr_percent is None else int(not g.wer_flagged),
                }
            )
        return out

    def render_text(self) -> str:
        m = self.matrix
        by_key = {g.cell.key: g for g in self.cells}
        width = max([len("Model")] + [len(x) for x in m.models])
        head = f"{'Model':<{width}}"
        for lang in m.languages:
            head += f" | {lang + ' SFR':>9} {'WER':>8}"
        lines = [head, "-" * len(head)]
        for model in m.models:
            line = f"{model:<{width}}"
            for lang in m.languages:
                g = by_key.get((model, lang))
                if g is None or not g.cell.evaluated:
                    line += f" | {'---':>9} {'---':>8}"
                    continue
                sfr = fmt_pct(g.cell.sfr_percent) + ("*" if g.collapsed else " ")
                wer = fmt_pct(g.cell.wer_percent) + ("!" if g.wer_flagged else " ")
                line += f" | {sfr:>9} {wer:>8}"
            lines.append(line)
        lines.append("")
        lines.append(f"* script collapse (SFR < {self.threshold:g}%)")
        lines.append("! " + MEANINGLESS.format(gate=f"{100 * self.sfr_gate:g}"))
        return "\n".join(lines)


def gated_report(
    m: EvalMatrix, sfr_gate: float = DEFAULT_GATE, threshold: float = COLLAPSE_THRESHOLD
) -> GatedReport:
    """SFR-first rendering: WER is flagged wherever SFR is below the gate."""
    if not 0 < sfr_gate < 1:
        raise ValueError("sfr_gate must be in (0, 1)")
    gate = 100 * sfr_gate
    cells = tuple(
        GatedCell(
            c,
            c.evaluated and c.sfr_percent < threshold,
            c.evaluated and c.wer_percent is not None and c.sfr_percent < gate,
        )
        for c in m.cells
    )
    return GatedReport(m, sfr_gate, threshold, cells)


def matrix_from_cells(cells: Iterable[EvalCell]) -> EvalMatrix:
    return EvalMatrix(tuple(cells))
