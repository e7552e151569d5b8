"""Reported benchmark figures that ship alongside the FLEURS matrix fixture.

Recomputed statistics are compared against these values; mismatches are
reported, never patched into the fixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .analysis import FamilySummary
from .rounding import round_half_away

# family -> (mean SFR %, median SFR %, collapsed, evaluated)
PUBLISHED_FAMILY_SUMMARY = {
    "Whisper": (53.3, 56.9, 18, 42),
    "MMS-1B": (99.3, 99.4, 0, 5),
    "SeamlessM4T-v2": (99.9, 100.0, 0, 6),
    "All models": (62.9, 97.3, 18, 53),
}
PUBLISHED_COLLAPSED = 18
PUBLISHED_EVALUATED = 53
PUBLISHED_WILSON_PERCENT = (23, 47)
PUBLISHED_GAP = (7.2, 13.0)
PUBLISHED_BIMODALITY = {"below": 18, "intermediate": 5, "above": 30}


@dataclass(frozen=True)
class Discrepancy:
    family: str
    field: str
    published: float
    recomputed: float

    def describe(self) -> str:
        fmt = "{:.1f}" if self.field in ("mean", "median") else "{:d}"
        return (
            f"{self.family}: {self.field} recomputed {fmt.format(self.recomputed)} "
            f"vs published {fmt.format(self.published)}"
        )


def compare_family_summary(rows: Iterable[FamilySummary]) -> list[Discrepancy]:
    """Differences at one-decimal display rounding against the reported summary."""
    out = []
    for row in rows:
        ref = PUBLISHED_FAMILY_SUMMARY.get(row.family)
        if ref is None:
            continue
        mean, median, collapsed, evaluated = ref
        got = (
            round_half_away(row.mean_sfr, 1),
            round_half_away(row.median_sfr, 1),
            row.collapsed,
            row.evaluated,
        )
        for name, want, have in zip(("mean", "median", "collapsed", "evaluated"), ref, got):
            if want != have:
                out.append(Discrepancy(row.family, name, want, have))
    return out
