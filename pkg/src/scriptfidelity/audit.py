"""Reference-free streaming audit.

Hypotheses arrive one at a time; each language keeps a count-based sliding
window of recent SFR results. When a full-enough window's mean SFR falls
below the alert threshold an alert fires once; it re-arms after the mean
recovers. Only the hypothesis text and language are read, never a reference.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .scripts import ScriptRegistry
from .sfr import SfrResult, Utterance, sfr_utterance

OK = "ok"
ALERTING = "alerting"


@dataclass(frozen=True)
class AuditConfig:
    window_size: int = 100
    alert_threshold: float = 0.8
    min_window_fill: int | None = None

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if not 0 < self.alert_threshold < 1:
            raise ValueError("alert_threshold must be in (0, 1)")
        if self.min_window_fill is None:
            object.__setattr__(self, "min_window_fill", self.window_size)
        if not 1 <= self.min_window_fill <= self.window_size:
            raise ValueError("min_window_fill must be in [1, window_size]")


@dataclass(frozen=True)
class AlertEvent:
    language: str
    window_mean: float
    window_size: int
    utterance_id: str
    sequence: int
    timestamp: float | None = None

    def to_dict(self) -> dict:
        out = {
            "event": "alert",
            "language": self.language,
            "window_mean": self.window_mean,
            "window_size": self.window_size,
            "utterance_id": self.utterance_id,
            "sequence": self.sequence,
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out

    def describe(self) -> str:
        return (
            f"ALERT [{self.language}] window SFR {self.window_mean:.3f} over "
            f"{self.window_size} utterances (at #{self.sequence}, id={self.utterance_id})"
        )


@dataclass(frozen=True)
class AuditError:
    utterance_id: str
    sequence: int
    message: str

    def to_dict(self) -> dict:
        return {
            "event": "error",
            "utterance_id": self.utterance_id,
            "sequence": self.sequence,
            "message": self.message,
        }

    def describe(self) -> str:
        return f"ERROR at #{self.sequence} (id={self.utterance_id}): {self.message}"


@dataclass
class AuditState:
    windows: dict[str, deque] = field(default_factory=dict)
    status: dict[str, str] = field(default_factory=dict)
    processed: int = 0
    null_count: int = 0
    alerts_fired: int = 0
    errors: int = 0

    def window_mean(self, language: str) -> float | None:
        values = [r.sfr for r in self.windows.get(language, ()) if not r.is_null]
        return math.fsum(values) / len(values) if values else None

    def filled(self, language: str) -> int:
        return sum(1 for r in self.windows.get(language, ()) if not r.is_null)


def audit_step(
    state: AuditState,
    u: Utterance,
    registry: ScriptRegistry,
    cfg: AuditConfig,
    clock: Callable[[], float] | None = time.time,
) -> tuple[AuditState, AlertEvent | AuditError | None]:
    """Advance the audit by one utterance (``state`` is updated in place).

    Pass ``clock=None`` to leave timestamps off alert events.
    """
    seq = state.processed + state.errors + 1
    lang = u.language_id
    if lang not in registry:
        state.errors += 1
        known = ", ".join(sorted(registry.configs))
        return state, AuditError(u.id, seq, f"unknown language {lang!r} (known: {known})")

    result: SfrResult = sfr_utterance(u, registry[lang])
    window = state.windows.get(lang)
    if window is None:
        window = state.windows[lang] = deque(maxlen=cfg.window_size)
        state.status[lang] = OK
    window.append(result)
    state.processed += 1
    if result.is_null:
        state.null_count += 1

    if state.filled(lang) < cfg.min_window_fill:
        return state, None
    mean = state.window_mean(lang)
    event = None
    if mean < cfg.alert_threshold:
        if state.status[lang] == OK:
            state.status[lang] = ALERTING
            state.alerts_fired += 1
            event = AlertEvent(
                lang, mean, len(window), u.id, seq, None if clock is None else clock()
            )
    else:
        state.status[lang] = OK
    return state, event


def run_audit(
    utterances: Iterable[Utterance],
    registry: ScriptRegistry,
    cfg: AuditConfig = AuditConfig(),
    clock: Callable[[], float] | None = time.time,
    state: AuditState | None = None,
) -> Iterator[AlertEvent | AuditError]:
    """Yield every event produced while streaming ``utterances``."""
    state = state if state is not None else AuditState()
    for u in utterances:
        _, event = audit_step(state, u, registry, cfg, clock)
        if event is not None:
            yield event
