import copy
import time

import pytest
from hypothesis import given, settings, strategies as st

from scriptfidelity.audit import (
    ALERTING,
    OK,
    AlertEvent,
    AuditConfig,
    AuditError,
    AuditState,
    audit_step,
    run_audit,
)
from scriptfidelity.sfr import Utterance

FULL = "नमस्ते"  # fully Devanagari
HALF = "नम ab"  # 2 target of 4 countable
LATIN = "hello"
EMPTY = "... !"


def stream(texts, lang="hi"):
    return [Utterance(f"u{i}", lang, t) for i, t in enumerate(texts, start=1)]


def events(texts, registry, **cfg):
    return list(run_audit(stream(texts), registry, AuditConfig(**cfg), clock=None))


def test_all_faithful_no_alert(registry):
    assert events([FULL] * 100, registry) == []


def test_all_collapsed_one_alert(registry):
    (ev,) = events([LATIN] * 100, registry)
    assert isinstance(ev, AlertEvent)
    assert ev.window_mean == 0.0 and ev.sequence == 100 and ev.window_size == 100
    assert ev.timestamp is None


def test_alternating_alerts_once_at_fill(registry):
    evs = events([FULL, HALF] * 100, registry)
    assert len(evs) == 1
    assert evs[0].sequence == 100 and evs[0].window_mean == pytest.approx(0.75)


def test_recovery_rearms(registry):
    texts = [LATIN] * 10 + [FULL] * 10 + [LATIN] * 10
    evs = events(texts, registry, window_size=10)
    # recovered by #18 (mean 0.8); #23 holds 7 faithful + 3 Latin = 0.7
    assert [e.sequence for e in evs] == [10, 23]


def test_stays_alerting_without_repeats(registry):
    assert len(events([LATIN] * 500, registry, window_size=10)) == 1


def test_min_fill(registry):
    (ev,) = events([LATIN] * 5, registry, window_size=100, min_window_fill=3)
    assert ev.sequence == 3 and ev.window_size == 3


def test_nulls_excluded_from_mean(registry):
    # nulls occupy slots but do not count toward fill or the mean
    state = AuditState()
    cfg = AuditConfig(window_size=4, min_window_fill=2)
    for u in stream([FULL, EMPTY, EMPTY, LATIN]):
        audit_step(state, u, registry, cfg, clock=None)
    assert state.null_count == 2 and state.filled("hi") == 2
    assert state.window_mean("hi") == 0.5


def test_languages_are_independent(registry):
    us = [Utterance(f"a{i}", "hi", FULL) for i in range(10)]
    us += [Utterance(f"b{i}", "bn", LATIN) for i in range(10)]
    state = AuditState()
    evs = list(run_audit(us, registry, AuditConfig(window_size=10), clock=None, state=state))
    assert [e.language for e in evs] == ["bn"]
    assert state.status == {"hi": OK, "bn": ALERTING}


def test_unknown_language_leaves_state(registry):
    state = AuditState()
    cfg = AuditConfig(window_size=3)
    for u in stream([FULL, FULL]):
        audit_step(state, u, registry, cfg)
    windows = {k: list(v) for k, v in state.windows.items()}
    status = dict(state.status)
    _, ev = audit_step(state, Utterance("x", "zz", LATIN), registry, cfg)
    assert isinstance(ev, AuditError) and "zz" in ev.message
    assert {k: list(v) for k, v in state.windows.items()} == windows
    assert state.status == status and state.processed == 2 and state.errors == 1


class NoReference(Utterance):
    @property
    def reference(self):
        raise AssertionError("audit must not read references")

    @reference.setter
    def reference(self, value):
        pass


def test_reference_free(registry):
    us = [NoReference(f"u{i}", "hi", LATIN) for i in range(20)]
    assert len(list(run_audit(us, registry, AuditConfig(window_size=10), clock=None))) == 1


def test_clock_injected(registry):
    (ev,) = run_audit(stream([LATIN] * 3), registry, AuditConfig(window_size=3),
                      clock=lambda: 42.0)
    assert ev.timestamp == 42.0 and ev.to_dict()["timestamp"] == 42.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([FULL, HALF, LATIN, EMPTY]), max_size=200),
       st.integers(1, 20))
def test_deterministic(registry, texts, window):
    cfg = dict(window_size=window)
    assert events(texts, registry, **cfg) == events(copy.copy(texts), registry, **cfg)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([FULL, HALF, LATIN, EMPTY]), max_size=200),
       st.integers(1, 20))
def test_alerts_alternate_with_recovery(registry, texts, window):
    # between two alerts the window mean must have recovered
    state = AuditState()
    cfg = AuditConfig(window_size=window)
    alerting = False
    for u in stream(texts):
        _, ev = audit_step(state, u, registry, cfg, clock=None)
        if ev is not None:
            assert not alerting
            alerting = True
        elif state.status.get("hi") == OK:
            alerting = False


def test_throughput(registry):
    us = stream([FULL, HALF, LATIN, "नमस्ते दुनिया"] * 2500)
    t0 = time.perf_counter()
    list(run_audit(us, registry, AuditConfig(), clock=None))
    assert time.perf_counter() - t0 < 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        AuditConfig(window_size=0)
    with pytest.raises(ValueError):
        AuditConfig(alert_threshold=1.0)
    with pytest.raises(ValueError):
        AuditConfig(window_size=5, min_window_fill=6)
    assert AuditConfig(window_size=7).min_window_fill == 7
