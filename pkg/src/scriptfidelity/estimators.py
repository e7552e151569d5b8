"""scikit-learn compatible wrappers around the metric functions.

The wrappers hold configuration as constructor parameters (so ``get_params``
and ``clone`` work) and resolve the script registry in ``fit``. They compose
with :class:`sklearn.pipeline.Pipeline` and
:class:`sklearn.preprocessing.FunctionTransformer` like any transformer.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import analysis
from ._validation import (
    check_language,
    check_open_interval,
    check_registry,
    check_sfr_percentages,
    check_texts,
)
from .audit import AuditConfig, AuditState, audit_step
from .metrics import NormalizationPolicy, normalize
from .scripts import NormalizationKind
from .sfr import SfrResult, Utterance, sfr_corpus, sfr_counts
from .taxonomy import BUCKETS, LoopingParams, bucket_for, classify_dominant


class ScriptFidelityScorer(TransformerMixin, BaseEstimator):
    """Per-text Script Fidelity Rate as a one-column feature.

    Parameters
    ----------
    language : str
        Target language id in the registry.
    scripts : None, path or ScriptRegistry
        Registry override; ``None`` uses the built-in configs.
    null_value : float
        Value emitted for texts with no countable characters.
    """

    def __init__(self, language="hi", scripts=None, null_value=np.nan):
        self.language = language
        self.scripts = scripts
        self.null_value = null_value

    def fit(self, X=None, y=None):
        self.registry_ = check_registry(self.scripts)
        self.config_ = check_language(self.language, self.registry_)
        self.n_features_in_ = 1
        return self

    def results(self, X) -> list[SfrResult]:
        check_is_fitted(self, "config_")
        texts = check_texts(X)
        return [SfrResult(str(i), *sfr_counts(t, self.config_)) for i, t in enumerate(texts)]

    def score_samples(self, X) -> np.ndarray:
        return np.array(
            [self.null_value if r.is_null else r.sfr for r in self.results(X)], dtype=float
        )

    def transform(self, X) -> np.ndarray:
        return self.score_samples(X).reshape(-1, 1)

    def score(self, X, y=None) -> float:
        """Corpus SFR (mean over non-null texts); NaN if every text is null."""
        mean = sfr_corpus(self.results(X)).mean_sfr
        return float("nan") if mean is None else mean

    def get_feature_names_out(self, input_features=None):
        return np.array(["sfr"], dtype=object)


class TextNormalizer(TransformerMixin, BaseEstimator):
    """Language-specific WER/CER normalization.

    ``policy`` names one of ``ArabicScript``, ``Indic`` or ``LatinLowercase``;
    when ``None`` it is taken from ``language``'s config.
    """

    def __init__(self, policy=None, language=None, scripts=None):
        self.policy = policy
        self.language = language
        self.scripts = scripts

    def fit(self, X=None, y=None):
        if self.policy is not None:
            self.policy_ = NormalizationPolicy(NormalizationKind(self.policy))
        elif self.language is not None:
            cfg = check_language(self.language, check_registry(self.scripts))
            self.policy_ = NormalizationPolicy.for_config(cfg)
        else:
            raise ValueError("either policy or language is required")
        return self

    def transform(self, X):
        check_is_fitted(self, "policy_")
        return np.array([normalize(t, self.policy_) for t in check_texts(X)], dtype=object)


class DominantScriptClassifier(BaseEstimator):
    """Labels each text with its dominant-script bucket.

    ``predict`` returns one of ``classes_`` (Latin, Devanagari, Target,
    Other) per text. The classifier is rule based; ``fit`` only resolves the
    configuration.
    """

    def __init__(
        self,
        language="bn",
        scripts=None,
        dominance=0.5,
        loop_max_n=5,
        loop_coverage=0.5,
        loop_min_tokens=10,
    ):
        self.language = language
        self.scripts = scripts
        self.dominance = dominance
        self.loop_max_n = loop_max_n
        self.loop_coverage = loop_coverage
        self.loop_min_tokens = loop_min_tokens

    def fit(self, X=None, y=None):
        if not 0 < self.dominance <= 1:
            raise ValueError("dominance must be in (0, 1]")
        self.registry_ = check_registry(self.scripts)
        self.config_ = check_language(self.language, self.registry_)
        self.looping_ = LoopingParams(self.loop_max_n, self.loop_coverage, self.loop_min_tokens)
        self.classes_ = np.array([b.value for b in BUCKETS], dtype=object)
        return self

    def labels(self, X):
        check_is_fitted(self, "config_")
        return [
            classify_dominant(
                Utterance(str(i), self.language, t),
                self.registry_,
                self.config_,
                self.dominance,
                self.looping_,
            )
            for i, t in enumerate(check_texts(X))
        ]

    def predict(self, X) -> np.ndarray:
        return np.array([lab.bucket.value for lab in self.labels(X)], dtype=object)

    def predict_proba(self, X) -> np.ndarray:
        """Share of countable characters falling in each bucket's scripts."""
        rows = []
        for lab in self.labels(X):
            total = sum(lab.script_counts.values())
            row = dict.fromkeys(BUCKETS, 0.0)
            for script, count in lab.script_counts.items():
                row[bucket_for(script, self.config_)] += count / total
            rows.append([row[b] for b in BUCKETS])
        return np.array(rows, dtype=float).reshape(-1, len(BUCKETS))


class CollapseDetector(BaseEstimator):
    """Collapse threshold fitted on a set of corpus-level SFR percentages.

    ``fit`` accepts an :class:`~scriptfidelity.analysis.EvalMatrix` or a 1-D
    array of SFR percentages (NaN marks an unevaluated cell) and records the
    collapse statistics; ``predict`` flags values below ``threshold``.
    """

    def __init__(self, threshold=analysis.COLLAPSE_THRESHOLD, confidence=0.95):
        self.threshold = threshold
        self.confidence = confidence

    def fit(self, X, y=None):
        check_open_interval(self.threshold, "threshold", 0, 100)
        if isinstance(X, analysis.EvalMatrix):
            matrix = X
        else:
            values = check_sfr_percentages(X)
            matrix = analysis.EvalMatrix(
                tuple(
                    analysis.EvalCell(str(i), "-", None if np.isnan(v) else float(v))
                    for i, v in enumerate(values)
                )
            )
        self.report_ = analysis.classify_collapse(matrix, self.threshold, self.confidence)
        self.collapsed_pairs_ = self.report_.collapsed_pairs
        self.proportion_ = self.report_.proportion
        self.wilson_ci_ = self.report_.wilson_ci
        self.gap_ = self.report_.gap
        self.insensitive_interval_ = self.report_.insensitive_interval
        self.bimodality_ = dict(self.report_.bimodality)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "report_")
        values = check_sfr_percentages(X)
        return np.where(np.isnan(values), False, values < self.threshold)

    def fit_predict(self, X, y=None) -> np.ndarray:
        self.fit(X)
        if isinstance(X, analysis.EvalMatrix):
            X = [np.nan if c.sfr_percent is None else c.sfr_percent for c in X.cells]
        return self.predict(X)


class StreamingAuditor(BaseEstimator):
    """Incremental SFR audit; feed batches through ``partial_fit``.

    Alerts produced so far are kept in ``events_``.
    """

    def __init__(
        self,
        window_size=100,
        alert_threshold=0.8,
        min_window_fill=None,
        scripts=None,
        timestamps=True,
    ):
        self.window_size = window_size
        self.alert_threshold = alert_threshold
        self.min_window_fill = min_window_fill
        self.scripts = scripts
        self.timestamps = timestamps

    def _init(self):
        self.config_ = AuditConfig(self.window_size, self.alert_threshold, self.min_window_fill)
        self.registry_ = check_registry(self.scripts)
        self.state_ = AuditState()
        self.events_ = []

    def update(self, utterance: Utterance):
        if not hasattr(self, "state_"):
            self._init()
        clock = time.time if self.timestamps else None
        _, event = audit_step(self.state_, utterance, self.registry_, self.config_, clock)
        if event is not None:
            self.events_.append(event)
        return event

    def partial_fit(self, X, y=None):
        """``X``: utterances (or records with ``to_utterance``) in stream order."""
        for item in X:
            if not isinstance(item, Utterance):
                item = item.to_utterance()
            self.update(item)
        return self

    def fit(self, X, y=None):
        self._init()
        return self.partial_fit(X)

    @property
    def status_(self) -> dict:
        check_is_fitted(self, "state_")
        return dict(self.state_.status)
