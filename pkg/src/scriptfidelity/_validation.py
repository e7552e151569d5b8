"""Input validation helpers for the estimator wrappers."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np

from .scripts import ScriptConfig, ScriptRegistry, resolve_registry


def _hypothesis_of(item: Any) -> str:
    if item is None:
        return ""
    if isinstance(item, str):
        return item
    hyp = getattr(item, "hypothesis", None)
    if isinstance(hyp, str):
        return hyp
    if isinstance(item, float) and np.isnan(item):
        return ""
    raise TypeError(f"expected text or an object with a 'hypothesis', got {type(item).__name__}")


def check_texts(X) -> list[str]:
    """Coerce ``X`` to a list of hypothesis strings.

    Accepts any 1-D iterable (list, tuple, numpy array, pandas Series) of
    strings or of records carrying a ``hypothesis`` attribute, or a single
    column 2-D array. A bare string is rejected.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError("expected a sequence of texts, got a single string")
    if isinstance(X, np.ndarray) or hasattr(X, "to_numpy"):
        arr = np.asarray(X, dtype=object)
        if arr.ndim == 2:
            if arr.shape[1] != 1:
                raise ValueError(f"expected a single text column, got shape {arr.shape}")
            arr = arr[:, 0]
        elif arr.ndim != 1:
            raise ValueError(f"expected 1-D input, got {arr.ndim}-D")
        items = arr.tolist()
    else:
        try:
            items = list(X)
        except TypeError:
            raise TypeError(f"expected a sequence of texts, got {type(X).__name__}") from None
    return [_hypothesis_of(x) for x in items]


def check_registry(scripts) -> ScriptRegistry:
    if isinstance(scripts, ScriptRegistry):
        return scripts
    if scripts is None or isinstance(scripts, (str, Path)):
        return resolve_registry(scripts)
    raise TypeError("scripts must be None, a path, or a ScriptRegistry")


def check_language(language: str, registry: ScriptRegistry) -> ScriptConfig:
    return registry[language]


def check_open_interval(value: float, name: str, low: float = 0.0, high: float = 1.0) -> float:
    value = float(value)
    if not low < value < high:
        raise ValueError(f"{name} must be in ({low:g}, {high:g}), got {value}")
    return value


def check_sfr_percentages(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float).ravel()
    finite = arr[~np.isnan(arr)]
    if finite.size and (finite.min() < 0 or finite.max() > 100):
        raise ValueError("SFR percentages must lie in [0, 100]")
    return arr
