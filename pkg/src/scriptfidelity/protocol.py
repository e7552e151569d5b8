"""Known-positive / known-negative validation of script configurations."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import read_jsonl
from .scripts import ScriptRegistry
from .sfr import score_utterances, sfr_text

# Every string in POSITIVES must score exactly 1.0 for its language and every
# string in NEGATIVES exactly 0.0.
POSITIVES: dict[str, tuple[str, ...]] = {
    "ps": ("زه پښتو ژبه وایم", "ګډوډي، ډېر ښه!", "ځوان ټول څېړنه"),
    "ur": ("میں اردو بولتا ہوں", "یہ کتاب بہت اچھی ہے۔", "ٹھیک ہے"),
    "hi": ("नमस्ते दुनिया", "यह एक परीक्षण है।", "क, ख।"),
    "bn": ("আমি বাংলায় কথা বলি", "এটি একটি পরীক্ষা।", "জার্মানির খবর"),
    "ml": ("എനിക്ക് മലയാളം അറിയാം", "ഇത് ഒരു പരീക്ഷണമാണ്.", "നന്ദി"),
    "so": ("Waxaan ku hadlaa Soomaali", "Waa maxay?", "Magacaygu waa Cali."),
}
NEGATIVES: dict[str, tuple[str, ...]] = {
    "ps": ("hello world", "नमस्ते", "Привет"),
    "ur": ("Jarmaneer on ek bekkara", "ছবি", "മലയാളം"),
    "hi": ("namaste duniya", "مرحبا", "আমি"),
    "bn": ("मैं हिंदी बोलता हूँ", "ami banglay kotha boli", "ابن"),
    "ml": ("मलयालम", "Malayalam", "জার্মানি"),
    "so": ("أنا أتكلم الصومالية", "Привет мир", "नमस्ते"),
}

PASHTO = "ps"
PASHTO_WHISPER_LIMIT = 0.01


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        lines = [c.line() for c in self.checks]
        n_fail = len(self.failures)
        lines.append(f"{len(self.checks) - n_fail}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def check_language(registry: ScriptRegistry, lang: str) -> list[Check]:
    if lang not in registry:
        return [Check(f"{lang}: config present", False, "language missing from registry")]
    cfg = registry[lang]
    checks = []
    for expected, samples in ((1.0, POSITIVES.get(lang, ())), (0.0, NEGATIVES.get(lang, ()))):
        kind = "positive" if expected == 1.0 else "negative"
        for text in samples:
            got = sfr_text(text, cfg)
            checks.append(
                Check(f"{lang}: {kind} {text!r}", got == expected, f"sfr={got}")
            )
    return checks


def check_pashto_predictions(
    path: str | Path, registry: ScriptRegistry, limit: float = PASHTO_WHISPER_LIMIT
) -> list[Check]:
    """Every Whisper model in a Pashto prediction file must score below ``limit``."""
    cfg = registry[PASHTO]
    by_model: dict[str, list] = {}
    for rec in read_jsonl(path):
        model = rec.model or ""
        if model.lower().startswith("whisper"):
            by_model.setdefault(model, []).append(rec.to_utterance(PASHTO))
    if not by_model:
        return [Check("ps predictions: Whisper rows present", False, f"none in {path}")]
    checks = []
    for model, utts in by_model.items():
        corpus = score_utterances(utts, cfg)
        mean = corpus.mean_sfr
        ok = mean is not None and mean < limit
        checks.append(
            Check(
                f"ps predictions: {model} corpus SFR < {100 * limit:g}%",
                ok,
                f"sfr={'null' if mean is None else f'{100 * mean:.2f}%'}, n={len(utts)}",
            )
        )
    return checks


def validate(
    registry: ScriptRegistry,
    languages: Sequence[str] | None = None,
    pashto_predictions: str | Path | None = None,
) -> ValidationReport:
    langs = list(POSITIVES) if languages is None else list(languages)
    checks: list[Check] = []
    for lang in langs:
        checks.extend(check_language(registry, lang))
    if pashto_predictions is not None:
        checks.extend(check_pashto_predictions(pashto_predictions, registry))
    return ValidationReport(tuple(checks))
