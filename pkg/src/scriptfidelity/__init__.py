"""Script Fidelity Rate (SFR): reference-free script-collapse detection for ASR output."""

from .analysis import (
    CollapseReport,
    EvalCell,
    EvalMatrix,
    classify_collapse,
    family_summary,
    gated_report,
    scatter_data,
    wilson_ci,
)
from .audit import AlertEvent, AuditConfig, AuditState, audit_step, run_audit
from .corpus import (
    CorpusRecord,
    load_fixture_matrix,
    read_jsonl,
    read_matrix_csv,
    write_jsonl,
    write_matrix_csv,
)
from .estimators import (
    CollapseDetector,
    DominantScriptClassifier,
    ScriptFidelityScorer,
    StreamingAuditor,
    TextNormalizer,
)
from .exceptions import ConfigError, InputFormatError, ScriptFidelityError, UnknownLanguageError
from .metrics import EditStats, NormalizationPolicy, cer, edit_distance_stats, normalize, wer
from .scripts import (
    CodePointRange,
    ScriptConfig,
    ScriptRegistry,
    builtin_registry,
    char_in_script,
    load_registry,
)
from .sfr import (
    CorpusSfr,
    SfrResult,
    Utterance,
    countable_chars,
    sfr_corpus,
    sfr_text,
    sfr_utterance,
)
from .taxonomy import TaxonomyLabel, TaxonomyTable, classify_dominant, detect_looping, taxonomy_table

__version__ = "0.1.0"
