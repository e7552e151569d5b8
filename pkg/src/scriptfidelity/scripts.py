"""Per-language script specifications and the script registry.

A :class:`ScriptConfig` names the Unicode ranges (plus optional extra code
points) that make up a target language's writing system. A
:class:`ScriptRegistry` bundles the configs with an ordered list of detection
scripts used by the dominant-script taxonomy.

Configs live in a YAML file; :func:`builtin_registry` loads the one shipped
with the package and :func:`load_registry` merges a user file over it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import yaml

from .exceptions import ConfigError, UnknownLanguageError

MAX_CODE_POINT = 0x10FFFF
DETECTION_KEY = "detection_scripts"


class NormalizationKind(str, enum.Enum):
    ARABIC_SCRIPT = "ArabicScript"
    INDIC = "Indic"
    LATIN_LOWERCASE = "LatinLowercase"


@dataclass(frozen=True, order=True)
class CodePointRange:
    """Inclusive code-point span ``[start, end]``."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start <= MAX_CODE_POINT and 0 <= self.end <= MAX_CODE_POINT):
            raise ConfigError(f"code point range {self} outside U+0000..U+10FFFF")
        if self.start > self.end:
            raise ConfigError(f"range start U+{self.start:04X} > end U+{self.end:04X}")

    def __contains__(self, cp: int) -> bool:
        return self.start <= cp <= self.end

    def __str__(self):
        return f"U+{self.start:04X}-U+{self.end:04X}"

    @classmethod
    def parse(cls, text: str) -> "CodePointRange":
        """Parse ``"0600-06FF"`` (or a single ``"0600"``)."""
        if not isinstance(text, str):
            raise ConfigError(f"range must be a quoted hex string, got {text!r}")
        parts = text.strip().upper().removeprefix("U+").split("-")
        if len(parts) > 2:
            raise ConfigError(f"malformed range {text!r}")
        try:
            bounds = [int(p.strip().removeprefix("U+"), 16) for p in parts]
        except ValueError:
            raise ConfigError(f"malformed range {text!r}") from None
        return cls(bounds[0], bounds[-1])

    def to_hex(self) -> str:
        if self.start == self.end:
            return f"{self.start:04X}"
        return f"{self.start:04X}-{self.end:04X}"


def _check_disjoint(ranges: Iterable[CodePointRange], where: str) -> None:
    ordered = sorted(ranges)
    for a, b in zip(ordered, ordered[1:]):
        if b.start <= a.end:
            raise ConfigError(f"{where}: overlapping ranges {a} and {b}")


def _parse_code_point(text) -> int:
    if isinstance(text, int) and not isinstance(text, bool):
        raise ConfigError(f"code point must be a quoted hex string, got {text!r}")
    try:
        cp = int(str(text).strip().upper().removeprefix("U+"), 16)
    except ValueError:
        raise ConfigError(f"malformed code point {text!r}") from None
    if not 0 <= cp <= MAX_CODE_POINT:
        raise ConfigError(f"code point {text!r} outside Unicode range")
    return cp


@dataclass(frozen=True)
class ScriptConfig:
    """Target writing system of one language.

    ``ranges`` must be non-empty and pairwise disjoint. ``unique_points`` may
    sit inside or outside the ranges.
    """

    language_id: str
    script_name: str
    ranges: tuple[CodePointRange, ...]
    unique_points: frozenset[int] = frozenset()
    normalization_policy: NormalizationKind = NormalizationKind.LATIN_LOWERCASE
    diacritic_ranges: tuple[CodePointRange, ...] | None = None
    digit_ranges: tuple[CodePointRange, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "ranges", tuple(self.ranges))
        object.__setattr__(self, "unique_points", frozenset(self.unique_points))
        object.__setattr__(
            self, "normalization_policy", NormalizationKind(self.normalization_policy)
        )
        if not self.ranges:
            raise ConfigError(f"{self.language_id}: ranges must be non-empty")
        _check_disjoint(self.ranges, self.language_id)
        for cp in self.unique_points:
            if not 0 <= cp <= MAX_CODE_POINT:
                raise ConfigError(f"{self.language_id}: invalid unique code point {cp}")

    def contains(self, cp: int) -> bool:
        if cp in self.unique_points:
            return True
        for r in self.ranges:
            if r.start <= cp <= r.end:
                return True
        return False


def char_in_script(c: str, cfg: ScriptConfig) -> bool:
    """True iff ``c`` lies in one of ``cfg``'s ranges or its unique points."""
    if len(c) != 1:
        raise ValueError(f"expected a single character, got {c!r}")
    return cfg.contains(ord(c))


@dataclass(frozen=True)
class DetectionScript:
    name: str
    ranges: tuple[CodePointRange, ...]

    def __post_init__(self):
        object.__setattr__(self, "ranges", tuple(self.ranges))
        _check_disjoint(self.ranges, f"detection script {self.name}")

    def contains(self, cp: int) -> bool:
        return any(r.start <= cp <= r.end for r in self.ranges)


@dataclass(frozen=True)
class ScriptRegistry:
    """Language configs plus the ordered detection scripts.

    The order of ``detection_scripts`` is the tie-break order used by the
    taxonomy when two scripts hold the same share of an utterance.
    """

    configs: Mapping[str, ScriptConfig]
    detection_scripts: tuple[DetectionScript, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "configs", MappingProxyType(dict(self.configs)))
        object.__setattr__(self, "detection_scripts", tuple(self.detection_scripts))
        names = [d.name for d in self.detection_scripts]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate detection script names: {names}")

    def __eq__(self, other):
        if not isinstance(other, ScriptRegistry):
            return NotImplemented
        return (
            dict(self.configs) == dict(other.configs)
            and self.detection_scripts == other.detection_scripts
        )

    def __hash__(self):
        return hash((tuple(sorted(self.configs)), self.detection_scripts))

    def __getitem__(self, language_id: str) -> ScriptConfig:
        try:
            return self.configs[language_id]
        except KeyError:
            raise UnknownLanguageError(language_id, self.configs) from None

    def __contains__(self, language_id) -> bool:
        return language_id in self.configs

    @property
    def languages(self) -> list[str]:
        return list(self.configs)

    def merged(self, other: "ScriptRegistry") -> "ScriptRegistry":
        """Entries of ``other`` replace same-id entries of ``self``."""
        configs = {**self.configs, **other.configs}
        detection = other.detection_scripts or self.detection_scripts
        return ScriptRegistry(configs, detection)


# --- file format ------------------------------------------------------------

_ENTRY_KEYS = {"script", "ranges", "unique", "normalization", "diacritic_ranges", "digit_ranges"}


def _line_of(node: yaml.Node | None) -> str:
    return f"line {node.start_mark.line + 1}" if node is not None else "unknown line"


def _key_nodes(root: yaml.Node | None) -> dict[str, yaml.Node]:
    if not isinstance(root, yaml.MappingNode):
        return {}
    return {k.value: k for k, _ in root.value if isinstance(k, yaml.ScalarNode)}


def _parse_ranges(values, where: str) -> tuple[CodePointRange, ...]:
    if not isinstance(values, list):
        raise ConfigError(f"{where}: expected a list of hex ranges")
    try:
        return tuple(CodePointRange.parse(v) for v in values)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_entry(lang: str, entry, node: yaml.Node | None) -> ScriptConfig:
    where = f"{_line_of(node)}, key {lang!r}"
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    for required in ("script", "ranges"):
        if required not in entry:
            raise ConfigError(f"{where}: missing key {required!r}")
    ranges = _parse_ranges(entry["ranges"], f"{where}.ranges")
    unique = entry.get("unique") or []
    if not isinstance(unique, list):
        raise ConfigError(f"{where}.unique: expected a list of hex code points")
    try:
        points = frozenset(_parse_code_point(u) for u in unique)
    except ConfigError as exc:
        raise ConfigError(f"{where}.unique: {exc}") from None
    try:
        policy = NormalizationKind(entry.get("normalization", "LatinLowercase"))
    except ValueError:
        names = [k.value for k in NormalizationKind]
        raise ConfigError(
            f"{where}.normalization: {entry.get('normalization')!r} not one of {names}"
        ) from None
    extra = {}
    for key in ("diacritic_ranges", "digit_ranges"):
        if key in entry:
            extra[key] = _parse_ranges(entry[key], f"{where}.{key}")
    try:
        return ScriptConfig(
            language_id=lang,
            script_name=str(entry["script"]),
            ranges=ranges,
            unique_points=points,
            normalization_policy=policy,
            **extra,
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_registry(text: str, source: str = "<string>") -> ScriptRegistry:
    """Parse registry YAML text (no merging with the built-ins)."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"line {mark.line + 1}" if mark is not None else "unknown line"
        raise ConfigError(f"{source}: parse error at {loc}: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping of language ids")
    nodes = _key_nodes(root)
    configs = {}
    detection = []
    for key, entry in data.items():
        key = str(key)
        if key == DETECTION_KEY:
            if not isinstance(entry, list):
                raise ConfigError(f"{source}: {_line_of(nodes.get(key))}: {key} must be a list")
            for i, item in enumerate(entry):
                if not isinstance(item, dict) or "name" not in item or "ranges" not in item:
                    raise ConfigError(
                        f"{source}: {_line_of(nodes.get(key))}: {key}[{i}] needs name and ranges"
                    )
                where = f"{source}: {key}[{i}]"
                try:
                    detection.append(
                        DetectionScript(
                            str(item["name"]), _parse_ranges(item["ranges"], where)
                        )
                    )
                except ConfigError as exc:
                    raise ConfigError(f"{where}: {exc}") from None
            continue
        try:
            configs[key] = _parse_entry(key, entry, nodes.get(key))
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None
    return ScriptRegistry(configs, detection)


def dump_registry(registry: ScriptRegistry) -> str:
    """Serialize a registry to the YAML config format."""
    out: dict = {}
    for lang, cfg in registry.configs.items():
        entry = {
            "script": cfg.script_name,
            "ranges": [r.to_hex() for r in cfg.ranges],
            "unique": [f"{cp:04X}" for cp in sorted(cfg.unique_points)],
            "normalization": cfg.normalization_policy.value,
        }
        if cfg.diacritic_ranges is not None:
            entry["diacritic_ranges"] = [r.to_hex() for r in cfg.diacritic_ranges]
        if cfg.digit_ranges is not None:
            entry["digit_ranges"] = [r.to_hex() for r in cfg.digit_ranges]
        out[lang] = entry
    if registry.detection_scripts:
        out[DETECTION_KEY] = [
            {"name": d.name, "ranges": [r.to_hex() for r in d.ranges]}
            for d in registry.detection_scripts
        ]
    return yaml.safe_dump(out, sort_keys=False, allow_unicode=True)


_BUILTIN: ScriptRegistry | None = None


def builtin_registry() -> ScriptRegistry:
    """Registry shipped with the package (six languages, six detection scripts)."""
    global _BUILTIN
    if _BUILTIN is None:
        text = resources.files(__package__).joinpath("data/scripts.yaml").read_text("utf-8")
        _BUILTIN = parse_registry(text, source="scripts.yaml")
    return _BUILTIN


def load_registry(path: str | Path) -> ScriptRegistry:
    """Load ``path`` and merge its entries over the built-in registry."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scripts file {path}: {exc}") from None
    return builtin_registry().merged(parse_registry(text, source=str(path)))


def resolve_registry(path: str | Path | None) -> ScriptRegistry:
    return builtin_registry() if path is None else load_registry(path)
