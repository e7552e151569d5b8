"""Reading and writing corpora (JSONL) and evaluation matrices (CSV).

Corpus lines are JSON objects with the fields ``id``, ``lang``,
``hypothesis``, ``reference`` and ``model``; only ``hypothesis`` is
required. Any other field is carried through untouched. Text is never
normalized on read.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .analysis import EvalCell, EvalMatrix
from .exceptions import InputFormatError
from .sfr import Utterance

KNOWN_FIELDS = ("id", "lang", "hypothesis", "reference", "model")
MATRIX_HEADER = ["model", "language", "sfr", "wer"]


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    hypothesis: str
    lang: str | None = None
    reference: str | None = None
    model: str | None = None
    extra: dict = field(default_factory=dict)

    def to_utterance(self, language: str | None = None) -> Utterance:
        return Utterance(
            id=self.id,
            language_id=language if language is not None else self.lang,
            hypothesis=self.hypothesis,
            reference=self.reference,
            model_id=self.model,
            extra=self.extra,
        )

    def to_json(self) -> dict:
        out = {"id": self.id}
        if self.lang is not None:
            out["lang"] = self.lang
        out["hypothesis"] = self.hypothesis
        if self.reference is not None:
            out["reference"] = self.reference
        if self.model is not None:
            out["model"] = self.model
        out.update(self.extra)
        return out

    @property
    def sfr(self):
        """Precomputed SFR from an imported prediction file, if any."""
        return self.extra.get("sfr")

    @property
    def wer(self):
        return self.extra.get("wer")


def _optional_str(obj: dict, key: str, where: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise InputFormatError(f"{where}: field {key!r} must be a string")
    return value


def parse_record(line: str, lineno: int, source: str = "<stream>") -> CorpusRecord:
    where = f"{source}:{lineno}"
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{where}: malformed JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise InputFormatError(f"{where}: expected a JSON object")
    rid = obj.get("id")
    if rid is None:
        rid = f"line-{lineno}"
    elif not isinstance(rid, (str, int)) or isinstance(rid, bool) or str(rid) == "":
        raise InputFormatError(f"{where}: field 'id' must be a non-empty string")
    rid = str(rid)
    if "hypothesis" not in obj:
        raise InputFormatError(f"{where}: record {rid!r} has no 'hypothesis'")
    hyp = obj["hypothesis"]
    if hyp is None:
        hyp = ""
    if not isinstance(hyp, str):
        raise InputFormatError(f"{where}: record {rid!r}: 'hypothesis' must be a string")
    return CorpusRecord(
        id=rid,
        hypothesis=hyp,
        lang=_optional_str(obj, "lang", where),
        reference=_optional_str(obj, "reference", where),
        model=_optional_str(obj, "model", where),
        extra={k: v for k, v in obj.items() if k not in KNOWN_FIELDS},
    )


def iter_jsonl_lines(lines: Iterable[str], source: str = "<stream>") -> Iterator[CorpusRecord]:
    """Parse decoded lines lazily (used by the streaming audit)."""
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        yield parse_record(line, lineno, source)


def _decoded_lines(data: bytes, source: str) -> Iterator[str]:
    offset = 0
    for raw in data.splitlines(keepends=True):
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputFormatError(
                f"{source}: invalid UTF-8 at byte offset {offset + exc.start}"
            ) from None
        offset += len(raw)


def read_jsonl(path: str | Path) -> list[CorpusRecord]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from None
    if data.startswith(b"\xef\xbb\xbf"):
        data = data[3:]
    records = list(iter_jsonl_lines(_decoded_lines(data, str(path)), str(path)))
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise InputFormatError(f"{path}: duplicate utterance id {rec.id!r}")
        seen.add(rec.id)
    return records


def write_jsonl(records: Iterable[CorpusRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


# --- matrix CSV -------------------------------------------------------------


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def write_matrix_csv(m: EvalMatrix, path: str | Path | IO[str]) -> None:
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MATRIX_HEADER)
        for c in m.cells:
            w.writerow([c.model_id, c.language_id, _fmt(c.sfr_percent), _fmt(c.wer_percent)])

    if hasattr(path, "write"):
        _write(path)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            _write(fh)


def _parse_float(text: str, where: str, name: str) -> float | None:
    text = text.strip()
    if text in ("", "---"):
        return None
    try:
        return float(text)
    except ValueError:
        raise InputFormatError(f"{where}: {name} value {text!r} is not a number") from None


def parse_matrix_csv(text: str, source: str = "<string>") -> EvalMatrix:
    lines = text.splitlines()
    start = 0
    while start < len(lines) and (lines[start].startswith("#") or not lines[start].strip()):
        start += 1
    reader = csv.reader(io.StringIO("\n".join(lines[start:])))
    try:
        header = next(reader)
    except StopIteration:
        raise InputFormatError(f"{source}: missing header {','.join(MATRIX_HEADER)}") from None
    if [h.strip() for h in header] != MATRIX_HEADER:
        raise InputFormatError(
            f"{source}:{start + 1}: header must be {','.join(MATRIX_HEADER)}, got {header}"
        )
    cells = []
    seen = set()
    for offset, row in enumerate(reader, start=start + 2):
        if not row or not any(x.strip() for x in row):
            continue
        where = f"{source}:{offset}"
        if len(row) != 4:
            raise InputFormatError(f"{where}: expected 4 fields, got {len(row)}")
        model, lang = row[0].strip(), row[1].strip()
        if (model, lang) in seen:
            raise InputFormatError(f"{where}: duplicate row for {model}/{lang}")
        seen.add((model, lang))
        try:
            cells.append(
                EvalCell(
                    model,
                    lang,
                    _parse_float(row[2], where, "sfr"),
                    _parse_float(row[3], where, "wer"),
                )
            )
        except ValueError as exc:
            if isinstance(exc, InputFormatError):
                raise
            raise InputFormatError(f"{where}: {exc}") from None
    return EvalMatrix(tuple(cells))


def read_matrix_csv(path: str | Path) -> EvalMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from None
    return parse_matrix_csv(text, str(path))


def load_fixture_matrix() -> EvalMatrix:
    """Published FLEURS SFR/WER matrix (9 models x 6 languages)."""
    text = resources.files(__package__).joinpath("data/fleurs_matrix.csv").read_text("utf-8")
    return parse_matrix_csv(text, "fleurs_matrix.csv")
