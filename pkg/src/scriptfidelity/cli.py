"""Command-line entry point: ``sfr <subcommand> ...``.

Exit codes: 0 success, 1 validation or alert failure, 2 usage error,
3 input-format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace
from typing import Iterable, Sequence

from . import analysis
from .audit import AuditConfig, AuditError, AuditState, audit_step
from .corpus import (
    CorpusRecord,
    iter_jsonl_lines,
    load_fixture_matrix,
    read_jsonl,
    read_matrix_csv,
    write_matrix_csv,
)
from .evaluate import aggregate, build_matrix, evaluate_records
from .exceptions import ConfigError, InputFormatError, UnknownLanguageError
from .protocol import validate
from .published import compare_family_summary
from .rounding import fmt_pct
from .scripts import ScriptRegistry, resolve_registry
from .sfr import sfr_corpus, sfr_utterance
from .taxonomy import BUCKETS, LoopingParams, classify_dominant, looping_rate, taxonomy_table

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


class UsageError(Exception):
    pass


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _num(x: float | None, digits: int = 4) -> str:
    return "null" if x is None else f"{x:.{digits}f}"


def _csv_writer(out):
    return csv.writer(out, lineterminator="\n")


def _resolve_language(rec: CorpusRecord, lang: str | None, registry: ScriptRegistry) -> str:
    chosen = lang if lang is not None else rec.lang
    if chosen is None:
        raise UsageError(f"record {rec.id!r} has no 'lang'; pass --lang")
    if chosen not in registry:
        raise UnknownLanguageError(chosen, registry.configs)
    return chosen


def _load_records(paths: Sequence[str]) -> list[CorpusRecord]:
    records = []
    for p in paths:
        records.extend(read_jsonl(p))
    return records


# --- score ------------------------------------------------------------------


def cmd_score(args, registry: ScriptRegistry, out) -> int:
    records = _load_records(args.corpus)
    results = []
    by_lang: dict[str, list] = {}
    for rec in records:
        lang = _resolve_language(rec, args.lang, registry)
        res = sfr_utterance(rec.to_utterance(lang), registry[lang])
        results.append((rec, lang, res))
        by_lang.setdefault(lang, []).append(res)
    corpora = {lang: sfr_corpus(rs) for lang, rs in by_lang.items()}

    if args.format == "jsonl":
        for rec, lang, res in results:
            out.write(json.dumps({**res.to_dict(), "lang": lang}, ensure_ascii=False) + "\n")
        for lang, c in corpora.items():
            out.write(json.dumps({"corpus": {"lang": lang, **c.to_dict()}}) + "\n")
    elif args.format == "csv":
        w = _csv_writer(out)
        w.writerow(["id", "lang", "countable_chars", "target_chars", "sfr", "weighted_sfr"])
        for rec, lang, res in results:
            w.writerow([rec.id, lang, res.countable_chars, res.target_chars, _opt(res.sfr), ""])
        for lang, c in corpora.items():
            w.writerow(
                [f"corpus:{lang}", lang, c.countable_chars, c.target_chars,
                 _opt(c.mean_sfr), _opt(c.weighted_sfr)]
            )
    else:
        width = max([2] + [len(r.id) for r, _, _ in results])
        out.write(f"{'id':<{width}}  lang  countable  target     sfr\n")
        for rec, lang, res in results:
            out.write(
                f"{rec.id:<{width}}  {lang:<4}  {res.countable_chars:>9}  "
                f"{res.target_chars:>6}  {_num(res.sfr):>6}\n"
            )
        for lang, c in corpora.items():
            out.write(
                f"corpus[{lang}]: utterances={c.utterance_count} null={c.null_count} "
                f"mean_sfr={_num(c.mean_sfr)} weighted_sfr={_num(c.weighted_sfr)}\n"
            )
    for lang, c in corpora.items():
        if c.mean_sfr is None:
            _warn(f"corpus SFR for {lang!r} is null: no countable characters in any hypothesis")
    if not records:
        _warn("corpus is empty")
    return EXIT_OK


def _opt(x) -> str:
    return "" if x is None else repr(x)


# --- eval -------------------------------------------------------------------


def cmd_eval(args, registry: ScriptRegistry, out) -> int:
    records = _load_records(args.corpus)
    for rec in records:
        _resolve_language(rec, args.lang, registry)
    evals = evaluate_records(records, registry, args.lang)
    for e in evals:
        if e.note is not None and e.note != "no reference":
            _warn(e.note)
    missing = sum(1 for e in evals if e.note == "no reference")
    if missing:
        _warn(f"{missing} utterance(s) have no reference; WER/CER left empty")

    groups: dict[tuple[str | None, str], list] = {}
    for e in evals:
        groups.setdefault((e.record.model, e.language), []).append(e)

    if args.format == "jsonl":
        for e in evals:
            out.write(json.dumps(e.to_dict(), ensure_ascii=False) + "\n")
        for (model, lang), items in groups.items():
            agg = aggregate(items)
            out.write(
                json.dumps(
                    {"corpus": {"model": model, "lang": lang, **agg.sfr.to_dict(),
                                "wer": agg.wer, "cer": agg.cer}}
                )
                + "\n"
            )
    elif args.format == "csv":
        w = _csv_writer(out)
        w.writerow(["id", "model", "lang", "countable_chars", "target_chars", "sfr", "wer", "cer"])
        for e in evals:
            d = e.to_dict()
            w.writerow([d["id"], d["model"] or "", d["lang"], d["countable_chars"],
                        d["target_chars"], _opt(d["sfr"]), _opt(d["wer"]), _opt(d["cer"])])
        for (model, lang), items in groups.items():
            agg = aggregate(items)
            w.writerow([f"corpus:{model or ''}:{lang}", model or "", lang,
                        agg.sfr.countable_chars, agg.sfr.target_chars,
                        _opt(agg.sfr.mean_sfr), _opt(agg.wer), _opt(agg.cer)])
    else:
        width = max([2] + [len(e.record.id) for e in evals])
        out.write(f"{'id':<{width}}  lang     sfr      wer      cer\n")
        for e in evals:
            out.write(
                f"{e.record.id:<{width}}  {e.language:<4}  {_num(e.sfr.sfr):>6}  "
                f"{_num(e.wer):>7}  {_num(e.cer):>7}\n"
            )
        for (model, lang), items in groups.items():
            agg = aggregate(items)
            out.write(
                f"corpus[{model or '-'}/{lang}]: utterances={agg.sfr.utterance_count} "
                f"null={agg.sfr.null_count} mean_sfr={_num(agg.sfr.mean_sfr)} "
                f"weighted_sfr={_num(agg.sfr.weighted_sfr)} wer={_num(agg.wer)} "
                f"cer={_num(agg.cer)}\n"
            )
    if args.matrix_out:
        write_matrix_csv(build_matrix(evals), args.matrix_out)
    return EXIT_OK


# --- taxonomy ---------------------------------------------------------------


def cmd_taxonomy(args, registry: ScriptRegistry, out) -> int:
    if not 0 < args.dominance <= 1:
        raise UsageError("--dominance must be in (0, 1]")
    records = _load_records(args.corpus)
    looping = LoopingParams(args.loop_max_n, args.loop_coverage, args.loop_min_tokens)
    labels = []
    grouping = {}
    for i, rec in enumerate(records):
        lang = _resolve_language(rec, args.lang, registry)
        lab = classify_dominant(
            rec.to_utterance(lang), registry, registry[lang], args.dominance, looping
        )
        key = f"{i}:{rec.id}"
        labels.append(replace(lab, utterance_id=key))
        if args.group_by == "model":
            grouping[key] = rec.model or "unknown"
        elif args.group_by == "lang":
            grouping[key] = lang
        else:
            grouping[key] = "all"
    tables = taxonomy_table(labels, grouping)
    loops = {}
    for lab in labels:
        loops.setdefault(grouping[lab.utterance_id], []).append(lab)

    if args.labels_out:
        with open(args.labels_out, "w", encoding="utf-8") as fh:
            for rec, lab in zip(records, labels):
                fh.write(json.dumps({**lab.to_dict(), "id": rec.id}, ensure_ascii=False) + "\n")

    if args.format == "csv":
        w = _csv_writer(out)
        w.writerow(["group", "n"] + [b.value for b in BUCKETS]
                   + [f"{b.value}_pct" for b in BUCKETS] + ["looping_rate"])
        for t in tables:
            pct = t.percentages
            w.writerow([t.group_id, t.n] + [t.counts[b] for b in BUCKETS]
                       + [pct[b] for b in BUCKETS] + [_opt(looping_rate(loops[t.group_id]))])
        return EXIT_OK

    width = max([5] + [len(t.group_id) for t in tables])
    out.write(f"{'Group':<{width}}  {'Latin':>5}  {'Devang.':>7}  {'Target':>6}  "
              f"{'Other':>5}  {'n':>6}  {'looping':>7}\n")
    for t in tables:
        p = t.percentages
        rate = looping_rate(loops[t.group_id])
        out.write(
            f"{t.group_id:<{width}}  {p[BUCKETS[0]]:>5}  {p[BUCKETS[1]]:>7}  "
            f"{p[BUCKETS[2]]:>6}  {p[BUCKETS[3]]:>5}  {t.n:>6}  {100 * rate:>6.1f}%\n"
        )
    out.write("% of utterances by dominant output script; Other covers Arabic, Cyrillic,\n"
              "mixed-script and unclassified output. Rows may not sum to 100 (rounding).\n")
    return EXIT_OK


# --- report -----------------------------------------------------------------


def _parse_families(items: Iterable[str]) -> dict[str, str]:
    fams = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--family expects MODEL=FAMILY, got {item!r}")
        model, fam = item.split("=", 1)
        fams[model.strip()] = fam.strip()
    return fams


def cmd_report(args, registry: ScriptRegistry, out) -> int:
    sources = sum(bool(x) for x in (args.matrix, args.fixture, args.predictions))
    if sources != 1:
        raise UsageError("give exactly one of --matrix, --fixture or --predictions")
    if not 0 < args.threshold < 100:
        raise UsageError("--threshold must be in (0, 100)")
    if not 0 < args.gate < 1:
        raise UsageError("--gate must be in (0, 1)")
    if args.fixture:
        matrix = load_fixture_matrix()
    elif args.matrix:
        matrix = read_matrix_csv(args.matrix)
    else:
        records = _load_records(args.predictions)
        for rec in records:
            _resolve_language(rec, None, registry)
        matrix = build_matrix(evaluate_records(records, registry))

    report = analysis.gated_report(matrix, args.gate, args.threshold)
    if args.scatter:
        with open(args.scatter, "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(
                fh, ["model", "language", "wer", "sfr", "collapsed", "quadrant"],
                lineterminator="\n",
            )
            w.writeheader()
            for p in analysis.scatter_data(matrix, args.threshold, args.wer_split):
                w.writerow(p.to_row())

    if args.format == "csv":
        w = csv.DictWriter(
            out, ["model", "language", "sfr", "wer", "collapsed", "wer_meaningful"],
            lineterminator="\n",
        )
        w.writeheader()
        w.writerows(report.rows())
        return EXIT_OK

    out.write(report.render_text() + "\n\n")
    if not matrix.evaluated:
        out.write("no evaluated cells; collapse statistics unavailable\n")
        return EXIT_OK
    cr = analysis.classify_collapse(matrix, args.threshold)
    lo, hi = cr.wilson_ci
    out.write(
        f"collapsed (SFR < {args.threshold:g}%): {cr.n_collapsed} of {cr.n_evaluated} "
        f"evaluated ({100 * cr.proportion:.1f}%; 95% Wilson CI {100 * lo:.0f}-{100 * hi:.0f}%)\n"
    )
    if cr.gap is not None:
        out.write(
            f"gap: highest collapsed {fmt_pct(cr.gap[0])}%, lowest non-collapsed "
            f"{fmt_pct(cr.gap[1])}% ({fmt_pct(cr.gap_width)} points)\n"
        )
    b = cr.bimodality
    out.write(
        f"bimodality: {b['below']} below {analysis.BIMODAL_LOW:g}%, "
        f"{b['intermediate']} intermediate, {b['above']} above {analysis.BIMODAL_HIGH:g}%\n"
    )
    out.write(f"WER flagged below SFR gate {100 * args.gate:g}%: {len(report.flagged)} cells\n\n")

    fams = _parse_families(args.family)
    family_of = (lambda m: fams.get(m) or analysis.infer_family(m))
    rows = analysis.family_summary(matrix, family_of, args.threshold)
    width = max(len(r.family) for r in rows)
    out.write(f"{'Family':<{width}}  {'Mean':>6}  {'Median':>6}  Collapsed\n")
    for r in rows:
        out.write(
            f"{r.family:<{width}}  {fmt_pct(r.mean_sfr):>6}  {fmt_pct(r.median_sfr):>6}  "
            f"{r.collapsed} / {r.evaluated}\n"
        )
    if args.fixture:
        diffs = compare_family_summary(rows)
        if diffs:
            out.write("\ndiscrepancies against the published family summary:\n")
            for d in diffs:
                out.write(f"  {d.describe()}\n")
    return EXIT_OK


# --- audit ------------------------------------------------------------------


def cmd_audit(args, registry: ScriptRegistry, out, stdin=None) -> int:
    try:
        cfg = AuditConfig(args.window, args.threshold, args.min_fill)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stdin = stdin if stdin is not None else sys.stdin
    clock = None if args.no_timestamp else time.time
    state = AuditState()
    bad_lines = 0
    lineno = 0
    for line in iter(stdin.readline, ""):
        lineno += 1
        if not line.strip():
            continue
        try:
            (rec,) = iter_jsonl_lines([line], "<stdin>")
        except InputFormatError as exc:
            bad_lines += 1
            print(f"ERROR line {lineno}: {exc}", file=sys.stderr)
            continue
        lang = rec.lang if rec.lang is not None else args.lang
        _, event = audit_step(state, rec.to_utterance(lang), registry, cfg, clock)
        if event is None:
            continue
        if isinstance(event, AuditError):
            print(event.describe(), file=sys.stderr)
            continue
        out.write(json.dumps(event.to_dict()) + "\n")
        out.flush()
        print(event.describe(), file=sys.stderr)
    print(
        f"audit done: processed={state.processed} null={state.null_count} "
        f"alerts={state.alerts_fired} errors={state.errors + bad_lines}",
        file=sys.stderr,
    )
    if bad_lines:
        return EXIT_INPUT
    if args.fail_on_alert and state.alerts_fired:
        return EXIT_FAILURE
    return EXIT_OK


# --- validate ---------------------------------------------------------------


def cmd_validate(args, registry: ScriptRegistry, out) -> int:
    report = validate(registry, args.lang or None, args.pashto_predictions)
    out.write(report.render() + "\n")
    return EXIT_OK if report.passed else EXIT_FAILURE


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scripts", metavar="PATH", help="script config override file (YAML)")

    parser = argparse.ArgumentParser(
        prog="sfr", description="Script Fidelity Rate and ASR script-collapse analysis"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p, choices=("text", "csv", "jsonl")):
        p.add_argument("--format", choices=choices, default="text")

    p = sub.add_parser("score", parents=[common], help="per-utterance and corpus SFR")
    p.add_argument("corpus", nargs="+", help="corpus JSONL file(s)")
    p.add_argument("--lang", help="target language for every record (default: record 'lang')")
    fmt(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", parents=[common], help="SFR plus WER/CER against references")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--lang")
    p.add_argument("--matrix-out", metavar="PATH", help="also write a model x language matrix CSV")
    fmt(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("taxonomy", parents=[common], help="dominant output script table")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--lang")
    p.add_argument("--group-by", choices=("model", "lang", "none"), default="model")
    p.add_argument("--dominance", type=float, default=0.5,
                   help="minimum share for a dominant script (default 0.5)")
    p.add_argument("--loop-max-n", type=int, default=5)
    p.add_argument("--loop-coverage", type=float, default=0.5)
    p.add_argument("--loop-min-tokens", type=int, default=10)
    p.add_argument("--labels-out", metavar="PATH", help="write per-utterance labels as JSONL")
    fmt(p, ("text", "csv"))
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("report", parents=[common], help="collapse statistics and gated table")
    p.add_argument("--matrix", metavar="CSV", help="matrix CSV (model,language,sfr,wer)")
    p.add_argument("--fixture", action="store_true", help="use the bundled FLEURS matrix")
    p.add_argument("--predictions", nargs="+", metavar="JSONL",
                   help="assemble the matrix from per-utterance files")
    p.add_argument("--threshold", type=float, default=analysis.COLLAPSE_THRESHOLD,
                   help="collapse threshold in percent (default 10)")
    p.add_argument("--gate", type=float, default=analysis.DEFAULT_GATE,
                   help="SFR gate (fraction) below which WER is flagged (default 0.8)")
    p.add_argument("--wer-split", type=float, default=analysis.WER_SPLIT,
                   help="WER percent separating low/high quadrants (default 50)")
    p.add_argument("--scatter", metavar="PATH", help="write WER-vs-SFR scatter CSV")
    p.add_argument("--family", action="append", default=[], metavar="MODEL=FAMILY")
    fmt(p, ("text", "csv"))
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("audit", parents=[common], help="streaming audit of JSONL on stdin")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--min-fill", type=int, default=None,
                   help="non-null results needed before alerts arm (default: window)")
    p.add_argument("--lang", help="language for records without 'lang'")
    p.add_argument("--fail-on-alert", action="store_true")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("validate", parents=[common], help="check script configs on known samples")
    p.add_argument("--lang", action="append", help="restrict to language(s)")
    p.add_argument("--pashto-predictions", metavar="JSONL",
                   help="also require Whisper rows of this Pashto file to score < 1%% SFR")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = out if out is not None else sys.stdout
    try:
        registry = resolve_registry(args.scripts)
        return args.func(args, registry, out)
    except UsageError as exc:
        print(f"sfr {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownLanguageError as exc:
        print(f"sfr {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputFormatError, ConfigError) as exc:
        print(f"sfr {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
