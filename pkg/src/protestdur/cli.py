"""Command-line interface.

Exit codes: 0 success, 2 config error, 3 data error, 4 stage failure.
"""

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import corpus, pipeline, synthetic
from .errors import ConfigError, DataError, StageError

logger = logging.getLogger("protestdur")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_STAGE = 0, 2, 3, 4


def _add_columns(p):
    p.add_argument("--col-text", default="reason")
    p.add_argument("--col-start", default="start_date")
    p.add_argument("--col-end", default="end_date")
    p.add_argument("--col-id", default=None)
    p.add_argument("--date-format", default=None, help="strptime format; ISO-8601 when omitted")


def _schema(args):
    schema = {"text": args.col_text, "start": args.col_start, "end": args.col_end}
    if args.col_id:
        schema["id"] = args.col_id
    return schema


def _percent_table(values):
    counts = Counter(values)
    total = sum(counts.values())
    return [(k, n, round(100.0 * n / total, 2)) for k, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def _duration_bucket(days):
    return str(days) if days <= 4 else "5+"


def cmd_stats(args):
    records, dropped = corpus.ingest_csv(args.input, _schema(args), args.date_format)
    if not records:
        raise DataError("no usable rows")
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    tables = {}
    for name, col in (("province", args.col_province), ("issue", args.col_issue), ("state", args.col_state)):
        if not col:
            continue
        if col not in records[0].extra:
            logger.warning("column '%s' not found; skipping the %s table", col, name)
            continue
        tables[name] = _percent_table(r.extra.get(col, "") or "(missing)" for r in records)
    order = ["0", "1", "2", "3", "4", "5+"]
    dur = Counter(_duration_bucket(corpus.duration_days(r).days) for r in records)
    tables["duration"] = [(b, dur[b], round(100.0 * dur[b] / len(records), 2)) for b in order if dur[b]]

    print(f"records: {len(records)}  dropped: {dropped}")
    for name, rows in tables.items():
        print(f"\n{name}")
        width = max(len(str(k)) for k, _, _ in rows)
        for k, n, pct in rows:
            print(f"  {str(k).ljust(width)}  {n:6d}  {pct:6.2f}%")
        if out:
            with open(out / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([name, "count", "percent"])
                w.writerows(rows)
    return EXIT_OK


def cmd_export_wordfreq(args):
    records, _ = corpus.ingest_csv(args.input, _schema(args), args.date_format)
    stop = corpus.load_stopwords(args.stopwords) if args.stopwords else corpus.smart_stopwords()
    cfg = corpus.PreprocessConfig(stopword_list=stop, min_token_length=args.min_token_length)
    docs = [corpus.preprocess(r.text, cfg) for r in records]
    freq = corpus.word_frequencies(docs, args.min_count, args.top)
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["token", "count"])
        w.writerows(freq)
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def cmd_pipeline(args):
    overrides = list(args.set or [])
    if args.paper_order:
        overrides.append("paper_order=true")
    if args.jobs is not None:
        overrides.append(f"jobs={args.jobs}")
    if args.iterations is not None:
        overrides.append(f"iterations={args.iterations}")
    if args.folds is not None:
        overrides.append(f"sweep_folds={args.folds}")
    cfg = pipeline.load_config(args.config, overrides)
    metrics = pipeline.run_pipeline(cfg, args.out)
    print((Path(args.out) / "metrics.txt").read_text(encoding="utf-8"), end="")
    print(f"selected K: {metrics['selected_k']}  run directory: {args.out}")
    return EXIT_OK


def cmd_predict(args):
    res = pipeline.predict_text(args.run_dir, args.text, args.learner)
    vote = "n/a" if res["vote_fraction"] is None else f"{res['vote_fraction']:.2f}"
    flag = "  [uninformative input]" if res["uninformative_input"] else ""
    print(f"{res['class']} (vote {vote}); topics: {', '.join(res['top_topic_names'])}{flag}")
    print(json.dumps(res, indent=2))
    return EXIT_OK


def cmd_generate(args):
    synthetic.protest_csv(args.out, args.rows, args.incomplete, args.seed)
    print(f"wrote {args.rows} rows to {args.out}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="protestdur", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", help="percentage tables by province, issue, state and duration")
    s.add_argument("input")
    _add_columns(s)
    s.add_argument("--col-province", default="province")
    s.add_argument("--col-issue", default="issue")
    s.add_argument("--col-state", default="state")
    s.add_argument("--out", help="directory for the CSV tables")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("export-wordfreq", help="stemmed token frequencies for a word cloud")
    s.add_argument("input")
    _add_columns(s)
    s.add_argument("--min-count", type=int, default=25)
    s.add_argument("--top", type=int, default=75)
    s.add_argument("--min-token-length", type=int, default=3)
    s.add_argument("--stopwords", help="file with one stopword per line (replaces the built-in list)")
    s.add_argument("--out", help="output CSV (stdout when omitted)")
    s.set_defaults(func=cmd_export_wordfreq)

    s = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    s.add_argument("config")
    s.add_argument("--out", required=True, help="run directory")
    s.add_argument("--paper-order", action="store_true", help="balance before splitting")
    s.add_argument("--jobs", type=int)
    s.add_argument("--iterations", type=int, help="Gibbs sweeps for every LDA fit")
    s.add_argument("--folds", type=int, help="folds for the topic-count sweep")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("predict", help="predict the duration class of a free-text description")
    s.add_argument("run_dir")
    s.add_argument("text")
    s.add_argument("--learner", choices=pipeline.LEARNERS)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("generate", help="write a synthetic protest CSV")
    s.add_argument("out")
    s.add_argument("--rows", type=int, default=876)
    s.add_argument("--incomplete", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_generate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
