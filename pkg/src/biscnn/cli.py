"""Command-line entry point: ``biscnn {train,tag,eval,ablate,analyze}``.

Exit status: 0 success, 2 usage/configuration error, 3 input parse error,
4 any other runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import ablation, analysis
from .config import RunConfig
from .corpus import load_conll
from .errors import BiscnnError, ConfigError, EmptyCorpusError, ParseError
from .eval import evaluate_file, f1_score, format_tagged, split_label
from .model import SeqCNN
from .trainer import train_final

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("biscnn")


class UsageError(BiscnnError):
    pass


def _add_run_options(p):
    p.add_argument("--config", help="INI file overriding the built-in defaults")
    p.add_argument("--data", help="training corpus (two-column BIO file)")
    p.add_argument("--test", help="test corpus scored after training")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--loss", choices=["hinge", "ranking"])
    p.add_argument("--variant", choices=["past", "future", "bi-add", "bi-concat", "baseline"])
    p.add_argument("--context-length", type=int, dest="context_length")
    p.add_argument("--surrounding", type=int, help="surrounding context; -1 drops the current word")
    p.add_argument("--gamma", type=float)
    p.add_argument("--m-plus", type=float, dest="m_plus")
    p.add_argument("--m-minus", type=float, dest="m_minus")
    p.add_argument("--epochs", type=int, help="total epochs")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config key, e.g. --set model.s=20")


def run_config(args) -> RunConfig:
    overrides = {
        "paths.data": args.data, "paths.test": args.test, "paths.out": args.out,
        "train.seed": args.seed, "loss.kind": args.loss, "model.variant": args.variant,
        "model.n": args.context_length, "model.cs": args.surrounding, "loss.gamma": args.gamma,
        "loss.m_plus": args.m_plus, "loss.m_minus": args.m_minus, "train.epochs_total": args.epochs,
    }
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value
    if args.epochs is not None and "train.epochs_constant_lr" not in overrides:
        # keep the schedule valid when only the total is shortened
        base = RunConfig.load(args.config, {k: v for k, v in overrides.items() if k != "train.epochs_total"})
        overrides["train.epochs_constant_lr"] = min(base.train.epochs_constant_lr, args.epochs)
    return RunConfig.load(args.config, overrides)


def _require(value, flag):
    if not value:
        raise UsageError(f"{flag} is required")
    return value


def cmd_train(args):
    cfg = run_config(args)
    train_path = _require(cfg.data, "--data")
    corpus = load_conll(train_path)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
    model, report = train_final(corpus, cfg.hp, cfg.train, checkpoint=out / "model.ckpt")
    report.write_csv(out / "train_log.csv")
    print(f"checkpoint: {out / 'model.ckpt'}")
    if cfg.test:
        test = load_conll(cfg.test)
        words = [list(s.words) for s in test]
        gold = [list(s.labels) for s in test]
        pred = [model.tag(w) for w in words]
        (out / "test_tagged.txt").write_text(format_tagged(words, gold, pred), encoding="utf-8")
        print(f1_score(gold, pred).conlleval_text(), end="")
    return EXIT_OK


def _read_tag_input(path):
    """Sentences of ``(words, gold_or_None)``; one column means no gold labels."""
    sentences, words, gold = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            fields = raw.split()
            if not fields:
                if words:
                    sentences.append((words, gold))
                    words, gold = [], []
                continue
            words.append(fields[0])
            if len(fields) > 1:
                try:
                    split_label(fields[-1])
                except ParseError as exc:
                    raise ParseError(f"{path}: {exc}", lineno) from None
                gold.append(fields[-1])
            if gold and len(gold) != len(words):
                raise ParseError(f"{path}: mixed labelled and unlabelled lines", lineno)
    if words:
        sentences.append((words, gold))
    return sentences


def cmd_tag(args):
    model = SeqCNN.load(_require(args.checkpoint, "--checkpoint"))
    sentences = _read_tag_input(_require(args.data, "--data"))
    unknown = sorted({g for _, gold in sentences for g in gold if g not in model.labels})
    if unknown:
        msg = f"{len(unknown)} gold label(s) unknown to the checkpoint: {', '.join(unknown[:5])}"
        if args.strict:
            raise UsageError(msg)
        log.warning(msg)
    lines = []
    for words, gold in sentences:
        pred = model.tag(words)
        if gold:
            lines.extend(f"{w} {g} {p}\n" for w, g, p in zip(words, gold, pred))
        else:
            lines.extend(f"{w} {p}\n" for w, p in zip(words, pred))
        lines.append("\n")
    text = "".join(lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args):
    report = evaluate_file(args.tagged)
    print(report.conlleval_text(), end="")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_ablate(args):
    cfg = run_config(args)
    train_corpus = load_conll(_require(cfg.data, "--data"))
    test_corpus = load_conll(_require(cfg.test, "--test"))
    values = [int(v) for v in args.values.split(",")] if args.values else None
    cells = ablation.run(args.dimension, train_corpus, test_corpus, cfg.hp, cfg.train, values)
    table = ablation.format_table(cells)
    print(table, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"ablation_{args.dimension}.txt").write_text(table, encoding="utf-8")
    return EXIT_OK


def cmd_analyze(args):
    model = SeqCNN.load(_require(args.checkpoint, "--checkpoint"))
    corpus = load_conll(_require(args.data, "--data"))
    if args.slots:
        slots = [s.strip() for s in args.slots.split(",") if s.strip()]
        known = analysis.slot_types(corpus)
        missing = [s for s in slots if s not in known]
        if missing:
            raise UsageError(f"slot(s) not present in {args.data}: {', '.join(missing)}")
    else:
        slots = analysis.most_frequent_slots(corpus, 4)
    rows = []
    for slot in slots:
        rows.extend(analysis.rank_ngrams(model, corpus, slot, args.k))
    text = analysis.attributions_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="biscnn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    _add_run_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="label a corpus with a trained model")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="one- or two-column input file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--strict", action="store_true", help="fail on gold labels the model has never seen")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="chunk P/R/F1 of a three-column tagged file")
    p.add_argument("tagged")
    p.add_argument("--csv", help="also write a CSV report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="train and score one sweep of model variants")
    _add_run_options(p)
    p.add_argument("--dimension", required=True, choices=ablation.DIMENSIONS)
    p.add_argument("--values", help="comma-separated sweep values (context-length / surrounding)")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("analyze", help="most important n-grams per slot")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="evaluated corpus (two-column)")
    p.add_argument("--slots", help="comma-separated slot types (default: four most frequent)")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--out", help="CSV output file (default: stdout)")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * args.verbose
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"biscnn {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, EmptyCorpusError) as exc:
        print(f"biscnn {args.command}: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BiscnnError, OSError) as exc:
        print(f"biscnn {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
