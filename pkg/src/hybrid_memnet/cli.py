"""Command-line front end: ``prep``, ``train``, ``summarize`` and ``evaluate``.

Every command writes a ``manifest.json`` next to its outputs recording the
argv, resolved configuration, seed, inputs and timestamps, so a run can be
repeated from the manifest alone.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import ENCODER_MODES, TrainConfig
from .errors import CompatibilityError, HybridMemNetError, UsageError
from .evaluation import (
    RougeOptions,
    Summary,
    evaluate_corpus,
    format_table,
    lead_baseline,
    summarize_corpus,
)
from .model import load_model
from .text import Vocabulary, build_vocab, label_corpus, load_corpus, save_corpus
from .training import train

log = logging.getLogger("hybrid_memnet")

PROG = "hybrid-memnet"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: dict
    seed: int | None
    inputs: dict[str, str | None]
    checkpoint: str | None = None
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    cwd: str = field(default_factory=os.getcwd)
    started: str = field(default_factory=_now)
    finished: str | None = None

    def write(self, out_dir: Path) -> Path:
        self.finished = _now()
        path = out_dir / "manifest.json"
        write_atomic(path, json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")
        return path


# ---------------------------------------------------------------- arguments


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _optional_int(text: str) -> int | None:
    return None if text.lower() in ("none", "off") else int(text)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    """One flag per TrainConfig field; unset flags leave the config value alone."""
    group = parser.add_argument_group("model and training configuration", argument_default=argparse.SUPPRESS)
    for f in dataclasses.fields(TrainConfig):
        if f.name == "seed":
            continue
        if f.name == "encoder_mode":
            group.add_argument("--encoder-mode", "--encoder", dest=f.name, choices=ENCODER_MODES)
        elif f.name == "use_memnet":
            group.add_argument(_flag(f.name), dest=f.name, action=argparse.BooleanOptionalAction)
        elif f.name == "kernel_widths":
            group.add_argument(_flag(f.name), dest=f.name, type=int, nargs="+")
        elif f.name == "patience":
            group.add_argument(_flag(f.name), dest=f.name, type=_optional_int, help="int or 'none'")
        else:
            kind = float if isinstance(f.default, float) else int
            group.add_argument(_flag(f.name), dest=f.name, type=kind)


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file of TrainConfig fields")
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="derive extraction labels and a vocabulary")
    p.add_argument("corpus", type=Path)
    p.add_argument("--split", default="train")
    _add_shared(p)

    p = sub.add_parser("train", help="fit a model on a labelled corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--valid", type=Path, help="labelled validation corpus")
    p.add_argument("--vocab", type=Path, help="vocabulary file from prep (built from the corpus otherwise)")
    _add_shared(p)
    _add_config_flags(p)

    p = sub.add_parser("summarize", help="extract summaries with a trained model")
    p.add_argument("corpus", type=Path)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--vocab", type=Path, help="must match the checkpoint's vocabulary")
    p.add_argument("--batch-size", type=int, default=20)
    _add_shared(p)

    p = sub.add_parser("evaluate", help="ROUGE table for LEAD, a checkpoint or a summaries file")
    p.add_argument("corpus", type=Path)
    p.add_argument("--system", choices=("lead",), action="append", default=[])
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--summaries", type=Path, help="summaries.jsonl written by summarize")
    p.add_argument("--name", default="hybrid-memnet", help="row label for the checkpoint or summaries")
    p.add_argument("--stem", action="store_true")
    p.add_argument("--remove-stopwords", action="store_true")
    p.add_argument("--measure", choices=("recall", "precision", "f1"), default="f1")
    _add_shared(p)
    return parser


def resolve_config(args: argparse.Namespace) -> TrainConfig:
    config = TrainConfig.load(args.config) if args.config else TrainConfig()
    given = vars(args)
    changes = {f.name: given[f.name] for f in dataclasses.fields(TrainConfig) if f.name in given and f.name != "seed"}
    if args.seed is not None:
        changes["seed"] = args.seed
    return config.replace(**changes)


# ---------------------------------------------------------------- commands


def cmd_prep(args) -> RunManifest:
    corpus = load_corpus(args.corpus, args.split)
    config = resolve_config(args)
    labeled = label_corpus(corpus)
    vocab = build_vocab(labeled, config.max_vocab)
    args.out.mkdir(parents=True, exist_ok=True)
    save_corpus(labeled, args.out / "labeled.jsonl")
    vocab.save(args.out / "vocab.json")
    positives = [sum(d.labels) for d in labeled]
    print(f"documents\t{len(labeled)}")
    print(f"sentences\t{sum(len(d) for d in labeled)}")
    print(f"mean positives/doc\t{sum(positives) / len(positives):.3f}")
    print(f"vocabulary\t{len(vocab)}")
    return RunManifest(
        "prep",
        args._argv,
        config.to_dict(),
        config.seed,
        {"corpus": str(args.corpus)},
        outputs=["labeled.jsonl", "vocab.json"],
    )


def cmd_train(args) -> RunManifest:
    config = resolve_config(args)
    corpus = load_corpus(args.corpus, "train")
    valid = load_corpus(args.valid, "valid") if args.valid else None
    vocab = Vocabulary.load(args.vocab) if args.vocab else build_vocab(corpus, config.max_vocab)
    args.out.mkdir(parents=True, exist_ok=True)
    checkpoint = args.out / "checkpoint.npz"
    report = train(corpus, config, vocab, valid=valid, checkpoint_path=checkpoint)
    config.save(args.out / "config.json")
    write_atomic(args.out / "report.json", json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    last = report.epochs[-1]
    print(f"epochs\t{len(report.epochs)}")
    print(f"final train loss\t{last.train_loss:.6f}")
    if report.best_valid_loss is not None:
        print(f"best valid loss\t{report.best_valid_loss:.6f} (epoch {report.best_epoch})")
    print(f"checkpoint\t{checkpoint}")
    return RunManifest(
        "train",
        args._argv,
        config.to_dict(),
        config.seed,
        {"corpus": str(args.corpus), "valid": str(args.valid) if args.valid else None, "vocab": _opt(args.vocab)},
        checkpoint=str(checkpoint),
        outputs=["checkpoint.npz", "config.json", "report.json"],
    )


def _opt(path) -> str | None:
    return str(path) if path else None


def _load_checked(checkpoint: Path, vocab_path: Path | None):
    params, vocab, meta = load_model(checkpoint)
    if vocab_path is not None:
        given = Vocabulary.load(vocab_path)
        if given.content_hash != meta["vocab_hash"]:
            raise CompatibilityError(
                f"vocabulary {vocab_path} (hash {given.content_hash[:12]}) does not match "
                f"checkpoint {checkpoint} (hash {meta['vocab_hash'][:12]})"
            )
    return params, vocab


def _summary_lines(corpus, summaries: dict[str, Summary]) -> str:
    return "".join(json.dumps(summaries[d.id].to_record(d.id), ensure_ascii=False) + "\n" for d in corpus)


def cmd_summarize(args) -> RunManifest:
    params, vocab = _load_checked(args.checkpoint, args.vocab)
    corpus = load_corpus(args.corpus, "test")
    summaries = summarize_corpus(params, vocab, corpus, args.batch_size)
    write_atomic(args.out / "summaries.jsonl", _summary_lines(corpus, summaries))
    print(f"summaries\t{len(summaries)}\t{args.out / 'summaries.jsonl'}")
    return RunManifest(
        "summarize",
        args._argv,
        params.config.to_dict(),
        params.config.seed,
        {"corpus": str(args.corpus), "vocab": _opt(args.vocab)},
        checkpoint=str(args.checkpoint),
        outputs=["summaries.jsonl"],
    )


def read_summaries(path: Path) -> dict[str, Summary]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[rec["id"]] = Summary(tuple(rec["indices"]), rec["text"], len(rec["text"].split()))
            except (ValueError, KeyError, TypeError) as exc:
                raise UsageError(f"{path}: line {lineno}: bad summary record ({exc})") from None
    return out


def cmd_evaluate(args) -> RunManifest:
    if not (args.system or args.checkpoint or args.summaries):
        raise UsageError("choose at least one of --system lead, --checkpoint, --summaries")
    config = resolve_config(args)
    corpus = load_corpus(args.corpus, "test")
    options = RougeOptions(args.stem, args.remove_stopwords, args.measure)
    evaluations = []
    if "lead" in args.system:
        lead = lambda doc: lead_baseline(doc, config.summary_sentences, config.summary_words)  # noqa: E731
        evaluations.append(evaluate_corpus(corpus, lead, "LEAD", options))
    if args.checkpoint:
        params, vocab = load_model(args.checkpoint)[:2]
        evaluations.append(evaluate_corpus(corpus, summarize_corpus(params, vocab, corpus), args.name, options))
    if args.summaries:
        evaluations.append(evaluate_corpus(corpus, read_summaries(args.summaries), args.name, options))
    table = format_table(evaluations)
    sys.stdout.write(table)
    write_atomic(args.out / "table.tsv", table)
    records = [json.dumps(r, sort_keys=True) + "\n" for e in evaluations for r in e.records()]
    write_atomic(args.out / "scores.jsonl", "".join(records))
    return RunManifest(
        "evaluate",
        args._argv,
        config.to_dict(),
        config.seed,
        {"corpus": str(args.corpus), "summaries": _opt(args.summaries)},
        checkpoint=_opt(args.checkpoint),
        outputs=["table.tsv", "scores.jsonl"],
    )


COMMANDS = {"prep": cmd_prep, "train": cmd_train, "summarize": cmd_summarize, "evaluate": cmd_evaluate}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args._argv = argv
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        manifest = COMMANDS[args.command](args)
        manifest.write(args.out)
    except (HybridMemNetError, OSError) as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
