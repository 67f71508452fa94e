"""Command-line entry point.

Subcommands: synth, complexity, train, train-biased, retrieve,
evaluate, compare. Every flag can also be supplied through an optional
``key=value`` config file (``--config``); explicit flags win. Exit
codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import complexity as cx
from . import corpus as cp
from . import encoder as enc
from . import evaluation as ev
from . import retrieval as rt
from . import synthetic as syn
from . import training as tr


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want exit 1
        raise UsageError(message)


_UNSET = object()


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable = str
    default: object = None
    required: bool = False
    flag: bool = False
    choices: tuple = ()
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_TRAIN_COMMON = (
    Opt("corpus", required=True, help="corpus.jsonl path"),
    Opt("queries", required=True, help="queries.jsonl path"),
    Opt("qrels", required=True, help="training qrels tsv"),
    Opt("out", required=True, help="output directory"),
    Opt("seed", int, 0),
    Opt("learning-rate", float, 0.05),
    Opt("epochs", int, 20),
    Opt("negatives", int, 7),
    Opt("weight-decay", float, 0.0),
    Opt("beta1", float, 0.9),
    Opt("beta2", float, 0.999),
    Opt("eps", float, 1e-8),
    Opt("dim", int, 32),
    Opt("min-count", int, 1),
)

_COMMANDS: dict[str, tuple[Opt, ...]] = {
    "synth": (
        Opt("seed", int, 1),
        Opt("n-queries", int, 300),
        Opt("train-fraction", float, 2.0 / 3.0),
        Opt("out", required=True),
    ),
    "complexity": (
        Opt("queries", required=True),
        Opt("out", required=True),
        Opt("threads", int, 1),
    ),
    "train": _TRAIN_COMMON
    + (
        Opt("debias", flag=True, default=False, help="train against a biased model"),
        Opt("biased-model", help="frozen biased checkpoint (required with --debias)"),
        Opt("alpha", float, 0.1),
    ),
    "train-biased": _TRAIN_COMMON
    + (
        Opt("strategy", required=True, choices=tr.BIAS_STRATEGIES),
        Opt("data-fraction", float, 0.2),
        Opt("epoch-fraction", float, 0.2),
        Opt("weak-dim", int),
        Opt("repetitions", int, 1),
    ),
    "retrieve": (
        Opt("method", required=True, choices=("bm25", "dense")),
        Opt("corpus", required=True),
        Opt("queries", required=True),
        Opt("out", required=True),
        Opt("model", help="checkpoint path (dense only)"),
        Opt("top-k", int, 100),
        Opt("k1", float, 1.2),
        Opt("b", float, 0.75),
        Opt("threads", int, 1),
    ),
    "evaluate": (
        Opt("run", required=True),
        Opt("qrels", required=True),
        Opt("queries", required=True),
        Opt("out", required=True),
        Opt("k", int, 10),
        Opt("buckets", int, 10),
        Opt("threads", int, 1),
    ),
    "compare": (
        Opt("run-a", required=True),
        Opt("run-b", required=True),
        Opt("qrels", required=True),
        Opt("resamples", int, 10_000),
        Opt("seed", int, 0),
        Opt("m", int, 1),
        Opt("k", int, 10),
    ),
}


def load_config(path) -> dict[str, str]:
    """key=value lines; blank lines and #-comments are ignored."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _merge_options(args: argparse.Namespace, opts: tuple[Opt, ...]) -> argparse.Namespace:
    by_name = {o.name: o for o in opts}
    config_values: dict[str, str] = {}
    if args.config is not None:
        config_values = load_config(args.config)
        for key in config_values:
            if key not in by_name:
                raise UsageError(f"unknown key {key}")
    merged = argparse.Namespace()
    for opt in opts:
        value = getattr(args, opt.dest)
        if value is _UNSET:
            if opt.name in config_values:
                raw = config_values[opt.name]
                try:
                    value = _parse_bool(raw) if opt.flag else opt.type(raw)
                except ValueError as exc:
                    raise UsageError(f"bad value for {opt.name}: {exc}") from exc
                if opt.choices and value not in opt.choices:
                    raise UsageError(
                        f"{opt.name} must be one of {', '.join(map(str, opt.choices))}"
                    )
            else:
                value = opt.default
        if opt.required and value is None:
            raise UsageError(f"missing required option --{opt.name}")
        setattr(merged, opt.dest, value)
    return merged


def _build_parser() -> _Parser:
    parser = _Parser(prog="eqir", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, opts in _COMMANDS.items():
        p = sub.add_parser(name, help=name)
        p.add_argument("--config", default=None, help="key=value config file")
        for opt in opts:
            if opt.flag:
                p.add_argument(f"--{opt.name}", dest=opt.dest, action="store_true", default=_UNSET)
            else:
                kwargs = {"dest": opt.dest, "type": opt.type, "default": _UNSET}
                if opt.choices:
                    kwargs["choices"] = list(opt.choices)
                if opt.help:
                    kwargs["help"] = opt.help
                p.add_argument(f"--{opt.name}", **kwargs)
    return parser


def _train_config(ns) -> tr.TrainConfig:
    try:
        return tr.TrainConfig(
            learning_rate=ns.learning_rate,
            epochs=ns.epochs,
            n_negatives=ns.negatives,
            seed=ns.seed,
            weight_decay=ns.weight_decay,
            beta1=ns.beta1,
            beta2=ns.beta2,
            eps=ns.eps,
            dim=ns.dim,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_training_data(ns):
    corpus = cp.load_corpus(ns.corpus)
    queries = cp.load_queries(ns.queries)
    qrels = cp.load_qrels(ns.qrels)
    return corpus, queries, qrels


def _save_model(result: tr.TrainResult, vocab, ns, name: str, extra: dict) -> Path:
    out = Path(ns.out)
    ckpt = out / "checkpoints" / f"{name}.bin"
    enc.save_checkpoint(result.params, vocab, ckpt)
    digest = enc.checkpoint_digest(ckpt)
    entries = {
        "seed": ns.seed,
        "learning_rate": ns.learning_rate,
        "epochs": ns.epochs,
        "negatives": ns.negatives,
        "weight_decay": ns.weight_decay,
        "beta1": ns.beta1,
        "beta2": ns.beta2,
        "eps": ns.eps,
        "dim": ns.dim,
        "corpus": ns.corpus,
        "queries": ns.queries,
        "qrels": ns.qrels,
        **extra,
        "checkpoint_digest": digest,
    }
    tr.write_manifest(str(ckpt) + ".manifest", entries)
    final_loss = result.epoch_losses[-1] if result.epoch_losses else float("nan")
    print(f"checkpoint={ckpt} digest={digest[:12]} final_epoch_loss={final_loss:.6f}")
    return ckpt


def _cmd_synth(ns) -> int:
    spec = syn.SyntheticSpec(train_fraction=ns.train_fraction)
    try:
        data = syn.generate_synthetic_biased(ns.seed, ns.n_queries, spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc in data.corpus:
            fh.write(json.dumps({"_id": doc.id, "title": doc.title, "text": doc.text}) + "\n")
    with open(out / "queries.jsonl", "w", encoding="utf-8") as fh:
        for q in data.queries:
            fh.write(json.dumps({"_id": q.id, "text": q.text}) + "\n")
    qrels_dir = out / "qrels"
    qrels_dir.mkdir(exist_ok=True)
    for split_name, qids in (
        ("train", data.split.train_query_ids),
        ("test", data.split.test_query_ids),
    ):
        with open(qrels_dir / f"{split_name}.tsv", "w", encoding="utf-8") as fh:
            fh.write("query-id\tcorpus-id\tscore\n")
            wanted = set(qids)
            for (qid, did), grade in sorted(data.qrels.judgments.items()):
                if qid in wanted:
                    fh.write(f"{qid}\t{did}\t{grade}\n")
    print(
        f"wrote {len(data.corpus)} docs, {len(data.queries)} queries "
        f"({len(data.split.train_query_ids)} train / {len(data.split.test_query_ids)} test) to {out}"
    )
    return 0


def _cmd_complexity(ns) -> int:
    queries = cp.load_queries(ns.queries)
    profiles = cx.aggregate_scores(
        [q.id for q in queries], [q.text for q in queries], threads=ns.threads
    )
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "complexity.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("query_id\tscore\t" + "\t".join(cx.INDEX_ORDER) + "\n")
        for p in profiles:
            cells = [
                "NA" if p.raw[name] is None else f"{p.raw[name]:.6f}"
                for name in cx.INDEX_ORDER
            ]
            fh.write(f"{p.query_id}\t{p.score:.6f}\t" + "\t".join(cells) + "\n")
    print(f"wrote {path} ({len(profiles)} queries)")
    return 0


def _cmd_train(ns) -> int:
    if ns.debias and not ns.biased_model:
        raise UsageError("--debias requires --biased-model")
    config = _train_config(ns)
    corpus, queries, qrels = _load_training_data(ns)
    batches, skipped = cp.make_batches(queries, qrels, corpus, config.n_negatives, config.seed)
    if skipped:
        print(f"skipped {skipped} queries without positives", file=sys.stderr)
    if ns.debias:
        try:
            debias = tr.DebiasConfig(alpha=ns.alpha)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        f_b, vocab = enc.load_checkpoint(ns.biased_model)
        result = tr.train_debiased(batches, f_b, vocab, config, debias)
        extra = {"mode": "debiased", "alpha": ns.alpha, "biased_model": ns.biased_model}
    else:
        vocab = enc.build_vocab(corpus, queries, ns.min_count)
        result = tr.train_plain(batches, vocab, config)
        extra = {"mode": "plain"}
    _save_model(result, vocab, ns, "robust", extra)
    return 0


def _cmd_train_biased(ns) -> int:
    config = _train_config(ns)
    try:
        debias = tr.DebiasConfig(
            bias_strategy=ns.strategy,
            data_fraction=ns.data_fraction,
            epoch_fraction=ns.epoch_fraction,
            weak_dim=ns.weak_dim,
            repetitions=ns.repetitions,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    corpus, queries, qrels = _load_training_data(ns)
    batches, skipped = cp.make_batches(queries, qrels, corpus, config.n_negatives, config.seed)
    if skipped:
        print(f"skipped {skipped} queries without positives", file=sys.stderr)
    vocab = enc.build_vocab(corpus, queries, ns.min_count)
    result = tr.make_biased_learner(ns.strategy, batches, vocab, config, debias)
    _save_model(result, vocab, ns, f"biased-{ns.strategy}", {"mode": "biased", "strategy": ns.strategy})
    return 0


def _cmd_retrieve(ns) -> int:
    corpus = cp.load_corpus(ns.corpus)
    queries = cp.load_queries(ns.queries)
    out = Path(ns.out)
    if ns.method == "bm25":
        try:
            config = rt.RetrievalConfig(k1=ns.k1, b=ns.b, top_k=ns.top_k)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        index = rt.build_bm25(corpus)
        run = rt.bm25_run(index, queries, config, tag="bm25")
    else:
        if not ns.model:
            raise UsageError("--method dense requires --model")
        params, vocab = enc.load_checkpoint(ns.model)
        tag = f"dense-{enc.checkpoint_digest(ns.model)[:8]}"
        run = rt.dense_search(
            params, vocab, corpus, queries, top_k=ns.top_k, tag=tag, threads=ns.threads
        )
    path = out / "runs" / f"{run.tag}.run"
    cp.write_run(run, path)
    print(f"wrote {path} ({len(run.entries)} queries)")
    return 0


def _cmd_evaluate(ns) -> int:
    run = cp.read_run(ns.run)
    qrels = cp.load_qrels(ns.qrels)
    queries = cp.load_queries(ns.queries)
    scores = ev.score_run(run, qrels, k=ns.k, threads=ns.threads)
    if len(scores.values) < 2:
        raise ValueError("need at least 2 scored queries to evaluate")
    stats = ev.aggregate(scores)
    profiles = cx.aggregate_scores(
        [q.id for q in queries], [q.text for q in queries], threads=ns.threads
    )
    curve = ev.bucket_curve(scores, profiles, ns.buckets)
    comp = {p.query_id: p.score for p in profiles}
    paths = ev.emit_report(stats, curve, scores, comp, Path(ns.out) / "reports")
    cv_text = f"{stats.cv:.6f}" if stats.cv is not None else "NA"
    print(f"mu={stats.mu:.6f} sigma={stats.sigma:.6f} cv={cv_text} n={len(scores.values)}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_compare(ns) -> int:
    run_a = cp.read_run(ns.run_a)
    run_b = cp.read_run(ns.run_b)
    qrels = cp.load_qrels(ns.qrels)
    scores_a = ev.score_run(run_a, qrels, k=ns.k)
    scores_b = ev.score_run(run_b, qrels, k=ns.k)
    common = sorted(set(scores_a.values) & set(scores_b.values))
    if not common:
        raise ValueError("runs share no scored queries")
    result = ev.paired_significance(
        {q: scores_a.values[q] for q in common},
        {q: scores_b.values[q] for q in common},
        resamples=ns.resamples,
        seed=ns.seed,
        comparisons=ns.m,
    )
    print(
        f"raw_p={round(result.raw_p, 10)} adjusted_p={round(result.adjusted_p, 10)} "
        f"m={result.comparisons} resamples={result.resamples} n={len(common)}"
    )
    return 0


_HANDLERS = {
    "synth": _cmd_synth,
    "complexity": _cmd_complexity,
    "train": _cmd_train,
    "train-biased": _cmd_train_biased,
    "retrieve": _cmd_retrieve,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        merged = _merge_options(args, _COMMANDS[args.command])
        return _HANDLERS[args.command](merged)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
