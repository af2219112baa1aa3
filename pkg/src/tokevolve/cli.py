"""``tokevolve`` command line: train, merge, diff, pack, extend-embeddings, pppl, validate.

Every option can also be set through ``TOKEVOLVE_<COMMAND>_<OPTION>``
environment variables, e.g. ``TOKEVOLVE_TRAIN_VOCAB_SIZE=8000``.
Diagnostics go to stderr as ``level=... msg="..."`` lines.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .core import SpecialTokens, validate
from .corpus import pack_document, read_corpus, split_sentences
from .embeddings import STRATEGIES, export_text, extend_embeddings, load_embeddings, save_embeddings
from .evolve import build_diff_report, merge_tokenizers, outcome_from_tokenizers
from .pppl import UniformScorer, UnigramScorer, pppl
from .serialization import load, save
from .trainer import TrainConfig, train

log = logging.getLogger("tokevolve")

MIN_VOCAB = 256 + len(SpecialTokens.ROLES)


class _RecordFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return f"level={record.levelname.lower()} msg={json.dumps(record.getMessage(), ensure_ascii=False)}"


class _ErrorCounter(logging.Handler):
    def __init__(self) -> None:
        super().__init__(logging.ERROR)
        self.count = 0

    def emit(self, record: logging.LogRecord) -> None:
        self.count += 1


_errors = _ErrorCounter()


def _setup_logging(verbose: bool) -> None:
    root = logging.getLogger("tokevolve")
    root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_RecordFormatter())
    root.addHandler(handler)
    root.addHandler(_errors)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.propagate = False


def _guarded(fn):
    """Turn library exceptions into one error record and exit status 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (ValueError, OSError, KeyError, TypeError) as exc:
            log.error("%s: %s", type(exc).__name__, exc)
            raise SystemExit(1)
        if _errors.count:
            raise SystemExit(1)

    return wrapper


def _check_vocab_size(ctx, param, value):
    if value < MIN_VOCAB:
        raise click.BadParameter(f"must be at least {MIN_VOCAB} (256 bytes + special tokens)")
    return value


def _read_categories(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            token, _, label = line.partition("\t")
            out[token] = label
    return out


def _write_report(report, path: str | None, fmt: str) -> None:
    text = report.to_json() + "\n" if fmt == "json" else report.to_tsv()
    if path in (None, "-"):
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text, encoding="utf-8")


class _Group(click.Group):
    def main(self, args=None, prog_name=None, **extra):
        _setup_logging(False)
        try:
            return super().main(args=args, prog_name=prog_name, standalone_mode=False, **extra)
        except click.exceptions.Exit as exc:
            raise SystemExit(exc.exit_code)
        except click.Abort:
            log.error("aborted")
            raise SystemExit(1)
        except click.UsageError as exc:
            log.error("usage: %s", exc.format_message())
            raise SystemExit(2)


@click.group(cls=_Group, context_settings={"auto_envvar_prefix": "TOKEVOLVE"})
@click.version_option(__version__)
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True, help="Worker cap.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, threads, verbose):
    """Tokenizer vocabulary evolution toolkit."""
    _errors.count = 0
    if verbose:
        _setup_logging(True)
    ctx.obj = {"threads": threads}


corpus_format = click.option(
    "--input-format", type=click.Choice(["jsonl", "text"]), default="jsonl", show_default=True
)


@main.command("train")
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--vocab-size", type=int, default=1000, show_default=True, callback=_check_vocab_size)
@click.option("--min-freq", type=click.IntRange(min=1), default=2, show_default=True)
@corpus_format
@click.pass_context
@_guarded
def cmd_train(ctx, corpus, out_dir, vocab_size, min_freq, input_format):
    """Train a byte-level BPE tokenizer on CORPUS and save it to OUT_DIR."""
    docs = [text for _, text in read_corpus(corpus, input_format)]
    tokenizer = train(docs, TrainConfig(vocab_size, min_freq), workers=ctx.obj["threads"])
    save(tokenizer, out_dir)
    click.echo(f"trained {tokenizer.size} tokens ({len(tokenizer.merges)} merges)")


def _report_options(fn):
    fn = click.option("--figure", type=click.Path(dir_okay=False), help="Write a bar chart of new tokens.")(fn)
    fn = click.option("--categories", type=click.Path(exists=True, dir_okay=False),
                      help="TSV of token<TAB>category labels.")(fn)
    fn = click.option("--corpus", type=click.Path(exists=True, dir_okay=False),
                      help="New corpus for token frequencies.")(fn)
    fn = click.option("--report-format", type=click.Choice(["tsv", "json"]), default="tsv", show_default=True)(fn)
    return corpus_format(fn)


def _diff_report(outcome, corpus, input_format, categories, report_path, report_format, figure):
    docs = [t for _, t in read_corpus(corpus, input_format)] if corpus else []
    report = build_diff_report(outcome, docs, _read_categories(categories))
    _write_report(report, report_path, report_format)
    if figure:
        from .plotting import plot_diff_report

        plot_diff_report(report, figure)
    return report


@main.command("merge")
@click.argument("old_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("new_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--report", type=click.Path(dir_okay=False), help="Write the new-token report here.")
@_report_options
@_guarded
def cmd_merge(old_dir, new_dir, out_dir, report, report_format, corpus, categories, figure, input_format):
    """Add the tokens of NEW_DIR missing from OLD_DIR, keeping old IDs."""
    outcome = merge_tokenizers(load(old_dir), load(new_dir))
    save(outcome.merged, out_dir)
    if report or figure:
        _diff_report(outcome, corpus, input_format, categories, report, report_format, figure)
    click.echo(f"added {outcome.added_count} tokens")


@main.command("diff")
@click.argument("old_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("new_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default="-", show_default=True)
@_report_options
@_guarded
def cmd_diff(old_dir, new_dir, out, report_format, corpus, categories, figure, input_format):
    """Report the tokens NEW_DIR would add to OLD_DIR."""
    outcome = merge_tokenizers(load(old_dir), load(new_dir))
    _diff_report(outcome, corpus, input_format, categories, out, report_format, figure)


@main.command("pack")
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.argument("tokenizer_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("out", type=click.Path(dir_okay=False))
@click.option("--max-tokens", type=click.IntRange(min=1), default=512, show_default=True)
@click.option("--figure", type=click.Path(dir_okay=False), help="Write a chunk-length histogram.")
@corpus_format
@_guarded
def cmd_pack(corpus, tokenizer_dir, out, max_tokens, figure, input_format):
    """Pack complete sentences of each document into chunks of at most --max-tokens."""
    tokenizer = load(tokenizer_dir)
    lengths = []
    with open(out, "w", encoding="utf-8") as fh:
        for doc_id, text in read_corpus(corpus, input_format):
            for chunk in pack_document(split_sentences(text), tokenizer, max_tokens, doc_id):
                fh.write(chunk.to_json() + "\n")
                lengths.append(len(chunk.token_ids))
    if figure:
        from .plotting import plot_chunk_lengths

        plot_chunk_lengths(lengths, max_tokens, figure)
    click.echo(f"wrote {len(lengths)} chunks")


@main.command("extend-embeddings")
@click.argument("emb_in", type=click.Path(exists=True, dir_okay=False))
@click.argument("old_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("merged_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("emb_out", type=click.Path(dir_okay=False))
@click.option("--strategy", type=click.Choice(STRATEGIES), default="subtoken-mean", show_default=True)
@click.option("--std", type=click.FloatRange(min=0.0), default=0.02, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--text-export", type=click.Path(dir_okay=False), help="Also write rows as text.")
@_guarded
def cmd_extend_embeddings(emb_in, old_dir, merged_dir, emb_out, strategy, std, seed, text_export):
    """Grow EMB_IN (EMB1 format) from OLD_DIR's vocabulary to MERGED_DIR's."""
    old = load(old_dir)
    outcome = outcome_from_tokenizers(old, load(merged_dir))
    matrix = extend_embeddings(load_embeddings(emb_in), old, outcome, strategy, std=std, seed=seed)
    save_embeddings(matrix, emb_out)
    if text_export:
        export_text(matrix, text_export)
    click.echo(f"extended embeddings {old.size} -> {matrix.shape[0]} rows")


@main.command("pppl")
@click.argument("tokenizer_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--scorer", type=click.Choice(["unigram", "uniform"]), default="unigram", show_default=True)
@click.option("--fit-corpus", type=click.Path(exists=True, dir_okay=False), help="Corpus for the unigram scorer.")
@click.option("--out", type=click.Path(dir_okay=False), default="-", show_default=True)
@click.option("--figure", type=click.Path(dir_okay=False), help="Write a per-document histogram.")
@corpus_format
@_guarded
def cmd_pppl(tokenizer_dir, corpus, scorer, fit_corpus, out, figure, input_format):
    """Pseudo-perplexity of CORPUS under a desk-scale scorer."""
    tokenizer = load(tokenizer_dir)
    skip = tokenizer.specials.ids
    if scorer == "unigram":
        if not fit_corpus:
            raise click.UsageError("--fit-corpus is required with --scorer=unigram")
        fit = (tokenizer.encode(t) for _, t in read_corpus(fit_corpus, input_format))
        model = UnigramScorer.fit(fit, tokenizer.size, skip)
    else:
        model = UniformScorer(tokenizer.size)
    docs = list(read_corpus(corpus, input_format))
    report = pppl(model, [tokenizer.encode(t) for _, t in docs], skip, doc_ids=[d for d, _ in docs])
    text = report.to_json() + "\n"
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
    if figure:
        from .plotting import plot_pppl_report

        plot_pppl_report(report, figure)


@main.command("validate")
@click.argument("tokenizer_dir", type=click.Path(exists=True, file_okay=False))
@_guarded
def cmd_validate(tokenizer_dir):
    """Check a tokenizer directory; exits 1 on any violation."""
    problems = validate(load(tokenizer_dir, check=False))
    for problem in problems:
        log.error("%s", problem)
    if not problems:
        click.echo("ok")
