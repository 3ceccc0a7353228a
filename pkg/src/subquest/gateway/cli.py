"""Command-line front end; each subcommand fronts one module operation.

Exit codes: 0 on success, 2 on validation errors (bad input files, malformed
logical forms, unresolvable feedback).
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..corpus import load_corpus, load_default_corpus
from ..correct import (
    apply_op,
    compile_state,
    diff_components,
    new_state,
    parse_feedback,
    render_op,
)
from ..decompose import decompose
from ..errors import SubquestError
from ..lf import EntityMap, parse_lf, serialize
from ..metrics import (
    CleaningItem,
    UnigramScorer,
    corpus_bleu,
    diversity_report,
    dump_json,
    exact_match,
    cleaning_rank,
    format_table,
    rouge_n,
)
from ..models import OracleFeedback, OracleModel, TemplateInverseModel
from ..render import render_all
from ..simulate import SimConfig, run_suite
from .config import load_config


def _fail(exc: Exception) -> "NoReturn":  # noqa: F821
    kind = getattr(exc, "kind", type(exc).__name__)
    click.echo(f"error [{kind}]: {exc}", err=True)
    sys.exit(2)


def _load_corpus(path: str | None):
    return load_corpus(path) if path else load_default_corpus()


def _load_emap(path: str | None) -> EntityMap:
    if not path:
        return EntityMap()
    return EntityMap.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _read_lf_arg(lf: str | None, lf_file: str | None) -> str:
    if lf:
        return lf
    if lf_file:
        return Path(lf_file).read_text(encoding="utf-8").strip()
    return sys.stdin.read().strip()


corpus_opt = click.option("--corpus", "corpus_path", default=None, help="template corpus TSV")
entities_opt = click.option("--entities", "entities_path", default=None, help="entity map JSON")
lf_opt = click.option("--lf", default=None, help="logical form text (default: stdin)")
lf_file_opt = click.option("--lf-file", default=None, help="file holding the logical form")


@click.group()
def main():
    """Decompose, explain, correct and evaluate KBQA logical forms."""


@main.command("decompose")
@lf_opt
@lf_file_opt
@corpus_opt
@entities_opt
def decompose_cmd(lf, lf_file, corpus_path, entities_path):
    """Split a logical form into sub-LF components."""
    try:
        corpus = _load_corpus(corpus_path)
        d = decompose(parse_lf(_read_lf_arg(lf, lf_file)), corpus)
        out = {
            "qtype": d.qtype,
            "components": [
                {"kind": c.kind, "key": c.corpus_key(), "sub_lf": c.text()}
                for c in d.components
            ],
            "sort": d.sort_step.text() if d.sort_step else None,
        }
        click.echo(dump_json(out))
    except SubquestError as exc:
        _fail(exc)


@main.command("render")
@lf_opt
@lf_file_opt
@corpus_opt
@entities_opt
def render_cmd(lf, lf_file, corpus_path, entities_path):
    """Render the templated sub-questions for a logical form."""
    try:
        corpus = _load_corpus(corpus_path)
        emap = _load_emap(entities_path)
        d = decompose(parse_lf(_read_lf_arg(lf, lf_file)), corpus)
        for q in render_all(d, emap, corpus):
            click.echo(f"{q.step_index}. {q.text}")
    except SubquestError as exc:
        _fail(exc)


@main.command("diff")
@click.option("--pred", required=True, help="predicted LF text or @file")
@click.option("--gold", required=True, help="gold LF text or @file")
@corpus_opt
@entities_opt
def diff_cmd(pred, gold, corpus_path, entities_path):
    """Edit-script utterances transforming the predicted parse into gold."""
    try:
        corpus = _load_corpus(corpus_path)
        emap = _load_emap(entities_path)
        pred_d = decompose(parse_lf(_read_at(pred)), corpus)
        gold_d = decompose(parse_lf(_read_at(gold)), corpus)
        for op in diff_components(pred_d, gold_d, emap, corpus).ops:
            click.echo(render_op(op))
    except SubquestError as exc:
        _fail(exc)


def _read_at(value: str) -> str:
    if value.startswith("@"):
        return Path(value[1:]).read_text(encoding="utf-8").strip()
    return value


@main.command("apply")
@lf_opt
@lf_file_opt
@corpus_opt
@entities_opt
@click.option("--feedback", "feedbacks", multiple=True, required=True,
              help="feedback utterance (repeatable, applied in order)")
@click.option("--gold", default=None, help="gold LF enables the oracle model")
def apply_cmd(lf, lf_file, corpus_path, entities_path, feedbacks, gold):
    """Apply feedback utterances to a predicted parse and compile the result."""
    try:
        corpus = _load_corpus(corpus_path)
        emap = _load_emap(entities_path)
        state = new_state("", _read_lf_arg(lf, lf_file), emap, corpus)
        if gold:
            model = OracleModel(decompose(parse_lf(_read_at(gold)), corpus), emap, corpus)
        else:
            model = TemplateInverseModel(corpus)
        for utterance in feedbacks:
            state = apply_op(state, parse_feedback(utterance), model)
        for i, step in enumerate(state.steps, 1):
            click.echo(f"{i}. {step.templated_q}")
        click.echo(serialize(compile_state(state)))
    except SubquestError as exc:
        _fail(exc)


@main.command("compile")
@lf_opt
@lf_file_opt
@corpus_opt
@entities_opt
def compile_cmd(lf, lf_file, corpus_path, entities_path):
    """Canonical compile round trip: parse, decompose, recompile."""
    try:
        corpus = _load_corpus(corpus_path)
        emap = _load_emap(entities_path)
        state = new_state("", _read_lf_arg(lf, lf_file), emap, corpus)
        click.echo(serialize(compile_state(state)))
    except SubquestError as exc:
        _fail(exc)


@main.command("exec")
@lf_opt
@lf_file_opt
@corpus_opt
@entities_opt
@click.option("--store", "store_path", required=True, help="triple store TSV")
def exec_cmd(lf, lf_file, corpus_path, entities_path, store_path):
    """Execute a decomposition step by step against a triple store."""
    try:
        from ..kb import eval_decomposition, load_store

        corpus = _load_corpus(corpus_path)
        emap = _load_emap(entities_path)
        store = load_store(store_path)
        d = decompose(parse_lf(_read_lf_arg(lf, lf_file)), corpus)
        steps, final = eval_decomposition(store, d, emap)
        questions = render_all(d, emap, corpus)
        for q, answers in zip(questions, steps):
            click.echo(f"{q.step_index}. {q.text}")
            click.echo(f"   ANSWER: {', '.join(answers.display())}")
        click.echo(f"final: {', '.join(final.display())}")
    except SubquestError as exc:
        _fail(exc)


@main.command("simulate")
@click.option("--pred", required=True, type=click.Path(exists=True))
@click.option("--gold", required=True, type=click.Path(exists=True))
@corpus_opt
@click.option("--store", "store_path", default=None)
@click.option("--model", default="oracle",
              help="oracle | template-inverse | remote:<url>")
@click.option("--attempts", default=1, type=int)
@click.option("--json", "as_json", is_flag=True, help="emit the report as JSON")
def simulate_cmd(pred, gold, corpus_path, store_path, model, attempts, as_json):
    """Simulate correction dialogues over aligned prediction/gold JSONL."""
    try:
        corpus = _load_corpus(corpus_path)
        store = None
        if store_path:
            from ..kb import load_store

            store = load_store(store_path)
        config = SimConfig(corpus=corpus, store=store, model=model, max_attempts=attempts)
        report = run_suite(pred, gold, config)
        click.echo(dump_json(report.to_json()) if as_json else report.table())
    except SubquestError as exc:
        _fail(exc)


@main.group("metrics")
def metrics_group():
    """Text and answer metrics."""


@metrics_group.command("diversity")
@click.argument("corpus_file", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True)
def diversity_cmd(corpus_file, as_json):
    sentences = [l for l in Path(corpus_file).read_text(encoding="utf-8").splitlines() if l.strip()]
    report = diversity_report(sentences)
    click.echo(dump_json(report.to_json()) if as_json else report.table())


@metrics_group.command("bleu")
@click.argument("candidates_file", type=click.Path(exists=True))
@click.argument("references_file", type=click.Path(exists=True))
@click.option("--n", default=4, type=click.IntRange(1, 4))
def bleu_cmd(candidates_file, references_file, n):
    cands = Path(candidates_file).read_text(encoding="utf-8").splitlines()
    refs = Path(references_file).read_text(encoding="utf-8").splitlines()
    try:
        click.echo(f"BLEU-{n}: {corpus_bleu(cands, refs, n):.4f}")
    except ValueError as exc:
        _fail(exc)


@metrics_group.command("rouge")
@click.argument("candidates_file", type=click.Path(exists=True))
@click.argument("references_file", type=click.Path(exists=True))
@click.option("--n", default=1, type=click.IntRange(1, 2))
@click.option("--mask-entities", is_flag=True)
def rouge_cmd(candidates_file, references_file, n, mask_entities):
    cands = Path(candidates_file).read_text(encoding="utf-8").splitlines()
    refs = Path(references_file).read_text(encoding="utf-8").splitlines()
    if len(cands) != len(refs):
        _fail(ValueError("candidate and reference files must align"))
    scores = [rouge_n(c, r, n, mask_entities) for c, r in zip(cands, refs)]
    click.echo(f"ROUGE-{n}: {sum(scores) / len(scores):.4f}" if scores else "ROUGE: n/a")


@metrics_group.command("em")
@click.option("--pred", required=True)
@click.option("--gold", required=True)
def em_cmd(pred, gold):
    try:
        click.echo(exact_match(parse_lf(_read_at(pred)), parse_lf(_read_at(gold))))
    except SubquestError as exc:
        _fail(exc)


@main.command("clean-rank")
@click.option("--items", "items_path", required=True, type=click.Path(exists=True),
              help="JSONL of {id, source, target_mr, generated_mr, label?}")
@click.option("--k", default=None, type=int, help="report precision@k over labeled items")
def clean_rank_cmd(items_path, k):
    """Rank paraphrase items for manual review."""
    try:
        items = []
        for line in Path(items_path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            items.append(CleaningItem(
                id=str(rec["id"]), source=rec.get("source", ""),
                target_mr=rec["target_mr"], generated_mr=rec["generated_mr"],
                label=rec.get("label")))
        scorer = UnigramScorer([i.target_mr for i in items])
        ranked = cleaning_rank(items, scorer)
        rows = [("rank", "id", "D", "edit_distance", "label")]
        for i, r in enumerate(ranked, 1):
            rows.append((str(i), r.id, f"{r.d_score:.3f}", str(r.edit_distance), r.label or "-"))
        click.echo(format_table(rows))
        if k is not None:
            from ..metrics import precision_at_k

            click.echo(f"precision@{k}: {precision_at_k(ranked, k):.3f}")
    except (SubquestError, ValueError, KeyError) as exc:
        _fail(exc)


@main.command("ingest")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@corpus_opt
def ingest_cmd(input_path, out_dir, corpus_path):
    """Convert CWQ-style JSON into prediction/gold JSONL for the simulator."""
    from .ingest import ingest_cwq

    try:
        corpus = _load_corpus(corpus_path)
        result = ingest_cwq(input_path, out_dir, corpus)
        click.echo(f"accepted {result.accepted}, rejected {result.rejected}")
        click.echo(f"gold: {result.gold_path}")
        click.echo(f"pred: {result.pred_path}")
        click.echo(f"rejects: {result.rejects_path}")
    except (SubquestError, ValueError) as exc:
        _fail(exc)


@main.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@corpus_opt
@click.option("--store", "store_path", default=None)
@click.option("--model", default=None)
@click.option("--attempts", default=None, type=int)
@click.option("--port", default=None, type=int)
@click.option("--records", default=None)
def serve_cmd(config_path, corpus_path, store_path, model, attempts, port, records):
    """Run the HTTP session gateway."""
    import uvicorn

    from .app import create_app

    try:
        config = load_config(config_path, {
            "corpus": corpus_path, "store": store_path, "model": model,
            "attempts": attempts, "port": port, "records": records,
        })
        app = create_app(config)
    except (SubquestError, ValueError) as exc:
        _fail(exc)
    uvicorn.run(app, host="127.0.0.1", port=config.port)


if __name__ == "__main__":
    main()
