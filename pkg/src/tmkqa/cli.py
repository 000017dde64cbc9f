"""Command-line entry points.

Subcommands: validate, index, ask, chat, eval, report, serve.  All of
them exit nonzero on defects or errors; ``validate`` exits nonzero iff
the model has error-severity defects.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import ServiceConfig, build_engine, build_harness
from .documents import TMK_MODE
from .errors import TmkqaError
from .evaluation import load_suite, load_votes, summarize_votes
from .index import save_index
from .tmk.parser import parse_tmk
from .tmk.validator import validate as validate_model


def _load_config(config_path: str | None) -> ServiceConfig:
    if config_path:
        return ServiceConfig.load(Path(config_path))
    default = Path("tmkqa.yaml")
    return ServiceConfig.load(default if default.is_file() else None)


@click.group()
def main():
    """Grounded skill-explanation QA over TMK models."""


@main.command()
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text")
def validate(model_file: Path, output_format: str):
    """Parse and validate a skill model file."""
    try:
        model = parse_tmk(model_file.read_text(encoding="utf-8"))
    except TmkqaError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(2)
    report = validate_model(model)
    if output_format == "json":
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        for defect in report.defects:
            click.echo(f"{defect.severity.value}: {defect.code.value} at {defect.location}: {defect.message}")
        click.echo(f"{len(report.errors)} errors, {len(report.warnings)} warnings")
    sys.exit(1 if report.errors else 0)


@main.command()
@click.argument("skill")
@click.option("--mode", type=click.Choice(["tmk", "baseline"]), default=TMK_MODE)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def index(skill: str, mode: str, config_path: str | None):
    """Rebuild the on-disk retrieval index for a skill."""
    config = _load_config(config_path)
    try:
        engine = build_engine(config)
        vector_index = engine.index(skill, mode)
        corpus = engine.corpus(skill, mode)
    except TmkqaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    out_dir = Path(config.index_dir) / skill / mode
    save_index(vector_index, corpus, out_dir)
    click.echo(f"indexed {len(vector_index)} documents into {out_dir}")


@main.command()
@click.argument("skill")
@click.argument("question")
@click.option("--mode", type=click.Choice(["tmk", "baseline"]), default=TMK_MODE)
@click.option("--show-trace", is_flag=True, default=False)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def ask(skill: str, question: str, mode: str, show_trace: bool, config_path: str | None):
    """Answer one question about a skill."""
    config = _load_config(config_path)
    try:
        engine = build_engine(config)
        answered = engine.answer(question, skill, mode)
    except TmkqaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(answered.final_response)
    if show_trace:
        trace = engine.trace(answered.trace_id)
        click.echo("--- knowledge trace ---")
        click.echo(json.dumps(trace.to_dict(), indent=2))


@main.command()
@click.argument("skill")
@click.option("--mode", type=click.Choice(["tmk", "baseline"]), default=TMK_MODE)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def chat(skill: str, mode: str, config_path: str | None):
    """Interactive loop; each turn is one independent question."""
    config = _load_config(config_path)
    try:
        engine = build_engine(config)
        model = engine.model(skill)
    except TmkqaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"chatting about {model.skill_name}; empty line quits")
    while True:
        try:
            question = click.prompt("you", default="", show_default=False)
        except (EOFError, click.Abort):
            break
        if not question.strip():
            break
        answered = engine.answer(question, skill, mode)
        click.echo(answered.final_response)


@main.command(name="eval")
@click.option("--suite", "suite_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--repeats", type=int, default=1)
@click.option("--mode", type=click.Choice(["tmk", "baseline"]), default=TMK_MODE)
@click.option("--report-out", type=click.Path(path_type=Path), default=None)
@click.option("--include-inactive", is_flag=True, default=False)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def eval_cmd(suite_path: Path, repeats: int, mode: str, report_out: Path | None,
             include_inactive: bool, config_path: str | None):
    """Run a verification suite through the engine and judges."""
    config = _load_config(config_path)
    try:
        engine = build_engine(config)
        harness = build_harness(config, engine)
        suite = load_suite(suite_path, include_inactive=include_inactive)
        report = harness.run_eval(suite, repeats=repeats, mode=mode)
    except TmkqaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(report.render_text())
    if report_out is not None:
        report_out.parent.mkdir(parents=True, exist_ok=True)
        report_out.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        click.echo(f"report written to {report_out}")
    sys.exit(1 if report.error_count else 0)


@main.command()
@click.argument("votes_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def report(votes_file: Path):
    """Aggregate a vote file into agreement indices and tallies."""
    try:
        votes = load_votes(votes_file)
        summary = summarize_votes(votes)
    except (TmkqaError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(summary.render_text())


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(config_path: str | None):
    """Start the HTTP service."""
    from .server import serve as run_server

    run_server(_load_config(config_path))


if __name__ == "__main__":
    main()
