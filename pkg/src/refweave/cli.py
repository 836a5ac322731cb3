"""Command-line entry points: serve, one-shot discover, fixture builder, eval."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .evalharness import (
    Method,
    compare_queries,
    judged_summary,
    load_runs,
    render_bars,
    summary_json,
    summary_table,
)
from .evalharness.compare import rows_table
from .manuscript import Manuscript, make_selection, segment_sentences
from .service import ServiceEngine, build_app
from .service.config import load_config
from .service.jobs import DONE


def _parse_span(span: str) -> tuple[int, int]:
    try:
        start_text, end_text = span.split(":", 1)
        return int(start_text), int(end_text)
    except ValueError:
        raise click.BadParameter(f"span must look like 120:188, got {span!r}") from None


@click.group()
def main() -> None:
    """Reference discovery for LaTeX manuscripts."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Config file; defaults to $REFWEAVE_CONFIG.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8017, show_default=True, type=int)
def serve(config_path: Path | None, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    engine = ServiceEngine(load_config(config_path))
    uvicorn.run(build_app(engine), host=host, port=port, log_level="info")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--tex", "tex_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--bib", "bib_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--span", required=True, help="Selection offsets as start:end.")
@click.option("--timeout", default=120.0, show_default=True, type=float)
def discover(config_path, tex_path, bib_path, span, timeout) -> None:
    """One-shot discovery for a span of a LaTeX file; prints the job record."""
    engine = ServiceEngine(load_config(config_path))
    bib_source = bib_path.read_text() if bib_path else ""
    manuscript_id, _ = engine.add_manuscript(tex_path.read_text(), bib_source)
    start, end = _parse_span(span)
    job_id = engine.start_discovery(manuscript_id, start, end)
    job = engine.jobs.wait(job_id, timeout=timeout)
    click.echo(json.dumps(engine.job_payload(job), indent=2))
    if job.state != DONE:
        sys.exit(1)


@main.command("record-fixtures")
@click.option("--dest", type=click.Path(path_type=Path), required=True)
def record_fixtures(dest: Path) -> None:
    """Build the offline demonstration universe under DEST."""
    from .demo import write_demo

    summary = write_demo(dest)
    click.echo(json.dumps(summary, indent=2))


def _method_for(path: Path) -> Method:
    try:
        return Method(path.stem)
    except ValueError:
        return Method.SYSTEM


@main.command("eval")
@click.option("--runs", "runs_paths", multiple=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--metrics", "show_metrics", is_flag=True,
              help="Print the metric table for the given runs files.")
@click.option("--compare-queries", "compare", is_flag=True,
              help="Print each query variant side by side for a manuscript span.")
@click.option("--tex", "tex_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--span", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--chart", type=click.Path(path_type=Path), default=Path("metrics.png"),
              show_default=True, help="Where the metric bar chart is written.")
@click.option("--json", "as_json", is_flag=True, help="Also print the machine-readable form.")
def eval_cmd(runs_paths, show_metrics, compare, tex_path, span, config_path, chart,
             as_json) -> None:
    """Metric arithmetic over judgment files, or query-variant comparison."""
    if show_metrics:
        if not runs_paths:
            raise click.UsageError("--metrics needs at least one --runs file")
        rows = [
            judged_summary(path.stem, load_runs(path, _method_for(path)))
            for path in runs_paths
        ]
        click.echo(summary_table(rows))
        if as_json:
            click.echo(summary_json(rows))
        click.echo(f"chart: {render_bars(rows, chart)}")
        return
    if compare:
        if tex_path is None or span is None:
            raise click.UsageError("--compare-queries needs --tex and --span")
        engine = ServiceEngine(load_config(config_path))
        manuscript = Manuscript.load(tex_path.read_text(), bib_path="references.bib",
                                     bib_source="")
        start, end = _parse_span(span)
        selection = make_selection(manuscript.tex_source, start, end)
        claims = segment_sentences(selection)
        rows = compare_queries(
            engine.gateway, claims, manuscript.schema, selection.surrounding_paragraph
        )
        click.echo(rows_table(rows))
        return
    raise click.UsageError("pass --metrics or --compare-queries")


if __name__ == "__main__":
    main()
