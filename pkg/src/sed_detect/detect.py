# sourcery skip: avoid-global-variables
"""
`detect.py` module. - Command for running the streaming detector over recorded streams.

Samples are replayed in file order through a `StreamingDetector`, so the output is exactly what an online session fed with the same samples would emit. Input is either one stream file (`--streams`) or every interaction of a corpus (`--data`); for corpus interactions the annotated start and end bound the session.

The decision file starts with a header naming the model, its window configuration and layout hash, followed by one record per decision.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from collections.abc import Iterable, Iterator
from itertools import chain
from pathlib import Path
from typing import Annotated, Any

import typer

from sed_detect.models import FeatureLayout, RunRecord, StreamHeader
from sed_detect.types import ConfigError, ModelFileOption, OutOption, Party, PartyOption
from sed_detect.utilities import (
    Decision,
    StreamSample,
    TrainedModel,
    cli_errors,
    decision_header,
    detect_stream,
    iter_stream_file,
    load_corpus,
    load_model,
    package_version,
    retrieve_layout,
    write_jsonl,
    write_run_record,
)


cwd = Path.cwd()


def file_session(path: Path) -> tuple[str, Iterator[StreamSample]]:
    """Interaction id and samples of a stream file; the id falls back to the file name."""
    items = iter_stream_file(path)
    first = next(items, None)
    interaction_id = first.interaction if isinstance(first, StreamHeader) else path.stem
    head = [first] if isinstance(first, StreamSample) else []
    return interaction_id, (item for item in chain(head, items) if isinstance(item, StreamSample))


def corpus_decisions(
    model: TrainedModel, data: Path, party: Party, *, report_latency: bool
) -> Iterator[Decision]:
    """Decisions for every selected corpus interaction, one session per interaction."""
    corpus = load_corpus(data, layout=model.layout_name, party=party)
    for entry, (header, _) in zip(corpus.entries, corpus.annotations(), strict=True):
        _, samples = file_session(corpus.root / entry.streams)
        yield from detect_stream(
            model,
            corpus.layout,
            samples,
            interaction_id=entry.id,
            origin_ms=header.start_ms,
            end_ms=header.end_ms,
            report_latency=report_latency,
        )


def decision_records(
    model: TrainedModel, decisions: Iterable[Decision], counts: dict[str, int]
) -> Iterator[dict[str, Any]]:
    """The header, then every decision; tallies decisions and SED labels into ``counts``."""
    yield decision_header(model)
    for decision in decisions:
        counts["decisions"] += 1
        counts["sed"] += decision.label
        yield decision.to_record().model_dump(mode="json", exclude_none=True)


@cli_errors
def run_detect(
    model_path: ModelFileOption,
    streams: Annotated[
        Path | None,
        typer.Option(
            "--streams",
            exists=True,
            dir_okay=False,
            resolve_path=True,
            help="A stream file to replay. Give either this or `--data`.",
        ),
    ] = None,
    data: Annotated[
        Path | None,
        typer.Option(
            "--data", "-d", exists=True, resolve_path=True, help="A corpus whose interactions are replayed one by one."
        ),
    ] = None,
    out: OutOption = cwd / "decisions",
    party: PartyOption = Party.ALL,
    start_ms: Annotated[
        int, typer.Option("--start-ms", min=0, help="Interaction start for `--streams`; frame 0 begins here.")
    ] = 0,
    end_ms: Annotated[
        int | None,
        typer.Option("--end-ms", min=1, help="Interaction end for `--streams`. Defaults to the last sample."),
    ] = None,
    report_latency: Annotated[
        bool,
        typer.Option(
            "--report-latency/--no-report-latency",
            help="Add the preprocessing and inference time of every decision (`compute_ms`).",
        ),
    ] = False,
) -> None:
    """Replays recorded streams through the online detector and writes one decision per closed frame."""
    if streams is not None and data is not None:
        raise ConfigError("give either --streams or --data, not both")
    model = load_model(model_path)
    if streams is not None:
        layout: FeatureLayout = retrieve_layout(model.layout_name)
        interaction_id, samples = file_session(streams)
        decisions = detect_stream(
            model,
            layout,
            samples,
            interaction_id=interaction_id,
            origin_ms=start_ms,
            end_ms=end_ms,
            report_latency=report_latency,
        )
        source: dict[str, Any] = {"streams": streams.name, "start_ms": start_ms, "end_ms": end_ms}
    elif data is not None:
        decisions = corpus_decisions(model, data, party, report_latency=report_latency)
        source = {"data": str(data), "party": str(party)}
    else:
        raise ConfigError("give one of --streams or --data")
    counts = {"decisions": 0, "sed": 0}
    path = out / f"{model.model_id}-decisions.jsonl"
    write_jsonl(path, decision_records(model, decisions, counts))
    record = RunRecord(
        command="detect",
        version=package_version(),
        config={
            "model": model_path.name,
            "window_config": model.window_config.to_dict(),
            "report_latency": report_latency,
            **source,
        },
        layout_hash=model.layout_hash,
        metrics=counts,
        artifacts=[path.name],
    )
    write_run_record(out, record)
    typer.echo(f"{counts['decisions']} decisions ({counts['sed']} SED) saved to {path!s}")


__all__ = ["corpus_decisions", "decision_records", "file_session", "run_detect"]
