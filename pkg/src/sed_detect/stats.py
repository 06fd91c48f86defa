# sourcery skip: avoid-global-variables
"""
`stats.py` module. - Command for annotation statistics.

Counts cues (all and primary), affects and causes over every annotation track, overall and per annotator, and reports SED segment, final-SED and interaction durations. Only annotation files are read.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path

import typer

from rich import print_json

from sed_detect.models import RunRecord
from sed_detect.types import DataOption, MergeGapOption, OutOption, Party, PartyOption
from sed_detect.utilities import (
    AnnotationTrack,
    annotation_stats,
    cli_errors,
    dumps,
    load_corpus,
    merge_short_gaps,
    package_version,
    write_json,
    write_run_record,
)


cwd = Path.cwd()

STATS_FILE = "stats.json"


@cli_errors
def run_stats(
    data: DataOption,
    party: PartyOption = Party.ALL,
    merge_gap: MergeGapOption = None,
    out: OutOption = cwd / "stats",
) -> None:
    """Cue, affect and cause occurrences plus SED and interaction duration statistics."""
    corpus = load_corpus(data, party=party)
    tracks: list[AnnotationTrack] = [track for _, interaction in corpus.annotations() for track in interaction]
    if merge_gap is not None:
        tracks = [merge_short_gaps(track, merge_gap) for track in tracks]
    stats = annotation_stats(tracks).to_dict()
    path = write_json(out / STATS_FILE, stats)
    record = RunRecord(
        command="stats",
        version=package_version(),
        config={"party": str(party), "merge_gap_s": merge_gap},
        layout_hash=corpus.layout.layout_hash,
        metrics=stats,
        artifacts=[path.name],
    )
    write_run_record(out, record)
    print_json(dumps(stats))
    typer.echo(f"Statistics saved to {path!s}")


__all__ = ["run_stats"]
