# sourcery skip: avoid-global-variables
"""
`kappa.py` module. - Command for inter-annotator agreement.

Cohen's kappa is computed over every 500 ms frame of every selected interaction, comparing the first two annotators. With `--merge-gap` the agreement is reported both before and after short engaged gaps between SED segments are absorbed; only annotation files are read.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path
from typing import Any

import typer

from rich import print_json

from sed_detect.models import DEFAULT_FRAME_PERIOD_MS, RunRecord
from sed_detect.types import DataOption, MergeGapOption, OutOption, Party, PartyOption
from sed_detect.utilities import (
    Corpus,
    KappaReport,
    cli_errors,
    corpus_kappa,
    dumps,
    load_corpus,
    package_version,
    track_labels,
    write_json,
    write_run_record,
)


cwd = Path.cwd()

KAPPA_FILE = "kappa.json"


def kappa_report(corpus: Corpus, *, merge_gap_s: float | None = None) -> KappaReport:
    """Pooled and per-interaction kappa of the first two annotators."""
    labels = [
        track_labels(header.interaction, tracks, DEFAULT_FRAME_PERIOD_MS, merge_gap_s=merge_gap_s)
        for header, tracks in corpus.annotations()
    ]
    return corpus_kappa(labels)


@cli_errors
def run_kappa(
    data: DataOption,
    merge_gap: MergeGapOption = None,
    party: PartyOption = Party.ALL,
    out: OutOption = cwd / "kappa",
) -> None:
    """Reports Cohen's kappa between the first two annotators, optionally after merging short gaps."""
    corpus = load_corpus(data, party=party)
    raw = kappa_report(corpus)
    summary: dict[str, Any] = {"kappa": raw.overall, "n_frames": raw.n_frames}
    payload: dict[str, Any] = {"raw": raw.to_dict()}
    if merge_gap is not None:
        merged = kappa_report(corpus, merge_gap_s=merge_gap)
        summary |= {"merge_gap_s": merge_gap, "kappa_merged": merged.overall}
        payload |= {"merge_gap_s": merge_gap, "merged": merged.to_dict()}
    path = write_json(out / KAPPA_FILE, payload)
    record = RunRecord(
        command="kappa",
        version=package_version(),
        config={"party": str(party), "merge_gap_s": merge_gap, "frame_period_ms": DEFAULT_FRAME_PERIOD_MS},
        layout_hash=corpus.layout.layout_hash,
        metrics=summary,
        artifacts=[path.name],
    )
    write_run_record(out, record)
    print_json(dumps(summary))


__all__ = ["kappa_report", "run_kappa"]
