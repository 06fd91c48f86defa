# sourcery skip: avoid-global-variables
"""
`contrast.py` module. - Command for comparing behaviour across annotation states.

For every pooled coordinate the mean is reported in four states (both annotators engaged, both SED, and the two disagreements), and the agreed-engaged frames are compared with the agreed-SED frames by Welch's unequal-variance t-test. Missing entries are left out per coordinate; nothing is imputed.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path
from typing import Annotated

import typer

from rich.console import Console

from sed_detect.models import DEFAULT_FRAME_PERIOD_MS, RunRecord
from sed_detect.types import DataOption, LayoutOption, MergeGapOption, OutOption, Party, PartyOption
from sed_detect.utilities import (
    NOT_SIGNIFICANT,
    UNDEFINED,
    behavior_contrast,
    cli_errors,
    contrast_table,
    load_corpus,
    package_version,
    write_contrast_csv,
    write_run_record,
)


cwd = Path.cwd()

CONTRAST_FILE = "contrast.csv"


@cli_errors
def run_contrast(
    data: DataOption,
    out: OutOption = cwd / "contrast",
    layout: LayoutOption = None,
    party: PartyOption = Party.ALL,
    merge_gap: MergeGapOption = None,
    top: Annotated[
        int, typer.Option("--top", min=1, help="Rows shown in the terminal table; the CSV has every coordinate.")
    ] = 20,
) -> None:
    """Mean behaviour per annotation state with Welch's t-test between agreed engaged and agreed SED frames."""
    corpus = load_corpus(data, layout=layout, party=party)
    prepared = corpus.prepared(DEFAULT_FRAME_PERIOD_MS, merge_gap_s=merge_gap)
    rows = behavior_contrast(
        [p.frames for p in prepared], [p.labels for p in prepared], corpus.layout.pooled_names
    )
    path = write_contrast_csv(out / CONTRAST_FILE, rows)
    significant = sum(row.stars not in (NOT_SIGNIFICANT, UNDEFINED) for row in rows)
    record = RunRecord(
        command="contrast",
        version=package_version(),
        config={"party": str(party), "merge_gap_s": merge_gap, "test": "welch"},
        layout_hash=corpus.layout.layout_hash,
        metrics={
            "coordinates": len(rows),
            "significant": significant,
            "rows": [row.to_dict() for row in rows],
        },
        artifacts=[path.name],
    )
    write_run_record(out, record)
    Console().print(contrast_table(rows, top))
    typer.echo(f"{significant} of {len(rows)} coordinates differ at p < 0.05; table saved to {path!s}")


__all__ = ["run_contrast"]
