# sourcery skip: avoid-global-variables
"""
`sweep.py` module. - Command for the observation-window / buffer grid.

Every requested classifier is cross-validated at every (tau, eta) with tau >= eta, using one fold plan for the whole grid. Results go to `sweep.csv`, one row per cell, and are printed as one tau-by-eta table per classifier. With several classifiers a side-by-side comparison table follows.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path
from typing import Annotated

import typer

from rich.console import Console

from sed_detect.models import RunRecord, TrainConfig
from sed_detect.types import (
    ConfigError,
    ConfigOption,
    DataOption,
    FoldsOption,
    LayoutOption,
    MergeGapOption,
    ModelKind,
    OutOption,
    Party,
    PartyOption,
    SeedOption,
)
from sed_detect.utilities import (
    SWEEP_ETAS,
    SWEEP_METRICS,
    SWEEP_TAUS,
    cli_errors,
    comparison_table,
    load_config,
    load_corpus,
    make_folds,
    package_version,
    sweep,
    sweep_grid,
    sweep_table,
    write_run_record,
    write_sweep_csv,
)


cwd = Path.cwd()

SWEEP_FILE = "sweep.csv"


@cli_errors
def run_sweep(
    data: DataOption,
    kinds: Annotated[
        list[ModelKind] | None,
        typer.Option("--model", "-m", case_sensitive=False, help="Classifier to sweep; repeat for several."),
    ] = None,
    taus: Annotated[
        list[float] | None,
        typer.Option("--tau", min=0.0, help="Observation windows in seconds; repeat for several. Default 0..6."),
    ] = None,
    etas: Annotated[
        list[float] | None,
        typer.Option("--eta", min=0.0, help="Buffers in seconds; repeat for several. Default 0..5."),
    ] = None,
    folds: FoldsOption = 3,
    seed: SeedOption = None,
    config_path: ConfigOption = None,
    out: OutOption = cwd / "sweep",
    layout: LayoutOption = None,
    party: PartyOption = Party.ALL,
    merge_gap: MergeGapOption = None,
    metric: Annotated[
        str, typer.Option("--metric", help=f"Metric shown in the tables: {', '.join(SWEEP_METRICS)}.")
    ] = "auc",
) -> None:
    """Cross-validates classifiers over a (tau, eta) grid; cells with tau < eta are left empty."""
    if metric not in SWEEP_METRICS:
        raise ConfigError(f"unknown metric {metric!r}; choose from {', '.join(SWEEP_METRICS)}")
    kinds = list(dict.fromkeys(kinds or [ModelKind.LSTM]))
    config = load_config(TrainConfig, config_path, seed=seed)
    grid = sweep_grid(taus or SWEEP_TAUS, etas or SWEEP_ETAS)
    if not grid:
        raise ConfigError("no (tau, eta) cell with tau >= eta in the requested grid")
    corpus = load_corpus(data, layout=layout, party=party)
    prepared = corpus.prepared(grid[0].frame_period_ms, merge_gap_s=merge_gap)
    plan = make_folds(corpus.ids, folds, config.seed)
    cells = sweep(kinds, prepared, plan, corpus.layout, config, grid=grid)
    csv_path = write_sweep_csv(out / SWEEP_FILE, cells)
    record = RunRecord(
        command="sweep",
        version=package_version(),
        config={
            "models": [str(kind) for kind in kinds],
            "grid": [window_config.to_dict() for window_config in grid],
            "folds": plan.to_dict(),
            "party": str(party),
            "merge_gap_s": merge_gap,
            "train": config.model_dump(mode="json", by_alias=True),
        },
        seeds={"train": config.seed, "folds": plan.seed, "eval": config.seed},
        layout_hash=corpus.layout.layout_hash,
        metrics={"cells": [cell.to_dict() for cell in cells]},
        artifacts=[csv_path.name],
    )
    write_run_record(out, record)
    console = Console()
    for kind in kinds:
        console.print(sweep_table(cells, kind, metric))
    if len(kinds) > 1:
        console.print(comparison_table(cells, metric))
    typer.echo(f"Sweep saved to {csv_path!s}")


__all__ = ["run_sweep"]
