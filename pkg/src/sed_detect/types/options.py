# sourcery skip: avoid-global-variables
"""
Command-line option types shared by the `sed` commands.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path
from typing import Annotated

import typer

from sed_detect.types.types import ModelKind, Party


SeedOption = Annotated[
    int | None,
    typer.Option("--seed", "-s", help="Seed for every random choice the command makes. Overrides the configuration file."),
]
DataOption = Annotated[
    Path,
    typer.Option(
        "--data",
        "-d",
        exists=True,
        resolve_path=True,
        help="Corpus directory, or its `manifest.json`.",
    ),
]
OutOption = Annotated[
    Path,
    typer.Option(
        "--out",
        "-o",
        file_okay=False,
        resolve_path=True,
        help="Output directory. Created if missing; the run record is written here.",
    ),
]
ConfigOption = Annotated[
    Path | None,
    typer.Option(
        "--config",
        "-c",
        exists=True,
        dir_okay=False,
        resolve_path=True,
        help="JSON configuration file. Command-line options override its values.",
    ),
]
LayoutOption = Annotated[
    str | None,
    typer.Option("--layout", help="Feature layout name from the catalog. Defaults to the corpus layout."),
]
PartyOption = Annotated[
    Party,
    typer.Option("--party", case_sensitive=False, help="Use `all`, `single`-user or `multi`party interactions."),
]
MergeGapOption = Annotated[
    float | None,
    typer.Option(
        "--merge-gap",
        min=0.0,
        help="Absorb engaged gaps shorter than this many seconds between SED segments before labelling.",
    ),
]
ModelKindOption = Annotated[
    ModelKind, typer.Option("--model", "-m", case_sensitive=False, help="Classifier: `logreg`, `dnn`, `gru` or `lstm`.")
]
TauOption = Annotated[float, typer.Option("--tau", min=0.0, help="Observation window length in seconds.")]
EtaOption = Annotated[
    float, typer.Option("--eta", min=0.0, help="Buffer in seconds; the label is taken at t - eta.")
]
FoldsOption = Annotated[int, typer.Option("--folds", "-k", min=2, help="Number of interaction-level folds.")]
ModelFileOption = Annotated[
    Path,
    typer.Option(
        "--model",
        "-m",
        exists=True,
        dir_okay=False,
        resolve_path=True,
        help="Model file written by `sed train`.",
    ),
]


__all__ = [
    "ConfigOption",
    "DataOption",
    "EtaOption",
    "FoldsOption",
    "LayoutOption",
    "MergeGapOption",
    "ModelFileOption",
    "ModelKindOption",
    "OutOption",
    "PartyOption",
    "SeedOption",
    "TauOption",
]
