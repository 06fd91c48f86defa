# sourcery skip: avoid-global-variables
"""
`get_data.py` module. - Command for exporting the packaged data as JSON files.

`get-data` writes the feature layout catalog (`layouts.json`) and the default synthetic generator configuration (`generator.json`). Both are starting points: edit them and pass them back with `--config` (generator) or point a corpus manifest at a new layout name.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path
from typing import Annotated

import typer

from rich import print_json
from rich.prompt import Prompt

from sed_detect.models import GeneratorConfig
from sed_detect.utilities import cli_errors, data_path, write_json


cwd = Path.cwd()

GENERATOR_FILE = "generator.json"
LAYOUTS_FILE = "layouts.json"


def print_to_stdout(value: bool) -> None:
    """Prints the layout catalog to stdout in JSON format."""
    if not value:
        return
    print_json(data_path().read_text(), sort_keys=True)
    raise typer.Exit


def confirm_overwrite(destination: Path) -> bool:
    """Asks before replacing an existing file."""
    if not destination.exists():
        return True
    answer = Prompt.ask(f"{destination!s} already exists. Overwrite?", choices=["y", "n"], default="n")
    return answer == "y"


@cli_errors
def get_data(
    destination: Annotated[
        Path,
        typer.Option(
            "--destination",
            file_okay=False,
            resolve_path=True,
            help="Directory for `layouts.json` and `generator.json`. The default is the current working directory.",
        ),
    ] = cwd,
    print_data: Annotated[
        bool,
        typer.Option(
            "--print",
            callback=print_to_stdout,
            is_eager=True,
            help="Print the layout catalog to stdout (your terminal) in JSON format.",
        ),
    ] = False,
) -> None:
    """Saves the packaged layout catalog and the default generator configuration."""
    destination.mkdir(parents=True, exist_ok=True)
    layouts, generator = destination / LAYOUTS_FILE, destination / GENERATOR_FILE
    for path in (layouts, generator):
        if not confirm_overwrite(path):
            typer.echo(f"Skipped {path!s}")
            continue
        if path == layouts:
            path.write_bytes(data_path().read_bytes())
        else:
            write_json(path, GeneratorConfig())
        typer.echo(f"Data saved to {path!s}")


__all__ = ["get_data"]
