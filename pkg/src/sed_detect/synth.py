# sourcery skip: avoid-global-variables
"""
`synth.py` module. - Command for generating a seeded synthetic corpus.

The corpus has the same layout as a recorded one: `manifest.json`, one stream file and one annotation file per interaction. Two annotators are simulated: the first marks the generated SED segments, the second jitters their boundaries and sometimes splits a segment with a short engaged gap.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from pathlib import Path
from typing import Annotated

import typer

from sed_detect.models import AnnotatorNoise, GeneratorConfig, RunRecord
from sed_detect.types import ConfigOption, LayoutOption, OutOption, SeedOption
from sed_detect.utilities import (
    MANIFEST_NAME,
    cli_errors,
    generate_corpus,
    load_config,
    package_version,
    retrieve_layout,
    write_run_record,
)


cwd = Path.cwd()


def generator_config(
    path: Path | None,
    *,
    seed: int | None,
    layout: str | None,
    jitter_ms: float | None,
    split_probability: float | None,
) -> GeneratorConfig:
    """The generator configuration with command-line overrides applied."""
    config = load_config(GeneratorConfig, path, seed=seed, layout=layout)
    noise = {
        key: value
        for key, value in (("jitter_ms", jitter_ms), ("split_probability", split_probability))
        if value is not None
    }
    if not noise:
        return config
    annotator_noise = AnnotatorNoise.model_validate(config.annotator_noise.model_dump() | noise)
    return config.model_copy(update={"annotator_noise": annotator_noise})


@cli_errors
def run_synth(
    n_interactions: Annotated[
        int, typer.Option("--interactions", "-n", min=1, help="Number of interactions to generate.")
    ] = 120,
    out: OutOption = cwd / "corpus",
    seed: SeedOption = None,
    config_path: ConfigOption = None,
    layout: LayoutOption = None,
    jitter_ms: Annotated[
        float | None,
        typer.Option("--jitter-ms", min=0.0, help="Second-annotator boundary jitter (sd, milliseconds)."),
    ] = None,
    split_probability: Annotated[
        float | None,
        typer.Option(
            "--split-probability",
            min=0.0,
            max=1.0,
            help="Chance that the jittered second annotator splits a SED segment with a short engaged gap.",
        ),
    ] = None,
) -> None:
    """Generates a synthetic corpus with known SED segments and two simulated annotators."""
    config = generator_config(
        config_path, seed=seed, layout=layout, jitter_ms=jitter_ms, split_probability=split_probability
    )
    feature_layout = retrieve_layout(config.layout)
    manifest = generate_corpus(config, feature_layout, n_interactions, out)
    multiparty = sum(entry.multiparty for entry in manifest.interactions)
    record = RunRecord(
        command="synth",
        version=package_version(),
        config=config.model_dump(mode="json", by_alias=True),
        seeds={"generator": config.seed},
        layout_hash=feature_layout.layout_hash,
        metrics={"interactions": len(manifest.interactions), "multiparty": multiparty},
        artifacts=[MANIFEST_NAME, "streams", "annotations"],
    )
    write_run_record(out, record)
    typer.echo(
        f"Wrote {len(manifest.interactions)} interactions ({multiparty} multiparty) to {out!s}"
    )


__all__ = ["generator_config", "run_synth"]
