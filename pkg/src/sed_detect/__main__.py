# sourcery skip: avoid-global-variables
"""
SED (sign of engagement decrease) detector.
This cli tool generates synthetic corpora, trains and evaluates engagement-decrease classifiers on windowed multimodal behaviour streams, and replays streams through the online detector.

Every command that writes output also writes a `run-<command>.json` record with its effective configuration, seeds, layout hash and metrics.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from typing import Annotated

import typer

import sed_detect.contrast as contrast
import sed_detect.detect as detect
import sed_detect.evaluate as evaluate
import sed_detect.get_data as get_data
import sed_detect.kappa as kappa
import sed_detect.stats as stats
import sed_detect.sweep as sweep
import sed_detect.synth as synth
import sed_detect.train as train

from sed_detect.utilities import configure_logging


app = typer.Typer(no_args_is_help=True)


@app.callback()
def main(
    verbose: Annotated[
        bool, typer.Option("--verbose/--quiet", "-v", help="Log per-epoch training progress and other details.")
    ] = False,
) -> None:
    """Detects signs of engagement decrease in multimodal interaction streams."""
    configure_logging(verbose=verbose)


app.command("synth")(synth.run_synth)
app.command("train")(train.run_train)
app.command("eval")(evaluate.run_eval)
app.command("sweep")(sweep.run_sweep)
app.command("detect")(detect.run_detect)
app.command("kappa")(kappa.run_kappa)
app.command("contrast")(contrast.run_contrast)
app.command("stats")(stats.run_stats)
app.command("get-data")(get_data.get_data)


if __name__ == "__main__":
    app()


__all__ = ["app"]
