# sourcery skip: avoid-global-variables
"""
`evaluate.py` module. - Command for evaluating a saved model on a corpus.

By default the model is evaluated on the test interactions recorded in its file by `sed train`, with the recorded seed, party filter and merge gap, so the report reproduces the training-time evaluation exactly. Models without a recorded test fold are evaluated on every selected interaction they were not trained on.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import logging

from pathlib import Path
from typing import Annotated, Any

import typer

from rich import print_json

from sed_detect.models import RunRecord
from sed_detect.types import DataError, DataOption, MergeGapOption, ModelFileOption, OutOption, Party, SeedOption
from sed_detect.utilities import (
    TrainedModel,
    cli_errors,
    dumps,
    evaluate_model,
    load_corpus,
    load_model,
    model_scores,
    package_version,
    select,
    write_confusion_csv,
    write_json,
    write_roc_csv,
    write_run_record,
)


logger = logging.getLogger(__name__)

cwd = Path.cwd()

EVALUATED_METRICS = ("accuracy", "f1", "auc")


def evaluation_ids(model: TrainedModel, available: list[str], *, every_interaction: bool) -> list[str]:
    """Interactions to evaluate on: the recorded test fold, or everything the model did not see.

    Raises:
        DataError: If no interaction is left.
    """
    meta = model.train_meta
    if every_interaction:
        ids = list(available)
    elif "test_ids" in meta:
        missing = sorted(set(meta["test_ids"]) - set(available))
        if missing:
            raise DataError(f"recorded test interactions missing from the corpus: {', '.join(missing)}")
        ids = list(meta["test_ids"])
    else:
        seen = set(meta.get("train_ids", []))
        ids = [i for i in available if i not in seen]
    if not ids:
        raise DataError("no interactions left to evaluate on")
    return ids


def compare_recorded(model: TrainedModel, report: dict[str, Any]) -> bool | None:
    """Whether the report reproduces the evaluation stored in the model file; None without one."""
    recorded = model.train_meta.get("evaluation")
    if not recorded:
        return None
    return all(recorded.get(name) == report[name] for name in EVALUATED_METRICS)


@cli_errors
def run_eval(
    model_path: ModelFileOption,
    data: DataOption,
    seed: SeedOption = None,
    out: OutOption = cwd / "evaluation",
    party: Annotated[
        Party | None,
        typer.Option("--party", case_sensitive=False, help="Party filter. Defaults to the one recorded at training."),
    ] = None,
    merge_gap: MergeGapOption = None,
    every_interaction: Annotated[
        bool,
        typer.Option(
            "--all/--held-out",
            help="Evaluate on every selected interaction instead of the held-out ones.",
        ),
    ] = False,
) -> None:
    """Evaluates a saved model with balanced resampling and writes the report, confusion matrix and ROC points."""
    model = load_model(model_path)
    meta = model.train_meta
    party = party or Party(meta.get("party", Party.ALL))
    merge_gap_s = merge_gap if merge_gap is not None else meta.get("merge_gap_s")
    eval_seed = seed if seed is not None else int(meta.get("eval_seed", 0))
    corpus = load_corpus(data, layout=model.layout_name, party=party)
    model.check_layout(corpus.layout)
    ids = evaluation_ids(model, corpus.ids, every_interaction=every_interaction)
    prepared = corpus.select(ids).prepared(model.window_config.frame_period_ms, merge_gap_s=merge_gap_s)
    test = select(prepared, ids)
    report = evaluate_model(model, test, eval_seed)
    scores, labels = model_scores(model, test)
    summary = report.to_dict()
    artifacts = [
        write_json(out / f"{model.model_id}-report.json", summary).name,
        write_confusion_csv(out / f"{model.model_id}-confusion.csv", report.confusion).name,
        write_roc_csv(out / f"{model.model_id}-roc.csv", scores, labels).name,
    ]
    reproduced = compare_recorded(model, summary)
    if reproduced is False:
        logger.warning("%s: evaluation differs from the one recorded in %s", model.model_id, model_path.name)
    record = RunRecord(
        command="eval",
        version=package_version(),
        config={
            "model": model_path.name,
            "window_config": model.window_config.to_dict(),
            "party": str(party),
            "merge_gap_s": merge_gap_s,
            "test_ids": ids,
        },
        seeds={"eval": eval_seed},
        layout_hash=model.layout_hash,
        metrics={**{name: summary[name] for name in EVALUATED_METRICS}, "reproduced": reproduced},
        artifacts=artifacts,
    )
    write_run_record(out, record)
    print_json(dumps({name: summary[name] for name in (*EVALUATED_METRICS, "n_windows", "n_resamples")}))


__all__ = ["compare_recorded", "evaluation_ids", "run_eval"]
