# sourcery skip: avoid-global-variables
"""
`train.py` module. - Command for training and cross-validating one classifier.

Interactions are split into k folds; for every fold a model is trained on the other folds (imputation and normalization statistics included) and evaluated on the held-out one with balanced resampling. Each fold model is saved together with its test interactions and its evaluation, so `sed eval` can reproduce the numbers from the model file alone.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from dataclasses import replace
from pathlib import Path
from typing import Annotated, Any

import typer

from sed_detect.models import RunRecord, TrainConfig, WindowConfig
from sed_detect.types import (
    ConfigOption,
    DataOption,
    EtaOption,
    FoldsOption,
    LayoutOption,
    MergeGapOption,
    ModelKind,
    ModelKindOption,
    OutOption,
    Party,
    PartyOption,
    SeedOption,
    TauOption,
)
from sed_detect.utilities import (
    ConfusionMatrix,
    FoldResult,
    TrainedModel,
    cli_errors,
    cross_validate,
    load_config,
    load_corpus,
    make_folds,
    package_version,
    save_model,
    train_model,
    write_confusion_csv,
    write_run_record,
)


cwd = Path.cwd()


def fold_model(result: FoldResult, *, eval_seed: int, data_meta: dict[str, Any]) -> TrainedModel:
    """The fold's model with its test interactions and evaluation recorded in ``train_meta``."""
    meta = {
        **result.model.train_meta,
        **data_meta,
        "fold": result.fold,
        "test_ids": list(result.test_ids),
        "eval_seed": eval_seed,
        "evaluation": {
            "accuracy": result.report.accuracy,
            "f1": result.report.f1,
            "auc": result.report.auc,
        },
    }
    return replace(result.model, train_meta=meta)


def summarize(results: list[FoldResult]) -> dict[str, Any]:
    """Per-fold and mean metrics for the run record."""
    folds = [
        {"fold": r.fold, "accuracy": r.report.accuracy, "f1": r.report.f1, "auc": r.report.auc}
        for r in results
    ]
    return {
        "folds": folds,
        **{
            f"mean_{name}": sum(fold[name] for fold in folds) / len(folds)
            for name in ("accuracy", "f1", "auc")
        },
    }


@cli_errors
def run_train(
    data: DataOption,
    kind: ModelKindOption = ModelKind.LSTM,
    tau: TauOption = 5.0,
    eta: EtaOption = 2.0,
    folds: FoldsOption = 3,
    seed: SeedOption = None,
    config_path: ConfigOption = None,
    out: OutOption = cwd / "models",
    layout: LayoutOption = None,
    party: PartyOption = Party.ALL,
    merge_gap: MergeGapOption = None,
    epochs: Annotated[
        int | None, typer.Option("--epochs", min=1, help="Maximum training epochs (overrides the configuration).")
    ] = None,
    full: Annotated[
        bool,
        typer.Option("--full/--no-full", help="Also train one model on every selected interaction."),
    ] = False,
) -> None:
    """Cross-validates a classifier at one (tau, eta) setting and saves the fold models."""
    config = load_config(TrainConfig, config_path, seed=seed, max_epochs=epochs)
    corpus = load_corpus(data, layout=layout, party=party)
    window_config = WindowConfig(tau, eta)
    prepared = corpus.prepared(window_config.frame_period_ms, merge_gap_s=merge_gap)
    plan = make_folds(corpus.ids, folds, config.seed)
    results = cross_validate(kind, prepared, plan, corpus.layout, window_config, config)
    data_meta = {"party": str(party), "merge_gap_s": merge_gap}
    artifacts: list[str] = []
    confusion = ConfusionMatrix()
    for result in results:
        model = fold_model(result, eval_seed=config.seed, data_meta=data_meta)
        path = save_model(out / f"{model.model_id}-fold{result.fold}.json", model)
        artifacts.append(path.name)
        confusion += result.report.confusion
    artifacts.append(write_confusion_csv(out / f"{kind}-{window_config}-confusion.csv", confusion).name)
    if full:
        model = train_model(kind, prepared, corpus.layout, window_config, config)
        model = replace(model, train_meta={**model.train_meta, **data_meta})
        artifacts.append(save_model(out / f"{model.model_id}.json", model).name)
    metrics = summarize(results)
    record = RunRecord(
        command="train",
        version=package_version(),
        config={
            "model": str(kind),
            "window_config": window_config.to_dict(),
            "folds": plan.to_dict(),
            "party": str(party),
            "merge_gap_s": merge_gap,
            "train": config.model_dump(mode="json", by_alias=True),
        },
        seeds={"train": config.seed, "folds": plan.seed, "eval": config.seed},
        layout_hash=corpus.layout.layout_hash,
        metrics=metrics,
        artifacts=artifacts,
    )
    write_run_record(out, record)
    typer.echo(
        f"{kind} {window_config}: accuracy {100 * metrics['mean_accuracy']:.2f}, "
        f"F1 {metrics['mean_f1']:.3f}, AUC {metrics['mean_auc']:.3f} over {len(results)} folds"
    )
    typer.echo(f"Models saved to {out!s}")


__all__ = ["fold_model", "run_train", "summarize"]
