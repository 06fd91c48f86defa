import json

from pathlib import Path
from typing import Any

import pytest

from typer.testing import CliRunner

from sed_detect import get_layout, get_layouts
from sed_detect.__main__ import app
from sed_detect.models import DECISION_SCHEMA, GeneratorConfig
from sed_detect.utilities import write_json


runner = CliRunner()


def invoke(*args: str | Path) -> Any:
    result = runner.invoke(app, [str(a) for a in args])
    assert result.exit_code == 0, result.output
    return result


def run_record(out: Path, command: str) -> dict[str, Any]:
    return json.loads((out / f"run-{command}.json").read_text())


@pytest.fixture(scope="module")
def workdir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def corpus(workdir: Path, generator_config: GeneratorConfig) -> Path:
    config = write_json(workdir / "generator.json", generator_config)
    out = workdir / "corpus"
    invoke("synth", "-n", "6", "-c", config, "-o", out)
    return out


@pytest.fixture(scope="module")
def trained(workdir: Path, corpus: Path) -> Path:
    out = workdir / "models"
    invoke("train", "-d", corpus, "-m", "logreg", "--tau", "1", "--eta", "0.5", "-k", "3", "--epochs", "1", "-o", out)
    return out


def test_synth_writes_a_corpus_and_its_run_record(corpus: Path):
    manifest = json.loads((corpus / "manifest.json").read_text())
    assert len(manifest["interactions"]) == 6
    record = run_record(corpus, "synth")
    assert record["seeds"] == {"generator": 7}
    assert record["metrics"]["interactions"] == 6
    assert record["layout_hash"] == get_layout("openface").layout_hash


def test_train_saves_one_model_per_fold(trained: Path):
    names = sorted(p.name for p in trained.glob("logreg-tau1-eta0.5-fold*.json"))
    assert names == [f"logreg-tau1-eta0.5-fold{k}.json" for k in range(3)]
    assert (trained / "logreg-tau1-eta0.5-confusion.csv").exists()
    metrics = run_record(trained, "train")["metrics"]
    assert len(metrics["folds"]) == 3
    assert 0.0 <= metrics["mean_auc"] <= 1.0


def test_eval_reproduces_the_training_evaluation(workdir: Path, corpus: Path, trained: Path):
    out = workdir / "evaluation"
    invoke("eval", "-m", trained / "logreg-tau1-eta0.5-fold0.json", "-d", corpus, "-o", out)
    record = run_record(out, "eval")
    assert record["metrics"]["reproduced"] is True
    train_fold = run_record(trained, "train")["metrics"]["folds"][0]
    assert record["metrics"]["auc"] == train_fold["auc"]
    assert (out / "logreg-tau1-eta0.5-roc.csv").exists()


def test_detect_replays_the_corpus(workdir: Path, corpus: Path, trained: Path):
    out = workdir / "decisions"
    invoke("detect", "-m", trained / "logreg-tau1-eta0.5-fold1.json", "--data", corpus, "-o", out)
    lines = (out / "logreg-tau1-eta0.5-decisions.jsonl").read_text().splitlines()
    header = json.loads(lines[0])
    assert header["schema"] == DECISION_SCHEMA
    decisions = [json.loads(line) for line in lines[1:]]
    assert len(decisions) == run_record(out, "detect")["metrics"]["decisions"]
    first = decisions[0]
    assert first["frame"] == 2
    assert first["labeled_t_ms"] == first["t_ms"] - 500
    assert "compute_ms" not in first


def test_detect_replays_one_stream_file(workdir: Path, corpus: Path, trained: Path):
    out = workdir / "single"
    stream_file = corpus / "streams" / "synth-0000.jsonl"
    model = trained / "logreg-tau1-eta0.5-fold2.json"
    invoke("detect", "-m", model, "--streams", stream_file, "--report-latency", "-o", out)
    lines = (out / "logreg-tau1-eta0.5-decisions.jsonl").read_text().splitlines()
    decisions = [json.loads(line) for line in lines[1:]]
    assert {d["interaction"] for d in decisions} == {"synth-0000"}
    assert all(d["compute_ms"] >= 0.0 for d in decisions)


def test_detect_needs_a_source(workdir: Path, trained: Path):
    model = trained / "logreg-tau1-eta0.5-fold0.json"
    result = runner.invoke(app, ["detect", "-m", str(model), "-o", str(workdir / "none")])
    assert result.exit_code == 2
    assert "error[config]" in result.output


def test_kappa_reports_raw_and_merged_agreement(workdir: Path, corpus: Path):
    out = workdir / "kappa"
    invoke("kappa", "-d", corpus, "--merge-gap", "1.0", "-o", out)
    payload = json.loads((out / "kappa.json").read_text())
    assert payload["merge_gap_s"] == 1.0
    metrics = run_record(out, "kappa")["metrics"]
    assert -1.0 <= metrics["kappa"] <= 1.0
    assert "kappa_merged" in metrics


def test_stats_counts_every_track(workdir: Path, corpus: Path):
    out = workdir / "stats"
    invoke("stats", "-d", corpus, "-o", out)
    stats = json.loads((out / "stats.json").read_text())
    assert 0.0 < stats["sed_fraction"] < 1.0
    assert run_record(out, "stats")["metrics"] == stats


def test_contrast_writes_every_coordinate(workdir: Path, corpus: Path):
    out = workdir / "contrast"
    invoke("contrast", "-d", corpus, "--top", "5", "-o", out)
    rows = (out / "contrast.csv").read_text().splitlines()
    assert len(rows) == 1 + get_layout("openface").pooled_dim
    assert run_record(out, "contrast")["metrics"]["coordinates"] == len(rows) - 1


def test_sweep_skips_cells_with_a_longer_buffer(workdir: Path, corpus: Path):
    out = workdir / "sweep"
    invoke("sweep", "-d", corpus, "-m", "logreg", "--tau", "0", "--tau", "1", "--eta", "0", "--eta", "1", "-k", "2", "-o", out)
    rows = (out / "sweep.csv").read_text().splitlines()
    cells = [row.split(",")[:3] for row in rows[1:]]
    assert cells == [["logreg", "0.0", "0.0"], ["logreg", "1.0", "0.0"], ["logreg", "1.0", "1.0"]]


def test_sweep_rejects_an_unknown_metric(corpus: Path):
    result = runner.invoke(app, ["sweep", "-d", str(corpus), "--metric", "precision"])
    assert result.exit_code == 2
    assert "error[config]" in result.output


def test_get_data_exports_the_packaged_files(workdir: Path):
    out = workdir / "data"
    invoke("get-data", "--destination", out)
    catalog = json.loads((out / "layouts.json").read_text())
    assert set(get_layouts().layouts) <= set(catalog["layouts"])
    assert GeneratorConfig.model_validate_json((out / "generator.json").read_text()) == GeneratorConfig()
