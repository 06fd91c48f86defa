"""
End-to-end checks on full-size synthetic corpora.

Deselected by default; run with ``pytest -m slow``.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

import numpy as np
import pytest

from sed_detect.models import FeatureLayout, GeneratorConfig, TrainConfig, WindowConfig
from sed_detect.types import ModelKind
from sed_detect.utilities import (
    PreparedInteraction,
    corpus_kappa,
    cross_validate,
    generate_interactions,
    generate_timelines,
    make_folds,
    prepare_interaction,
)


pytestmark = pytest.mark.slow

N_INTERACTIONS = 120
N_SEEDS = 3
N_CORPORA = 50
CORPUS_SIZE = 20
ETAS = (0.0, 1.0, 2.0, 3.0)


@pytest.fixture(scope="module")
def full_prepared(layout: FeatureLayout) -> list[PreparedInteraction]:
    return [
        prepare_interaction(i.to_interaction(), layout)
        for i in generate_interactions(GeneratorConfig(seed=1), layout, N_INTERACTIONS)
    ]


def mean_auc(
    kind: ModelKind,
    prepared: list[PreparedInteraction],
    layout: FeatureLayout,
    eta_s: float,
    seed: int,
) -> float:
    plan = make_folds([p.interaction_id for p in prepared], 3, seed=seed)
    max_epochs = 1 if kind is ModelKind.LOGREG else 5
    config = TrainConfig(seed=seed, max_epochs=max_epochs)
    results = cross_validate(kind, prepared, plan, layout, WindowConfig(5.0, eta_s), config)
    return float(np.mean([r.report.auc for r in results]))


@pytest.mark.parametrize("kind", [ModelKind.LOGREG, ModelKind.LSTM])
def test_classifiers_beat_chance(
    kind: ModelKind, full_prepared: list[PreparedInteraction], layout: FeatureLayout
):
    assert mean_auc(kind, full_prepared[:30], layout, 2.0, seed=0) > 0.6


def test_buffer_delay_helps_and_lstm_leads(
    full_prepared: list[PreparedInteraction], layout: FeatureLayout
):
    def auc_grid(kind: ModelKind) -> np.ndarray:
        return np.array([
            [mean_auc(kind, full_prepared, layout, eta, seed) for eta in ETAS]
            for seed in range(N_SEEDS)
        ])

    lstm, logreg = auc_grid(ModelKind.LSTM), auc_grid(ModelKind.LOGREG)
    delay_gain = lstm[:, 1:].mean(axis=1) - lstm[:, 0]
    assert delay_gain.mean() > 0.0
    assert delay_gain.mean() > delay_gain.std(ddof=1)
    lead = lstm.mean(axis=1) - logreg.mean(axis=1)
    assert lead.mean() >= 0.0
    assert lead.mean() >= lead.std(ddof=1)


@pytest.mark.parametrize("seed", range(N_CORPORA))
def test_merging_short_gaps_never_lowers_agreement(seed: int):
    timelines = list(generate_timelines(GeneratorConfig(seed=seed), CORPUS_SIZE))
    raw = corpus_kappa([t.labels() for t in timelines])
    merged = corpus_kappa([t.labels(merge_gap_s=1.0) for t in timelines])
    assert 0.4 < raw.overall < 1.0
    assert merged.overall >= raw.overall
