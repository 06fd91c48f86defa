"""
Shared fixtures: a small synthetic corpus and models trained on it.

(c) 2025 Stash AI Inc., All rights reserved.
Licensed under the [Plain Apache License](https://plainlicense.org/licenses/permissive/apache-2-0/).
"""

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from sed_detect.models import DurationSpec, FeatureLayout, GeneratorConfig, TrainConfig, WindowConfig
from sed_detect.types import ModelKind, StreamId
from sed_detect.utilities import (
    ImputationModel,
    NetworkSpec,
    NormalizationModel,
    PreparedInteraction,
    SyntheticInteraction,
    TrainedModel,
    fit_preprocessing,
    generate_corpus,
    generate_interaction,
    generate_interactions,
    init_params,
    prepare_interaction,
    retrieve_layout,
    train_model,
)


N_INTERACTIONS = 6


def small_generator_config(**update: object) -> GeneratorConfig:
    """One-minute interactions with a slow speech stream so corpora stay small."""
    config = GeneratorConfig(
        seed=7,
        duration=DurationSpec(mean_s=60.0, sd_s=10.0, minimum_s=40.0),
        segments_per_interaction=2.0,
        sed_fraction=0.2,
        stream_rates_hz={
            StreamId.DISTANCE: 5.0,
            StreamId.GAZE: 10.0,
            StreamId.HEAD: 10.0,
            StreamId.FACE: 10.0,
            StreamId.SPEECH: 20.0,
        },
    )
    return config.model_copy(update=update) if update else config


def zero_model(layout: FeatureLayout, window_config: WindowConfig) -> TrainedModel:
    """Logistic regression with zero weights: every window scores exactly 0.5."""
    dim = layout.pooled_dim
    spec = NetworkSpec(ModelKind.LOGREG, dim, window_config.n_rows)
    return TrainedModel(
        spec=spec,
        window_config=window_config,
        layout_hash=layout.layout_hash,
        layout_name=layout.name,
        params={"w": np.zeros(spec.flat_dim), "b": np.zeros(1)},
        imputation=ImputationModel(np.zeros(dim)),
        normalization=NormalizationModel(np.zeros(dim), np.ones(dim)),
    )


def random_model(
    layout: FeatureLayout, window_config: WindowConfig, kind: ModelKind, training: list[PreparedInteraction]
) -> TrainedModel:
    """Untrained model with seeded random weights and preprocessing fitted on ``training``."""
    imputation, normalization = fit_preprocessing(training, layout)
    spec = NetworkSpec(kind, layout.pooled_dim, window_config.n_rows, (8, 2), dropout=0.0)
    rng = np.random.default_rng(0)
    params = init_params(spec, rng)
    if kind is ModelKind.LOGREG:
        params = {name: rng.normal(scale=0.05, size=p.shape) for name, p in params.items()}
    return TrainedModel(
        spec=spec,
        window_config=window_config,
        layout_hash=layout.layout_hash,
        layout_name=layout.name,
        params=params,
        imputation=imputation,
        normalization=normalization,
    )


@pytest.fixture(scope="session")
def layout() -> FeatureLayout:
    return retrieve_layout("openface")


@pytest.fixture(scope="session")
def generator_config() -> GeneratorConfig:
    return small_generator_config()


@pytest.fixture(scope="session")
def interactions(generator_config: GeneratorConfig, layout: FeatureLayout) -> list[SyntheticInteraction]:
    return list(generate_interactions(generator_config, layout, N_INTERACTIONS))


@pytest.fixture(scope="session")
def interaction(generator_config: GeneratorConfig, layout: FeatureLayout) -> SyntheticInteraction:
    return generate_interaction(generator_config, layout, "synth-0000")


@pytest.fixture(scope="session")
def prepared(interactions: list[SyntheticInteraction], layout: FeatureLayout) -> list[PreparedInteraction]:
    return [prepare_interaction(i.to_interaction(), layout) for i in interactions]


@pytest.fixture(scope="session")
def corpus_dir(
    tmp_path_factory: pytest.TempPathFactory, generator_config: GeneratorConfig, layout: FeatureLayout
) -> Path:
    out = tmp_path_factory.mktemp("corpus")
    generate_corpus(generator_config, layout, N_INTERACTIONS, out)
    return out


@pytest.fixture(scope="session")
def small_train_config() -> TrainConfig:
    return TrainConfig(seed=3, max_epochs=2, hidden_sizes=(8, 2), patience=2)


@pytest.fixture(scope="session")
def lstm_model(
    prepared: list[PreparedInteraction], layout: FeatureLayout, small_train_config: TrainConfig
) -> TrainedModel:
    return train_model(ModelKind.LSTM, prepared[:4], layout, WindowConfig(2.0, 1.0), small_train_config)


@pytest.fixture(scope="session")
def logreg_model(
    prepared: list[PreparedInteraction], layout: FeatureLayout, small_train_config: TrainConfig
) -> TrainedModel:
    return train_model(ModelKind.LOGREG, prepared[:4], layout, WindowConfig(1.0, 0.5), small_train_config)


@pytest.fixture
def make_generator_config() -> Callable[..., GeneratorConfig]:
    return small_generator_config


@pytest.fixture
def make_zero_model() -> Callable[[FeatureLayout, WindowConfig], TrainedModel]:
    return zero_model


@pytest.fixture
def make_random_model() -> Callable[
    [FeatureLayout, WindowConfig, ModelKind, list[PreparedInteraction]], TrainedModel
]:
    return random_model
