import math

import pytest

from pydantic import ValidationError

from sed_detect.models import (
    AnnotationHeader,
    CorpusManifest,
    FeatureLayout,
    ManifestEntry,
    Segment,
    TrainConfig,
    WindowConfig,
    engagement_zone,
)
from sed_detect.types import ConfigError, LayoutError, StreamId
from sed_detect.utilities import retrieve_catalog, retrieve_layout


def test_packaged_layout_dimensions():
    assert retrieve_layout("openface").pooled_dim == 96
    assert retrieve_layout("okao").pooled_dim == 72
    assert retrieve_layout().name == "openface"


def test_pooled_names_follow_mean_then_variance_blocks(layout: FeatureLayout):
    names = layout.pooled_names
    assert len(names) == layout.pooled_dim
    assert names[layout.mean_slice(StreamId.DISTANCE)][0] == "distance.sonar_front.mean"
    assert names[layout.var_slice(StreamId.DISTANCE)][0] == "distance.sonar_front.var"
    speech = names[layout.mean_slice(StreamId.SPEECH)]
    assert len(speech) == 19
    assert all(name.endswith(".mean") for name in speech)


def test_layout_hash_ignores_the_name(layout: FeatureLayout):
    renamed = FeatureLayout.from_mapping("renamed", layout.to_mapping())
    assert renamed.layout_hash == layout.layout_hash
    assert retrieve_layout("okao").layout_hash != layout.layout_hash


def test_layout_rejects_unknown_or_missing_streams(layout: FeatureLayout):
    mapping = layout.to_mapping()
    with pytest.raises(LayoutError):
        FeatureLayout.from_mapping("bad", {**mapping, "smell": ["x"]})
    del mapping["gaze"]
    with pytest.raises(LayoutError):
        FeatureLayout.from_mapping("bad", mapping)


def test_catalog_lists_both_layouts():
    catalog = retrieve_catalog()
    assert {"openface", "okao"} <= set(catalog.layouts)


@pytest.mark.parametrize(
    ("distance", "zone"), [(0.5, 1), (1.49, 1), (1.5, 2), (2.49, 2), (2.5, 3), (7.0, 3), (math.nan, 0), (-1.0, 0)]
)
def test_engagement_zone(distance: float, zone: int):
    assert engagement_zone(distance) == zone


def test_window_config_frames():
    config = WindowConfig(5.0, 2.0)
    assert (config.tau_frames, config.eta_frames, config.n_rows) == (10, 4, 11)
    assert config.label_row == 6
    assert config.eta_ms == 2000
    assert str(config) == "tau5-eta2"
    assert WindowConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize(("tau", "eta"), [(1.0, 2.0), (-0.5, 0.0), (0.3, 0.0), (1.0, 0.25)])
def test_window_config_rejects_invalid_windows(tau: float, eta: float):
    with pytest.raises(ConfigError):
        WindowConfig(tau, eta)


def test_segment_validation():
    segment = Segment(annotator="A1", interaction="x", start_ms=100, end_ms=400, affects=["boredom", "boredom"])
    assert segment.duration_ms == 300
    assert [str(a) for a in segment.affects] == ["boredom"]
    with pytest.raises(ValidationError):
        Segment(annotator="A1", interaction="x", start_ms=400, end_ms=400)


def test_annotation_header_and_manifest_validation():
    with pytest.raises(ValidationError):
        AnnotationHeader(interaction="x", start_ms=10, end_ms=5, annotators=["A1"])
    entry = ManifestEntry(id="x", streams="s.jsonl", annotations="a.jsonl")
    with pytest.raises(ValidationError):
        CorpusManifest(interactions=[entry, entry])


def test_train_config_defaults():
    config = TrainConfig()
    assert config.learning_rate == pytest.approx(1e-3)
    assert config.rho == pytest.approx(0.9)
    assert config.epsilon == pytest.approx(1e-7)
    assert config.clip_norm == pytest.approx(5.0)
    assert config.hidden_sizes == (32, 2)
    assert config.dropout == pytest.approx(0.1)
