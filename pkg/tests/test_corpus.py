import math

from pathlib import Path

import numpy as np
import pytest

from sed_detect.models import FeatureLayout
from sed_detect.types import ConfigError, StreamError, StreamId
from sed_detect.utilities import (
    StreamSample,
    is_record,
    read_jsonl,
    read_stream_file,
    write_stream_file,
)


def test_is_record_accepts_json_objects_only():
    assert is_record({"t_ms": 0})
    assert not is_record([1, 2])
    assert not is_record("sample")
    assert not is_record(None)


def test_read_jsonl_rejects_lines_that_are_not_objects(tmp_path: Path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"t_ms": 0}\n\n[1, 2]\n', encoding="utf-8")
    with pytest.raises(ConfigError, match=":3: expected a JSON object"):
        list(read_jsonl(path))


def test_stream_file_keeps_missing_values(tmp_path: Path, layout: FeatureLayout):
    samples = [
        StreamSample.from_record(0, "gaze", [0.1, None, 1.0]),
        StreamSample.from_record(100, "gaze", [0.2, -0.3, 0.0]),
        StreamSample.from_record(50, "distance", [1.2, 1.1, 0.0, 0.1, 1.5, 1.0]),
    ]
    path = tmp_path / "streams.jsonl"
    assert write_stream_file(path, "session-1", samples) == 3
    interaction_id, series = read_stream_file(path, layout)
    assert interaction_id == "session-1"
    assert set(series) == {StreamId.GAZE, StreamId.DISTANCE}
    gaze = series[StreamId.GAZE].values
    assert math.isnan(gaze[0, 1])
    assert np.array_equal(gaze[1], [0.2, -0.3, 0.0])


def test_stream_file_rejects_unknown_streams(tmp_path: Path, layout: FeatureLayout):
    path = tmp_path / "streams.jsonl"
    path.write_text('{"t_ms": 0, "stream": "sonar", "values": [1.0]}\n', encoding="utf-8")
    with pytest.raises(StreamError, match="unknown stream"):
        read_stream_file(path, layout)
