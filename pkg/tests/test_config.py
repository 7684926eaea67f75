"""limits.json 配置"""

import json

import pytest

from hcsketch.estimator.config import DEFAULT_LIMITS_PATH, Limits, load_limits
from hcsketch.estimator.errors import LimitsConfigError


def test_default_file_matches_builtin():
    assert DEFAULT_LIMITS_PATH.exists()
    assert load_limits() == Limits()


def test_partial_file(tmp_path):
    path = tmp_path / "limits.json"
    path.write_text(json.dumps({"max_copies": 500}), encoding="utf-8")
    limits = load_limits(path)
    assert limits.max_copies == 500
    assert limits.max_edge_size == 8


@pytest.mark.parametrize(
    "payload",
    [
        {"unknown_key": 1},
        {"max_copies": 0},
        {"max_copies": "many"},
        {"max_edge_size": 9},
        {"max_pattern_vertices": 17},
        [1, 2],
    ],
)
def test_invalid_files(tmp_path, payload):
    path = tmp_path / "limits.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(LimitsConfigError):
        load_limits(path)


def test_unparseable_file(tmp_path):
    path = tmp_path / "limits.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(LimitsConfigError):
        load_limits(path)


def test_missing_explicit_file(tmp_path):
    with pytest.raises(LimitsConfigError):
        load_limits(tmp_path / "none.json")


def test_override_ignores_none():
    limits = Limits().override(max_edge_size=None, chunk_edges=16)
    assert limits.max_edge_size == 8
    assert limits.chunk_edges == 16
    with pytest.raises(LimitsConfigError):
        Limits().override(max_edge_size=12)
    assert LimitsConfigError("x").exit_code == 4
