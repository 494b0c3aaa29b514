import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kcore_ocs.metrics import (CSV_COLUMNS, ExperimentRecord, approx_ratio, normalized_weighted_cct,
                               percentile_cct, records_to_csv, records_to_jsonl, total_weighted_cct)


def test_total_weighted():
    assert total_weighted_cct([3, 7], [1, 2]) == 17
    assert total_weighted_cct([], []) == 0
    assert total_weighted_cct([1.5, 2.5, 4], [1, 1, 1]) == 8
    with pytest.raises(ValueError):
        total_weighted_cct([1, 2], [1])


def test_normalized():
    assert normalized_weighted_cct(5.0, 5.0) == 1
    assert normalized_weighted_cct(4.3356 * 7, 7) == pytest.approx(4.3356)
    assert normalized_weighted_cct(0.9156 * 7, 7) == pytest.approx(0.9156)
    with pytest.raises(ZeroDivisionError):
        normalized_weighted_cct(1.0, 0.0)


def test_percentiles():
    vals = np.random.default_rng(0).permutation(np.arange(1, 101)).astype(float)
    assert percentile_cct(vals, 95) == 95 and percentile_cct(vals, 99) == 99
    assert percentile_cct([4.2], 95) == percentile_cct([4.2], 99) == 4.2
    assert percentile_cct([3.0] * 7, 95) == 3.0
    assert percentile_cct([1, 2, 3], 95) == 3
    with pytest.raises(ValueError):
        percentile_cct([], 95)


@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=200))
def test_tail_monotone(values):
    assert percentile_cct(values, 99) >= percentile_cct(values, 95) >= percentile_cct(values, 50)


def test_approx_ratio():
    assert approx_ratio(3.0, 3.0) == 1
    assert approx_ratio(0.0, 0.0) == 1
    with pytest.raises(ZeroDivisionError):
        approx_ratio(1.0, 0.0)


def _rec(**kw):
    base = dict(scheme="OURS", K=3, N=10, M=5, delay=8.0, rates=(10.0, 20.0, 30.0), seed=1,
                release_policy="zero", total_weighted_cct=12.5, normalized_weighted_cct=1.0,
                p95_cct=3.0, p99_cct=4.0, approx_ratio=2.0, lp_bound=6.25, runtime_seconds=0.1)
    base.update(kw)
    return ExperimentRecord(**base)


def test_csv_columns_and_runtime_flag():
    text = records_to_csv([_rec(), _rec(scheme="BVN-S", approx_ratio=None)])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("OURS,3,10,5,8.0,10.0 20.0 30.0,1,zero,ocs,,12.5,1.0")
    assert "runtime_seconds" not in text
    assert "runtime_seconds" in records_to_csv([_rec()], with_runtime=True)


def test_jsonl():
    rows = [json.loads(x) for x in records_to_jsonl([_rec(), _rec(seed=2)]).splitlines()]
    assert [r["seed"] for r in rows] == [1, 2] and rows[0]["rates"] == [10.0, 20.0, 30.0]
    assert "runtime_seconds" not in rows[0]
