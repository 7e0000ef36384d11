import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypererg import streams
from hypererg.errors import ConfigError


@given(st.integers(min_value=1, max_value=10_000), st.integers(min_value=1, max_value=64))
def test_split_partitions_n(n, w):
    sizes = streams.split(n, w)
    assert sum(sizes) == n
    assert len(sizes) == min(n, w)
    assert max(sizes) - min(sizes) <= 1
    assert sizes == sorted(sizes, reverse=True)


def test_substreams_are_reproducible_and_distinct():
    a = streams.substream(7, 1, 0).random(5)
    b = streams.substream(7, 1, 0).random(5)
    c = streams.substream(7, 1, 1).random(5)
    d = streams.substream(8, 1, 0).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5, "3", True])
def test_seed_range(seed):
    with pytest.raises(ConfigError):
        streams.check_seed(seed)


def test_seed_extremes():
    assert streams.check_seed(0) == 0
    assert streams.check_seed(2**64 - 1) == 2**64 - 1
    streams.substream(2**64 - 1, 3).random()


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv(streams.WORKERS_ENV, raising=False)
    assert streams.resolve_workers(None) == 1
    monkeypatch.setenv(streams.WORKERS_ENV, "3")
    assert streams.resolve_workers(None) == 3
    assert streams.resolve_workers(2) == 2
    monkeypatch.setenv(streams.WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        streams.resolve_workers(None)
    with pytest.raises(ConfigError):
        streams.resolve_workers(0)


def _square(x):
    return x * x


def test_run_ordered_keeps_task_order():
    assert streams.run_ordered(_square, list(range(6)), 1) == [0, 1, 4, 9, 16, 25]
    assert streams.run_ordered(_square, list(range(6)), 3) == [0, 1, 4, 9, 16, 25]
