"""Both kernel backends must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from staircase import kernels

sorted_levels = st.lists(st.integers(0, 10**6), max_size=40, unique=True).map(
    lambda xs: np.array(sorted(xs), dtype=np.int64))


@given(sorted_levels, st.lists(st.integers(1, 50), min_size=1, max_size=8))
def test_refine_parity(levels, gaps):
    top = int(levels.max()) + 1 if len(levels) else 1
    offsets = np.cumsum([0] + [top + g for g in gaps[:-1]]).astype(np.int64)
    a = kernels.refine_numba(levels, offsets)
    b = kernels.refine_numpy(levels, offsets)
    assert a.tolist() == b.tolist()
    assert np.all(np.diff(a) > 0)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=10), st.integers(1, 20), st.data())
def test_descend_parity(spacers, h, data):
    sizes = [h + 1 + s for s in spacers]
    offsets = np.cumsum([0] + sizes[:-1]).astype(np.int64)
    total = sum(sizes)
    levels = np.array(sorted(data.draw(st.sets(st.integers(0, total - 1)))), dtype=np.int64)
    for x, y in zip(kernels.descend_numba(levels, offsets, h), kernels.descend_numpy(levels, offsets, h)):
        assert x.tolist() == y.tolist()


@given(st.lists(st.integers(-5, 60), max_size=30), sorted_levels.map(lambda a: a % 61))
def test_count_parity(query, table):
    table = np.unique(table)
    q = np.array(query, dtype=np.int64)
    assert kernels.count_in_sorted_numba(q, table) == kernels.count_in_sorted_numpy(q, table)
    assert kernels.count_in_sorted_numpy(q, table) == sum(1 for x in query if x in set(table.tolist()))


@given(st.lists(st.booleans(), min_size=1, max_size=30), st.lists(st.integers(0, 4), min_size=1, max_size=6))
def test_stack_parity(ind, spacers):
    a = np.array(ind, dtype=bool)
    s = np.array(spacers, dtype=np.int64)
    assert kernels.stack_numba(a, s).tolist() == kernels.stack_numpy(a, s).tolist()


@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40), st.integers(0, 50))
@settings(max_examples=200)
def test_shifted_overlap_parity(cells, m):
    a = np.array([c[0] for c in cells], dtype=bool)
    b = np.array([c[1] for c in cells], dtype=bool)
    assert kernels.shifted_overlap_numba(a, b, m) == kernels.shifted_overlap_numpy(a, b, m)


def test_object_arrays_take_numpy_path():
    big = 2**70
    levels = kernels.as_level_array([0, 1], big)
    offsets = kernels.as_level_array([0, big], big)
    assert levels.dtype == object
    assert kernels.refine(levels, offsets).tolist() == [0, 1, big, big + 1]
    cols, local, inside = kernels.descend(np.array([big + 1], dtype=object), offsets, 5)
    assert cols.tolist() == [1] and local.tolist() == [1] and inside.tolist() == [True]


def test_backend_flag(monkeypatch):
    monkeypatch.setenv("STAIRCASE_ACCEL", "numpy")
    assert kernels._select_backend() == "numpy"
    monkeypatch.setenv("STAIRCASE_ACCEL", "gpu")
    with pytest.raises(ValueError):
        kernels._select_backend()
