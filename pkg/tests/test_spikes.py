import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from locspike.spikes import (LocationOrder, ShapeError, as_spikes, builtin_orders, from_events,
                             inverse_location_view, location_view, pad_suffix, resolve_order,
                             to_events)

# 1-based listings as published for the 39-taxel fingertip
ARCH = [11, 25, 35, 4, 18, 30, 7, 2, 20, 37, 29, 12, 9, 33, 23, 16, 1, 6, 15, 21, 27, 34, 39,
        24, 17, 10, 31, 38, 28, 14, 3, 22, 32, 8, 19, 36, 5, 13, 26]
WHORL = [21, 15, 16, 23, 27, 24, 17, 6, 9, 12, 20, 29, 33, 34, 31, 28, 22, 14, 10, 1, 2, 7, 18,
         30, 37, 39, 38, 32, 19, 8, 3, 4, 11, 25, 35, 36, 26, 13, 5]


def test_from_events_empty():
    x = from_events([], 4, 3)
    assert x.shape == (4, 3) and x.sum() == 0


def test_from_events_duplicates_collapse():
    x = from_events([(0, 0), (0, 0), (3, 2)], 4, 3)
    assert x[0, 0] == 1 and x[3, 2] == 1 and x.sum() == 2


@pytest.mark.parametrize("ev", [(5, 1), (0, 3), (-1, 0)])
def test_from_events_range_error_names_event(ev):
    with pytest.raises(ValueError, match=f"taxel={ev[0]}, step={ev[1]}"):
        from_events([ev], 4, 3)


def test_tensors_are_read_only():
    x = from_events([(0, 0)], 2, 2)
    with pytest.raises(ValueError):
        x[0, 0] = 0


def test_as_spikes_rejects_non_binary():
    with pytest.raises(ValueError):
        as_spikes([[0, 2]])
    with pytest.raises(ShapeError):
        as_spikes([0, 1])


def test_events_round_trip(rng):
    x = (rng.random((7, 9)) < 0.3).astype(np.uint8)
    assert np.array_equal(from_events(to_events(x), 7, 9), x)


def test_builtin_orders_verbatim():
    o = builtin_orders()
    assert set(o) == {"arch", "whorl", "loop"}
    assert o["arch"].one_based() == ARCH
    assert o["whorl"].one_based() == WHORL
    assert o["loop"].one_based() == list(range(1, 40))
    for order in o.values():
        assert sorted(order.order) == list(range(39))


def test_order_must_be_permutation():
    with pytest.raises(ValueError):
        LocationOrder((0, 0, 1))
    with pytest.raises(ValueError):
        LocationOrder((1, 2, 3))


def test_location_view_identity_is_transpose(rng):
    x = (rng.random((39, 6)) < 0.3).astype(np.uint8)
    v = location_view(x, builtin_orders()["loop"], sensors=1)
    assert np.array_equal(v, x.T)


def test_location_view_arch_first_entry():
    x = from_events([(10, 0)], 39, 4)  # 1-based taxel 11 -> index 10
    v = location_view(x, builtin_orders()["arch"], sensors=1)
    assert v.shape == (4, 39)
    assert v[0, 0] == 1 and v.sum() == 1


def test_location_view_blockwise_two_sensors():
    arch = builtin_orders()["arch"]
    x = from_events([(39 + 10, 2)], 78, 3)  # sensor 1, 1-based taxel 11
    v = location_view(x, arch, sensors=2)
    assert v[2, 39] == 1 and v.sum() == 1


def test_location_view_rejects_partial_sensor():
    with pytest.raises(ShapeError):
        location_view(np.zeros((40, 3), np.uint8), builtin_orders()["whorl"])
    with pytest.raises(ShapeError):
        location_view(np.zeros((78, 3), np.uint8), builtin_orders()["whorl"], sensors=1)


@pytest.mark.parametrize("name", ["arch", "whorl", "loop"])
def test_location_view_round_trip_78(rng, name):
    order = builtin_orders()[name]
    for _ in range(20):
        x = (rng.random((78, 10)) < 0.3).astype(np.uint8)
        v = location_view(x, order, sensors=2)
        assert v.sum() == x.sum()
        assert np.array_equal(inverse_location_view(v, order), x)


@given(arrays(np.uint8, st.tuples(st.sampled_from([39, 78]), st.integers(1, 8)),
              elements=st.integers(0, 1)),
       st.sampled_from(["arch", "whorl", "loop"]))
def test_location_view_bijection(x, name):
    order = builtin_orders()[name]
    v = location_view(x, order)
    assert np.array_equal(inverse_location_view(v, order), x)


def test_resolve_order():
    assert resolve_order("arch", 78) is not None
    assert resolve_order("loop", 16).order == tuple(range(16))
    with pytest.raises(ShapeError):
        resolve_order("arch", 16)
    with pytest.raises(ValueError):
        resolve_order("spiral", 39)


def test_pad_suffix_cases():
    x = np.ones((2, 3), np.uint8)
    p = pad_suffix(x, 5)
    assert p.shape == (5, 3)
    assert p[:2].all() and not p[2:].any()
    assert np.array_equal(pad_suffix(x, 2), x)
    assert pad_suffix(np.zeros((0, 3), np.uint8), 4).shape == (4, 3)
    with pytest.raises(ShapeError):
        pad_suffix(x, 1)


@given(arrays(np.uint8, st.tuples(st.integers(0, 6), st.integers(1, 5)), elements=st.integers(0, 1)),
       st.integers(0, 5))
def test_pad_suffix_preserves_count(x, extra):
    p = pad_suffix(x, x.shape[0] + extra)
    assert p.sum() == x.sum()
