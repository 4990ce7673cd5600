import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from uavnoma.channel import fejer_kernel
from uavnoma.config import Ordering
from uavnoma.geometry import UserPosition
from uavnoma.ordering import InsufficientUsersError, order_users, select_ranks

M = 100


def at(offsets, distance=90.0):
    # beam at 0, so the offset is -angle; sign does not matter for either angle key
    return [UserPosition(distance, -x) for x in offsets]


def test_distance_plain_sort():
    users = [UserPosition(d, 0.0) for d in (5.0, 3.0, 4.0)]
    out = order_users(users, Ordering.DISTANCE, 0.0, M)
    assert out.permutation == (2, 3, 1)
    assert out.keys == (3.0, 4.0, 5.0)


def test_fejer_main_lobe():
    assert order_users(at([0.001, 0.005, 0.003]), Ordering.FEJER_KERNEL, 0.0, M).permutation == (1, 3, 2)


def test_fejer_and_angle_agree_inside_main_lobe():
    users = at([0.001, 0.025])
    assert order_users(users, Ordering.FEJER_KERNEL, 0.0, M).permutation == (1, 2)
    assert order_users(users, Ordering.ABSOLUTE_ANGLE, 0.0, M).permutation == (1, 2)


def test_fejer_and_angle_disagree_across_first_null():
    users = at([0.021, 0.030])
    assert fejer_kernel(M, 0.021) < fejer_kernel(M, 0.030)
    assert order_users(users, Ordering.FEJER_KERNEL, 0.0, M).permutation == (2, 1)
    assert order_users(users, Ordering.ABSOLUTE_ANGLE, 0.0, M).permutation == (1, 2)


def test_ties_keep_original_order():
    users = [UserPosition(90.0, 0.01), UserPosition(90.0, -0.01), UserPosition(90.0, 0.01)]
    assert order_users(users, Ordering.ABSOLUTE_ANGLE, 0.0, M).permutation == (1, 2, 3)
    assert order_users(users, Ordering.DISTANCE, 0.0, M).permutation == (1, 2, 3)


def test_empty_input():
    with pytest.raises(InsufficientUsersError):
        order_users([], Ordering.DISTANCE, 0.0, M)


def test_select_ranks_picks_ordered_positions():
    rng = np.random.default_rng(0)
    users = [UserPosition(float(d), 0.0) for d in rng.permutation(30) + 85.0]
    ordered = order_users(users, Ordering.DISTANCE, 0.0, M)
    picked = select_ranks(ordered, [20, 25])
    assert [users[i - 1].distance_m for i in picked] == [85.0 + 19, 85.0 + 24]


def test_select_single_user():
    ordered = order_users([UserPosition(90.0, 0.0)], Ordering.FEJER_KERNEL, 0.0, M)
    assert select_ranks(ordered, [1]) == [1]


def test_select_rank_beyond_count():
    ordered = order_users(at(np.linspace(0, 0.01, 24)), Ordering.FEJER_KERNEL, 0.0, M)
    with pytest.raises(InsufficientUsersError):
        select_ranks(ordered, [20, 25])


positions = st.lists(st.tuples(st.floats(85, 100), st.floats(-0.05, 0.05)), min_size=1, max_size=40)


@given(positions, st.sampled_from(Ordering), st.floats(-0.01, 0.01))
def test_permutation_is_bijection_with_monotone_keys(pts, criterion, beam):
    users = [UserPosition(d, t) for d, t in pts]
    out = order_users(users, criterion, beam, M)
    assert sorted(out.permutation) == list(range(1, len(users) + 1))
    keys = np.array(out.keys)
    if criterion is Ordering.FEJER_KERNEL:
        assert np.all(np.diff(keys) <= 0)
    else:
        assert np.all(np.diff(keys) >= 0)


@given(st.lists(st.floats(0.0, 0.95 * 2 / M), min_size=1, max_size=30, unique=True),
       st.lists(st.booleans(), min_size=30, max_size=30))
def test_fejer_equals_angle_inside_main_lobe(mags, signs):
    mags = sorted(mags)
    assume(all(b - a > 1e-6 for a, b in zip(mags, mags[1:])))
    rng = np.random.default_rng(len(mags))
    mags = list(rng.permutation(mags))
    users = at([m if s else -m for m, s in zip(mags, signs)])
    assert order_users(users, Ordering.FEJER_KERNEL, 0.0, M).permutation == \
        order_users(users, Ordering.ABSOLUTE_ANGLE, 0.0, M).permutation


@given(positions)
def test_distance_order_ignores_angle(pts):
    users = [UserPosition(d, t) for d, t in pts]
    moved = [UserPosition(d, 0.0) for d, _ in pts]
    assert order_users(users, Ordering.DISTANCE, 0.0, M).permutation == \
        order_users(moved, Ordering.DISTANCE, 0.0, M).permutation
