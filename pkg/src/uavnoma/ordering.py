"""Best-to-worst user ordering from limited (distance or angle) feedback."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import fejer_kernel
from .config import Ordering
from .geometry import UserPosition


class InsufficientUsersError(ValueError):
    pass


@dataclass(frozen=True)
class OrderedUsers:
    permutation: tuple[int, ...]   # 1-based original indices, best first
    criterion: Ordering
    keys: tuple[float, ...]        # sort key of each user, in permuted order


def ordering_keys(criterion: Ordering, distances, angles, beam_azimuth_rad: float, M: int):
    """Ascending sort keys: smaller key means better channel.

    Fejer ordering sorts by descending kernel value, so its key is negated.
    """
    criterion = Ordering(criterion)
    if criterion is Ordering.DISTANCE:
        return np.asarray(distances, dtype=float)
    offset = beam_azimuth_rad - np.asarray(angles, dtype=float)
    if criterion is Ordering.ABSOLUTE_ANGLE:
        return np.abs(offset)
    return -np.asarray(fejer_kernel(M, offset), dtype=float)


def order_users(positions: Sequence[UserPosition], criterion: Ordering,
                beam_azimuth_rad: float, M: int) -> OrderedUsers:
    if len(positions) == 0:
        raise InsufficientUsersError("no users to order")
    criterion = Ordering(criterion)
    d = np.array([p.distance_m for p in positions])
    theta = np.array([p.angle_rad for p in positions])
    keys = ordering_keys(criterion, d, theta, beam_azimuth_rad, M)
    perm = np.argsort(keys, kind="stable")   # stable: ties keep original index order
    shown = -keys if criterion is Ordering.FEJER_KERNEL else keys
    return OrderedUsers(tuple(int(i) + 1 for i in perm), criterion,
                        tuple(float(k) for k in shown[perm]))


def select_ranks(ordered: OrderedUsers, ranks: Sequence[int]) -> list[int]:
    """Original indices of the users at the requested 1-based ordered positions."""
    K = len(ordered.permutation)
    missing = [r for r in ranks if r > K]
    if missing:
        raise InsufficientUsersError(f"rank {missing[0]} requested but only {K} users present")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks are 1-based")
    return [ordered.permutation[r - 1] for r in sorted(ranks)]
