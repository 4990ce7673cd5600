"""User placement: a homogeneous PPP restricted to an annular sector."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import UserRegion


class UserPosition(NamedTuple):
    distance_m: float
    angle_rad: float


def mean_user_count(region: UserRegion, density: float) -> float:
    """Expected number of users in the sector, (L2^2 - L1^2) * (delta / 2) * density."""
    area = (region.outer_radius_m ** 2 - region.inner_radius_m ** 2) * region.horizontal_angle_rad / 2.0
    return area * density


def sample_user_count(mu: float, rng: np.random.Generator, size=None):
    """Poisson(mu) user count(s).

    Uses numpy's generator, which inverts the CDF for mu < 10 and switches to
    Hormann's PTRS transformed rejection above that; both are deterministic
    for a given bit generator state.
    """
    if mu < 0:
        raise ValueError(f"mean user count must be >= 0, got {mu}")
    return rng.poisson(mu, size=size)


def sample_polar(count: int, region: UserRegion, rng: np.random.Generator):
    """Draw ``count`` area-uniform points; returns (distances, angles) arrays.

    Distances come from inverting the area CDF, d = sqrt(L1^2 + U (L2^2 - L1^2)),
    so the radial density grows linearly with d.  Distances are drawn first,
    then angles.
    """
    l1sq = region.inner_radius_m ** 2
    span = region.outer_radius_m ** 2 - l1sq
    d = np.sqrt(l1sq + rng.random(count) * span)
    half = region.horizontal_angle_rad / 2.0
    theta = region.beam_azimuth_rad + rng.uniform(-half, half, count)
    # guard the closed interval against rounding in the two formulas above
    np.clip(d, region.inner_radius_m, region.outer_radius_m, out=d)
    return d, theta


def sample_positions(count: int, region: UserRegion, rng: np.random.Generator) -> list[UserPosition]:
    d, theta = sample_polar(count, region, rng)
    return [UserPosition(float(a), float(b)) for a, b in zip(d, theta)]
