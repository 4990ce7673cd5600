"""SIC decoding chain, outage indicators and per-trial outage sum rates.

Users are indexed strongest first with 1-based ranks, matching the power
split beta_1^2 <= ... <= beta_K^2.  Every function broadcasts over leading
batch dimensions of ``gains`` so the engine can evaluate whole blocks of
trials in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import epsilons


class SicOrderError(ValueError):
    pass


@dataclass(frozen=True)
class LinkState:
    gains: np.ndarray                      # (..., R) effective gains, strongest first
    snr_budget: float
    power_coefficients_sq: tuple[float, ...]
    target_rates_bpcu: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=float))
        if not (self.gains.shape[-1] == len(self.power_coefficients_sq)
                == len(self.target_rates_bpcu)):
            raise ValueError("gains, power coefficients and target rates must align")

    @property
    def epsilons(self) -> tuple[float, ...]:
        return epsilons(self.target_rates_bpcu)

    @property
    def size(self) -> int:
        return len(self.power_coefficients_sq)

    def interference_share(self, m: int) -> float:
        """Sum of beta_l^2 over the users stronger than rank m."""
        return float(sum(self.power_coefficients_sq[:m - 1]))


def sinr_cross(state: LinkState, k: int, m: int):
    """SINR at user k when decoding the message of weaker user m (k < m)."""
    if not 1 <= k < m <= state.size:
        raise SicOrderError(f"invalid SIC pair: decoder {k}, message {m}")
    g = state.gains[..., k - 1] * state.snr_budget
    return g * state.power_coefficients_sq[m - 1] / (g * state.interference_share(m) + 1.0)


def sinr_own(state: LinkState, k: int):
    """SINR at user k for its own message once all weaker messages are removed."""
    if not 1 <= k <= state.size:
        raise SicOrderError(f"rank {k} outside 1..{state.size}")
    g = state.gains[..., k - 1] * state.snr_budget
    if k == 1:
        return g * state.power_coefficients_sq[0]
    return g * state.power_coefficients_sq[k - 1] / (g * state.interference_share(k) + 1.0)


def noma_outage_flags(state: LinkState) -> np.ndarray:
    """True where a user is in outage.  All comparisons are strict (SINR > eps)."""
    eps = state.epsilons
    R = state.size
    ok = np.empty(state.gains.shape, dtype=bool)
    for k in range(1, R + 1):
        good = sinr_own(state, k) > eps[k - 1]
        for m in range(k + 1, R + 1):
            good = good & (sinr_cross(state, k, m) > eps[m - 1])
        ok[..., k - 1] = good
    return ~ok


def oma_outage_flags(state: LinkState, share_count) -> np.ndarray:
    """Outage under equal time sharing with full power: log2(1 + g snr) / S < R."""
    share = np.asarray(share_count, dtype=float)
    if np.any(share < 1):
        raise ValueError("share_count must be >= 1")
    if share.ndim:
        share = share[..., None]
    rate = np.log2(1.0 + state.gains * state.snr_budget) / share
    return rate < np.asarray(state.target_rates_bpcu)


def trial_sum_rate(flags, target_rates):
    """Sum of the target rates of users not in outage."""
    flags = np.asarray(flags, dtype=bool)
    rates = np.asarray(target_rates, dtype=float)
    if flags.shape[-1] != rates.shape[-1]:
        raise ValueError("flags and target rates must have equal length")
    out = np.where(flags, 0.0, rates).sum(axis=-1)
    return out if out.ndim else float(out)


def sic_margins(power_coefficients_sq: Sequence[float], target_rates: Sequence[float]) -> np.ndarray:
    """beta_m^2 - eps_m * sum_{l<m} beta_l^2 for every rank m.

    A non-positive margin means message m can never be decoded above its
    threshold, whatever the SNR.
    """
    beta = np.asarray(power_coefficients_sq, dtype=float)
    eps = np.asarray(epsilons(target_rates))
    stronger = np.concatenate(([0.0], np.cumsum(beta)[:-1]))
    return beta - eps * stronger


def noma_non_outage_probability(gain_factors, snr_budget, power_coefficients_sq, target_rates):
    """Closed-form P(no outage) per user when only the fading is random.

    With g_k = X_k c_k and X_k ~ Exp(1), each decoding condition at user k
    reduces to X_k > eps_m / (c_k snr margin_m) for m >= k, so the user
    survives with probability exp(-max_m threshold_m / c_k), or 0 if any
    margin is non-positive.
    """
    c = np.asarray(gain_factors, dtype=float)
    margins = sic_margins(power_coefficients_sq, target_rates)
    eps = np.asarray(epsilons(target_rates))
    with np.errstate(divide="ignore"):
        per_message = np.where(margins > 0, eps / (snr_budget * np.where(margins > 0, margins, 1.0)),
                               np.inf)
    # worst threshold over messages m >= k
    worst = np.maximum.accumulate(per_message[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = np.where(c > 0, worst / np.where(c > 0, c, 1.0), np.inf)
    return np.exp(-exponent)


def oma_non_outage_probability(gain_factors, snr_budget, target_rates, share_count):
    c = np.asarray(gain_factors, dtype=float)
    need = (2.0 ** (np.asarray(target_rates, dtype=float) * share_count) - 1.0) / snr_budget
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = np.where(c > 0, need / np.where(c > 0, c, 1.0), np.inf)
    return np.exp(-exponent)
