"""Seeded Monte Carlo engine for outage sum rates and per-user statistics.

Trials are simulated in fixed-size blocks.  Block ``b`` of grid point ``g``
draws from ``Philox(SeedSequence(master_seed, spawn_key=(g, b)))``, so the
random numbers a trial sees depend only on (master_seed, grid index, trial
index) and never on how blocks are spread over worker processes.  Block
results are concatenated in block order before any reduction.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import channel, config as cfg, geometry, link, ordering
from .config import KPolicy, OmaShare, Ordering, ScenarioConfig, Scheme

log = logging.getLogger(__name__)

BLOCK_TRIALS = 8192
Z95 = 1.96


class ConditioningError(RuntimeError):
    """Every trial was rejected by the user-count policy."""


class SweepError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"grid point {index}: {cause}")


class Statistic(str, enum.Enum):
    FEJER_OF_SELECTED = "fejer-of-selected"
    ABS_ANGLE_OF_SELECTED = "abs-angle-of-selected"


@dataclass(frozen=True)
class TrialOutcome:
    user_count: int
    accepted: bool
    selected_original_indices: tuple[int, ...]   # 1-based, strongest first; empty if rejected
    outage_flags: tuple[bool, ...]
    sinr_own: tuple[float, ...]
    gains: tuple[float, ...]
    achieved_sum_rate_bpcu: float
    scheme: Scheme
    positions: tuple[geometry.UserPosition, ...] = ()


@dataclass(frozen=True)
class SumRateEstimate:
    mean_bpcu: float
    ci_halfwidth_bpcu: float
    trials_used: int
    trials_rejected: int
    outage_freq_per_user: tuple[float, ...]


@dataclass(frozen=True)
class EmpiricalPdf:
    rank: int
    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int
    min_value: float
    max_value: float


@dataclass
class BlockResult:
    user_count: np.ndarray     # (n,)
    accepted: np.ndarray       # (n,) bool
    served: np.ndarray         # (na, R) bool, accepted trials only
    selected: np.ndarray       # (na, R) flat user index within the block, -1 if unserved
    outage: np.ndarray         # (na, R) bool
    sinr_own: np.ndarray       # (na, R)
    gains: np.ndarray          # (na, R)
    sum_rate: np.ndarray       # (na,)
    kernel: np.ndarray         # (na, R) F_M of the selected users
    abs_angle: np.ndarray      # (na, R)
    distances: np.ndarray | None = None   # all users of accepted trials (kept on request)
    angles: np.ndarray | None = None


def block_stream(master_seed: int, grid_index: int, block_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(grid_index, block_index))
    return np.random.Generator(np.random.Philox(seq))


def _served_counts(K: np.ndarray, ranks: np.ndarray, policy: KPolicy) -> np.ndarray:
    available = (ranks[None, :] <= K[:, None]).sum(axis=1)
    if policy is KPolicy.REQUIRE_ALL:
        return np.where(available == len(ranks), available, 0)
    if policy is KPolicy.SINGLE_USER_FALLBACK:
        return available
    # literal reading of the conditioning set: j <= K < i
    literal = (K >= ranks[0]) & (K < ranks[-1])
    return np.where(literal, available, 0)


def _select(keys: np.ndarray, Ka: np.ndarray, offsets: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Flat index of the user at each rank in every trial (-1 where rank > K)."""
    R = len(ranks)
    out = np.full((len(Ka), R), -1, dtype=np.int64)
    for k in np.unique(Ka):
        rows = np.flatnonzero(Ka == k)
        idx = offsets[rows, None] + np.arange(k)
        order = np.argsort(keys[idx], axis=1, kind="stable")
        avail = ranks[ranks <= k]
        picked = np.take_along_axis(order, np.broadcast_to(avail - 1, (len(rows), len(avail))), axis=1)
        out[rows, :len(avail)] = np.take_along_axis(idx, picked, axis=1)
    return out


def simulate_block(config: ScenarioConfig, rng: np.random.Generator, n: int,
                   exact_gain: bool = False, keep_positions: bool = False) -> BlockResult:
    """Simulate ``n`` independent trials.

    Draw order: user counts for all trials, then distances and angles of
    every user in accepted trials, then one fading power per rank per
    accepted trial.
    """
    region, radio, plan = config.region, config.radio, config.plan
    ranks = np.asarray(plan.ordered_user_indices)
    R = len(ranks)
    mu = geometry.mean_user_count(region, config.user_density_per_m2)
    K = np.asarray(geometry.sample_user_count(mu, rng, n))
    served_count = _served_counts(K, ranks, KPolicy(plan.k_policy))
    accepted = served_count > 0
    Ka = K[accepted]
    sa = served_count[accepted]
    na = len(Ka)

    d, theta = geometry.sample_polar(int(Ka.sum()), region, rng)
    offsets = np.concatenate(([0], np.cumsum(Ka)[:-1])).astype(np.int64)
    keys = ordering.ordering_keys(config.ordering, d, theta, region.beam_azimuth_rad,
                                  radio.antenna_count)
    selected = _select(keys, Ka, offsets, ranks)
    served = selected >= 0
    safe = np.where(served, selected, 0)
    sel_d = np.where(served, d[safe] if d.size else 0.0, region.outer_radius_m)
    sel_theta = np.where(served, theta[safe] if theta.size else 0.0, region.beam_azimuth_rad)

    fading = channel.sample_fading(rng, (na, R))
    if exact_gain:
        factor = channel.gain_factor_exact(sel_d, sel_theta, region.beam_azimuth_rad, radio)
    else:
        factor = channel.gain_factor(sel_d, sel_theta, region.beam_azimuth_rad, radio)
    gains = np.where(served, fading * factor, 0.0)

    snr = cfg.snr_budget(radio)
    beta = np.asarray(plan.power_coefficients_sq, dtype=float)
    rates = np.asarray(plan.target_rates_bpcu, dtype=float)
    outage = np.ones((na, R), dtype=bool)
    sinr = np.zeros((na, R))
    sum_rate = np.zeros(na)
    for s in np.unique(sa):
        rows = np.flatnonzero(sa == s)
        b = beta[:s] / beta[:s].sum()
        state = link.LinkState(gains[rows, :s], snr, tuple(b), tuple(rates[:s]))
        if Scheme(config.scheme) is Scheme.NOMA:
            flags = link.noma_outage_flags(state)
        else:
            share = s if OmaShare(plan.oma_share) is OmaShare.SELECTED else Ka[rows]
            flags = link.oma_outage_flags(state, share)
        outage[rows, :s] = flags
        for k in range(1, s + 1):
            sinr[rows, k - 1] = link.sinr_own(state, k)
        sum_rate[rows] = link.trial_sum_rate(flags, rates[:s])

    kernel = channel.fejer_kernel(radio.antenna_count, region.beam_azimuth_rad - sel_theta)
    result = BlockResult(
        user_count=K, accepted=accepted, served=served, selected=selected,
        outage=outage, sinr_own=sinr, gains=gains, sum_rate=sum_rate,
        kernel=np.where(served, kernel, np.nan),
        abs_angle=np.where(served, np.abs(region.beam_azimuth_rad - sel_theta), np.nan),
    )
    if keep_positions:
        result.distances, result.angles = d, theta
    return result


def run_trial(config: ScenarioConfig, trial_rng: np.random.Generator,
              exact_gain: bool = False) -> TrialOutcome:
    """One trial; a rejected draw is reported with ``accepted=False``."""
    res = simulate_block(config, trial_rng, 1, exact_gain=exact_gain, keep_positions=True)
    K = int(res.user_count[0])
    if not res.accepted[0]:
        return TrialOutcome(K, False, (), (), (), (), 0.0, Scheme(config.scheme))
    s = int(res.served[0].sum())
    positions = tuple(geometry.UserPosition(float(a), float(b))
                      for a, b in zip(res.distances, res.angles))
    return TrialOutcome(
        user_count=K, accepted=True,
        selected_original_indices=tuple(int(i) + 1 for i in res.selected[0, :s]),
        outage_flags=tuple(bool(f) for f in res.outage[0, :s]),
        sinr_own=tuple(float(v) for v in res.sinr_own[0, :s]),
        gains=tuple(float(v) for v in res.gains[0, :s]),
        achieved_sum_rate_bpcu=float(res.sum_rate[0]),
        scheme=Scheme(config.scheme),
        positions=positions,
    )


# --- parallel orchestration -------------------------------------------------

def _blocks(trials: int):
    for b, start in enumerate(range(0, trials, BLOCK_TRIALS)):
        yield b, min(BLOCK_TRIALS, trials - start)


def _block_task(args) -> BlockResult:
    config, grid_index, block_index, n, exact_gain = args
    rng = block_stream(config.master_seed, grid_index, block_index)
    return simulate_block(config, rng, n, exact_gain=exact_gain)


def _concat(parts: list[BlockResult]) -> BlockResult:
    return BlockResult(**{
        name: np.concatenate([getattr(p, name) for p in parts])
        for name in ("user_count", "accepted", "served", "selected", "outage",
                     "sinr_own", "gains", "sum_rate", "kernel", "abs_angle")
    })


def _warn_infeasible(configs) -> None:
    seen = set()
    for c in configs:
        plan = c.plan
        key = (plan.power_coefficients_sq, plan.target_rates_bpcu)
        if key in seen or Scheme(c.scheme) is not Scheme.NOMA:
            continue
        seen.add(key)
        margins = link.sic_margins(*key)
        if np.any(margins <= 0):
            log.warning("SIC infeasible for power split %s and rates %s: ranks %s can never "
                        "be decoded", plan.power_coefficients_sq, plan.target_rates_bpcu,
                        (np.flatnonzero(margins <= 0) + 1).tolist())


def simulate(configs: Sequence[ScenarioConfig], grid_indices: Sequence[int] | None = None,
             workers: int = 1, exact_gain: bool = False) -> list[BlockResult]:
    """Run every config and return its concatenated per-trial results.

    ``grid_indices`` defaults to the position in ``configs``; pass explicit
    values to rerun a subset of a larger sweep bit-for-bit.
    """
    configs = [cfg.validate(c) for c in configs]
    if grid_indices is None:
        grid_indices = range(len(configs))
    grid_indices = list(grid_indices)
    _warn_infeasible(configs)
    tasks = [(c, g, b, n, exact_gain)
             for c, g in zip(configs, grid_indices) for b, n in _blocks(c.trials)]
    if workers <= 1 or len(tasks) <= 1:
        parts = [_block_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_task, tasks))
    out, pos = [], 0
    for c in configs:
        nb = sum(1 for _ in _blocks(c.trials))
        out.append(_concat(parts[pos:pos + nb]))
        pos += nb
    return out


def summarize(config: ScenarioConfig, res: BlockResult, unconditional: bool = False) -> SumRateEstimate:
    used = int(res.accepted.sum())
    rejected = len(res.accepted) - used
    if used == 0:
        raise ConditioningError(
            f"all {rejected} trials rejected by policy {KPolicy(config.plan.k_policy).value} "
            f"for ranks {config.plan.ordered_user_indices}")
    values = res.sum_rate
    if unconditional:
        values = np.zeros(len(res.accepted))
        values[res.accepted] = res.sum_rate
    n = len(values)
    mean = float(np.mean(values))
    half = float(Z95 * np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    freq = []
    for r in range(res.outage.shape[1]):
        mask = res.served[:, r]
        freq.append(float(res.outage[mask, r].mean()) if mask.any() else float("nan"))
    return SumRateEstimate(mean, half, used, rejected, tuple(freq))


def estimate_sum_rate(config: ScenarioConfig, grid_index: int = 0, workers: int = 1,
                      exact_gain: bool = False, unconditional: bool = False) -> SumRateEstimate:
    res = simulate([config], [grid_index], workers=workers, exact_gain=exact_gain)[0]
    return summarize(config, res, unconditional)


def sweep(configs: Sequence[ScenarioConfig], workers: int = 1, exact_gain: bool = False,
          unconditional: bool = False) -> list[SumRateEstimate]:
    """Estimate every config; grid index = list position."""
    for i, c in enumerate(configs):
        try:
            cfg.validate(c)
        except cfg.ConfigError as exc:
            raise SweepError(i, exc) from exc
    results = simulate(configs, workers=workers, exact_gain=exact_gain)
    out = []
    for i, (c, res) in enumerate(zip(configs, results)):
        try:
            out.append(summarize(c, res, unconditional))
        except ConditioningError as exc:
            raise SweepError(i, exc) from exc
    return out


def selected_statistic(config: ScenarioConfig, res: BlockResult, statistic: Statistic) -> list[np.ndarray]:
    """Per rank, the statistic's values over trials in which that rank was served."""
    values = res.kernel if Statistic(statistic) is Statistic.FEJER_OF_SELECTED else res.abs_angle
    return [values[res.served[:, r], r] for r in range(values.shape[1])]


def pdf_from_samples(samples: np.ndarray, rank: int, bins: int, value_range) -> EmpiricalPdf:
    densities, edges = np.histogram(samples, bins=bins, range=value_range, density=True)
    return EmpiricalPdf(rank, edges, densities, int(samples.size),
                        float(samples.min()), float(samples.max()))


def statistic_range(config: ScenarioConfig, statistic: Statistic) -> tuple[float, float]:
    if Statistic(statistic) is Statistic.FEJER_OF_SELECTED:
        return 0.0, float(config.radio.antenna_count)
    return 0.0, config.region.horizontal_angle_rad / 2.0


def collect_pdf(config: ScenarioConfig, statistic: Statistic, bins: int = 50,
                grid_index: int = 0, workers: int = 1) -> list[EmpiricalPdf]:
    """Density-normalized histograms of the statistic, one per selected rank."""
    res = simulate([config], [grid_index], workers=workers)[0]
    summarize(config, res)   # raises if nothing was accepted
    lo_hi = statistic_range(config, statistic)
    return [pdf_from_samples(s, rank, bins, lo_hi)
            for rank, s in zip(config.plan.ordered_user_indices,
                               selected_statistic(config, res, statistic)) if s.size]


# --- frozen-geometry oracle -------------------------------------------------

@dataclass(frozen=True)
class OracleRow:
    geometry_index: int
    rank: int
    distance_m: float
    angle_rad: float
    analytic: float
    empirical: float
    sigma: float

    @property
    def passed(self) -> bool:
        if self.sigma == 0.0:
            return self.analytic == self.empirical
        return abs(self.empirical - self.analytic) <= 3.0 * self.sigma


def frozen_geometry(config: ScenarioConfig, rng: np.random.Generator):
    """Positions of len(ranks) users drawn from the region, ordered by the config's criterion."""
    R = len(config.plan.ordered_user_indices)
    positions = geometry.sample_positions(R, config.region, rng)
    ordered = ordering.order_users(positions, config.ordering, config.region.beam_azimuth_rad,
                                   config.radio.antenna_count)
    return [positions[i - 1] for i in ordered.permutation]


def oracle_check(config: ScenarioConfig, positions, trials: int, rng: np.random.Generator,
                 geometry_index: int = 0) -> list[OracleRow]:
    """Fading-only Monte Carlo at fixed positions versus the closed-form tail."""
    plan, radio = config.plan, config.radio
    d = np.array([p.distance_m for p in positions])
    theta = np.array([p.angle_rad for p in positions])
    c = channel.gain_factor(d, theta, config.region.beam_azimuth_rad, radio)
    snr = cfg.snr_budget(radio)
    gains = channel.sample_fading(rng, (trials, len(positions))) * c
    state = link.LinkState(gains, snr, plan.power_coefficients_sq, plan.target_rates_bpcu)
    if Scheme(config.scheme) is Scheme.NOMA:
        flags = link.noma_outage_flags(state)
        p = link.noma_non_outage_probability(c, snr, plan.power_coefficients_sq,
                                             plan.target_rates_bpcu)
    else:
        share = len(positions)
        flags = link.oma_outage_flags(state, share)
        p = link.oma_non_outage_probability(c, snr, plan.target_rates_bpcu, share)
    freq = (~flags).mean(axis=0)
    sigma = np.sqrt(p * (1.0 - p) / trials)
    return [OracleRow(geometry_index, rank, float(d[k]), float(theta[k]), float(p[k]),
                      float(freq[k]), float(sigma[k]))
            for k, rank in enumerate(plan.ordered_user_indices)]
