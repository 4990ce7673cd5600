"""Scenario parameterization: geometry, radio, NOMA plan, policy knobs.

Configs are plain frozen dataclasses.  ``validate`` checks every invariant and
reports all violations at once; ``config_from_dict``/``config_to_dict`` map
to the key/value tree used by the YAML config files.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

import yaml

SUM_TOLERANCE = 1e-12


class Ordering(str, enum.Enum):
    DISTANCE = "distance"
    FEJER_KERNEL = "fejer-kernel"
    ABSOLUTE_ANGLE = "absolute-angle"


class Scheme(str, enum.Enum):
    NOMA = "noma"
    OMA = "oma"


class KPolicy(str, enum.Enum):
    """How a trial is treated when fewer users exist than the largest rank."""

    REQUIRE_ALL = "require-all"
    SINGLE_USER_FALLBACK = "fallback"
    PAPER_LITERAL = "paper-literal"


class SteeringNorm(str, enum.Enum):
    """Scaling of the steering vector inside the sqrt(M)-scaled LoS channel.

    ``unit-modulus``: entries of a(theta) have modulus one, so a matched
    unit-norm beam collects M * |alpha|^2 * F_M / PL.  ``unit-norm``: a(theta)
    is scaled to unit norm and the gain is |alpha|^2 * F_M / PL.
    """

    UNIT_MODULUS = "unit-modulus"
    UNIT_NORM = "unit-norm"


class OmaShare(str, enum.Enum):
    """Who splits the OMA time resource: the served users or everyone in the beam."""

    SELECTED = "selected"
    ALL_USERS = "all-users"


@dataclass(frozen=True)
class UserRegion:
    inner_radius_m: float = 85.0
    outer_radius_m: float = 100.0
    horizontal_angle_rad: float = math.radians(5.0)
    beam_azimuth_rad: float = 0.0


@dataclass(frozen=True)
class RadioParams:
    antenna_count: int = 100
    tx_power_dbm: float = 20.0
    noise_dbm: float = -35.0
    pathloss_exponent: float = 2.0
    altitude_m: float = 10.0
    antenna_spacing_wavelengths: float = 0.5
    steering_norm: SteeringNorm = SteeringNorm.UNIT_MODULUS


@dataclass(frozen=True)
class NomaPlan:
    ordered_user_indices: tuple[int, ...] = (20, 25)
    power_coefficients_sq: tuple[float, ...] = (0.25, 0.75)
    target_rates_bpcu: tuple[float, ...] = (6.0, 0.5)
    k_policy: KPolicy = KPolicy.REQUIRE_ALL
    oma_share: OmaShare = OmaShare.SELECTED


@dataclass(frozen=True)
class ScenarioConfig:
    region: UserRegion = field(default_factory=UserRegion)
    radio: RadioParams = field(default_factory=RadioParams)
    plan: NomaPlan = field(default_factory=NomaPlan)
    user_density_per_m2: float = 1.0
    ordering: Ordering = Ordering.FEJER_KERNEL
    scheme: Scheme = Scheme.NOMA
    trials: int = 100_000
    master_seed: int = 20180101


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


class ConfigError(ValueError):
    """Raised when a config violates one or more invariants.

    ``violations`` holds one entry per broken invariant, each naming the field.
    """

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def fields(self) -> list[str]:
        return [v.field for v in self.violations]


def _check_region(region: UserRegion) -> list[Violation]:
    out = []
    if region.inner_radius_m < 0:
        out.append(Violation("region.inner_radius_m", "must be >= 0"))
    if not region.inner_radius_m < region.outer_radius_m:
        out.append(Violation("region.outer_radius_m",
                             "inner radius must be < outer radius"))
    if not 0 < region.horizontal_angle_rad <= 2 * math.pi:
        out.append(Violation("region.horizontal_angle_rad", "must lie in (0, 2*pi]"))
    if not math.isfinite(region.beam_azimuth_rad):
        out.append(Violation("region.beam_azimuth_rad", "must be finite"))
    return out


def _check_radio(radio: RadioParams) -> list[Violation]:
    out = []
    if not isinstance(radio.antenna_count, int) or radio.antenna_count < 1:
        out.append(Violation("radio.antenna_count", "must be an integer >= 1"))
    if not radio.pathloss_exponent > 0:
        out.append(Violation("radio.pathloss_exponent", "must be > 0"))
    if not radio.altitude_m >= 0:
        out.append(Violation("radio.altitude_m", "must be >= 0"))
    if not radio.antenna_spacing_wavelengths > 0:
        out.append(Violation("radio.antenna_spacing_wavelengths", "must be > 0"))
    try:
        SteeringNorm(radio.steering_norm)
    except ValueError:
        out.append(Violation("radio.steering_norm", f"unknown value {radio.steering_norm!r}"))
    for name in ("tx_power_dbm", "noise_dbm"):
        if not math.isfinite(getattr(radio, name)):
            out.append(Violation(f"radio.{name}", "must be finite"))
    return out


def _check_plan(plan: NomaPlan) -> list[Violation]:
    out = []
    ranks = plan.ordered_user_indices
    betas = plan.power_coefficients_sq
    rates = plan.target_rates_bpcu
    if len(ranks) == 0:
        out.append(Violation("plan.ordered_user_indices", "must not be empty"))
    if any(not isinstance(r, int) or r < 1 for r in ranks):
        out.append(Violation("plan.ordered_user_indices", "ranks must be positive integers"))
    elif any(b <= a for a, b in zip(ranks, ranks[1:])):
        out.append(Violation("plan.ordered_user_indices", "ranks must be strictly increasing"))
    if not len(ranks) == len(betas) == len(rates):
        out.append(Violation("plan.power_coefficients_sq",
                             "ranks, power coefficients and target rates must have equal length"))
    if any(b < 0 for b in betas):
        out.append(Violation("plan.power_coefficients_sq", "coefficients must be >= 0"))
    if betas and abs(math.fsum(betas) - 1.0) > SUM_TOLERANCE:
        out.append(Violation("plan.power_coefficients_sq",
                             f"coefficients must sum to 1 (got {math.fsum(betas)!r})"))
    if any(b < a for a, b in zip(betas, betas[1:])):
        out.append(Violation("plan.power_coefficients_sq",
                             "coefficients must be nondecreasing from strongest to weakest user"))
    if any(not r > 0 for r in rates):
        out.append(Violation("plan.target_rates_bpcu", "target rates must be > 0"))
    return out


def validate(config: ScenarioConfig) -> ScenarioConfig:
    """Return ``config`` unchanged if all invariants hold, else raise ConfigError."""
    violations = (_check_region(config.region) + _check_radio(config.radio)
                  + _check_plan(config.plan))
    if not config.user_density_per_m2 > 0:
        violations.append(Violation("user_density_per_m2", "must be > 0"))
    if not isinstance(config.trials, int) or config.trials < 1:
        violations.append(Violation("trials", "must be an integer >= 1"))
    if not isinstance(config.master_seed, int) or not 0 <= config.master_seed < 2**64:
        violations.append(Violation("master_seed", "must be an unsigned 64-bit integer"))
    if violations:
        raise ConfigError(violations)
    return config


def snr_budget(radio: RadioParams) -> float:
    """Transmit-power-to-noise ratio P_Tx/N0 as a linear quantity."""
    return 10.0 ** ((radio.tx_power_dbm - radio.noise_dbm) / 10.0)


def epsilons(target_rates_bpcu) -> tuple[float, ...]:
    """SINR thresholds 2**R - 1 for each target rate."""
    return tuple(2.0 ** r - 1.0 for r in target_rates_bpcu)


# --- serialization ---------------------------------------------------------

_ENUMS = {"ordering": Ordering, "scheme": Scheme}
_PLAN_ENUMS = {"k_policy": KPolicy, "oma_share": OmaShare}
# Angles may be given in degrees; they are converted to radians once, here.
_DEGREE_ALIASES = {"horizontal_angle_deg": "horizontal_angle_rad",
                   "beam_azimuth_deg": "beam_azimuth_rad"}


def _unknown(section: str, keys, allowed) -> None:
    extra = sorted(set(keys) - set(allowed))
    if extra:
        where = f"{section}." if section else ""
        raise ConfigError([Violation(f"{where}{k}", "unknown key") for k in extra])


def _region_from(d: Mapping[str, Any]) -> UserRegion:
    names = [f.name for f in fields(UserRegion)]
    _unknown("region", d, names + list(_DEGREE_ALIASES))
    kw = {}
    for key, value in d.items():
        if key in _DEGREE_ALIASES:
            target = _DEGREE_ALIASES[key]
            if target in d:
                raise ConfigError([Violation(f"region.{key}",
                                             f"give either {key} or {target}, not both")])
            kw[target] = math.radians(float(value))
        else:
            kw[key] = float(value)
    return UserRegion(**kw)


def _radio_from(d: Mapping[str, Any]) -> RadioParams:
    _unknown("radio", d, [f.name for f in fields(RadioParams)])
    kw: dict[str, Any] = {}
    for key, value in d.items():
        if key == "steering_norm":
            kw[key] = _enum(SteeringNorm, value, "radio.steering_norm")
        elif key == "antenna_count":
            kw[key] = value
        else:
            kw[key] = float(value)
    return RadioParams(**kw)


def _enum(kind, value, where):
    try:
        return kind(value)
    except ValueError:
        choices = ", ".join(m.value for m in kind)
        raise ConfigError([Violation(where, f"{value!r} is not one of: {choices}")]) from None


def _plan_from(d: Mapping[str, Any]) -> NomaPlan:
    _unknown("plan", d, [f.name for f in fields(NomaPlan)])
    kw: dict[str, Any] = {}
    for key, value in d.items():
        if key in _PLAN_ENUMS:
            kw[key] = _enum(_PLAN_ENUMS[key], value, f"plan.{key}")
        elif key == "ordered_user_indices":
            kw[key] = tuple(value)
        else:
            kw[key] = tuple(float(v) for v in value)
    return NomaPlan(**kw)


def config_from_dict(d: Mapping[str, Any]) -> ScenarioConfig:
    """Build (but do not validate) a ScenarioConfig from a key/value tree."""
    _unknown("", d, [f.name for f in fields(ScenarioConfig)])
    kw: dict[str, Any] = {}
    for key, value in d.items():
        if key == "region":
            kw[key] = _region_from(value or {})
        elif key == "radio":
            kw[key] = _radio_from(value or {})
        elif key == "plan":
            kw[key] = _plan_from(value or {})
        elif key in _ENUMS:
            kw[key] = _enum(_ENUMS[key], value, key)
        elif key == "user_density_per_m2":
            kw[key] = float(value)
        else:
            kw[key] = value
    return ScenarioConfig(**kw)


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    """Inverse of config_from_dict; angles are written in radians so round trips are exact."""
    def plain(obj):
        out = {}
        for f in fields(obj):
            value = getattr(obj, f.name)
            if isinstance(value, enum.Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            elif hasattr(value, "__dataclass_fields__"):
                value = plain(value)
            out[f.name] = value
        return out
    return plain(config)


def dumps(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def loads(text: str) -> ScenarioConfig:
    return config_from_dict(yaml.safe_load(text) or {})


def with_overrides(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """``dataclasses.replace`` that also accepts dotted nested names, e.g. ``radio.altitude_m``."""
    nested: dict[str, dict[str, Any]] = {}
    top = {}
    for key, value in changes.items():
        head, _, rest = key.replace("__", ".").partition(".")
        if rest:
            nested.setdefault(head, {})[rest] = value
        else:
            top[key] = value
    for head, sub in nested.items():
        top[head] = replace(getattr(config, head), **sub)
    return replace(config, **top)
