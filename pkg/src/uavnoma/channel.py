"""LoS mmWave channel: path loss, Rayleigh fading power and beamformed gain.

Two routes to the post-beamforming gain |h^H b|^2 are provided.  The
Fejer-kernel form is what the simulator uses; the explicit steering-vector
inner product is kept as an independent check on it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import RadioParams, SteeringNorm
from .geometry import UserPosition

# below this |sin(pi x / 2)| the kernel is replaced by its limit value M
SINGULAR_TOL = 1e-9


class ChannelDraw(NamedTuple):
    position: UserPosition
    fading_power: float


def path_loss(distance_m, altitude_m, gamma):
    """1 + (d^2 + h^2)^(gamma/2); vectorizes over numpy arrays."""
    return 1.0 + (np.square(distance_m) + np.square(altitude_m)) ** (gamma / 2.0)


def fejer_kernel(M: int, offset_rad):
    """Normalized Fejer kernel (1/M) * (sin(pi M x / 2) / sin(pi x / 2))^2.

    Peaks at M for x = 0 (and at every zero of the denominator), first null
    at x = 2/M.  Accepts scalars or arrays.
    """
    x = np.asarray(offset_rad, dtype=float)
    half = 0.5 * np.pi * x
    den = np.sin(half)
    singular = np.abs(den) < SINGULAR_TOL
    safe = np.where(singular, 1.0, den)
    value = np.square(np.sin(M * half) / safe) / M
    value = np.where(singular, float(M), value)
    return value if value.ndim else float(value)


def array_scale(radio: RadioParams) -> float:
    """Extra factor M when the steering vector is not normalized (see SteeringNorm)."""
    if SteeringNorm(radio.steering_norm) is SteeringNorm.UNIT_MODULUS:
        return float(radio.antenna_count)
    return 1.0


def gain_factor(distance_m, angle_rad, beam_azimuth_rad, radio: RadioParams):
    """Deterministic part of the approximate gain, scale * F_M(offset) / PL."""
    kernel = fejer_kernel(radio.antenna_count, beam_azimuth_rad - np.asarray(angle_rad))
    pl = path_loss(distance_m, radio.altitude_m, radio.pathloss_exponent)
    return array_scale(radio) * kernel / pl


def effective_gain_approx(draw: ChannelDraw, beam_azimuth_rad: float, radio: RadioParams) -> float:
    d, theta = draw.position
    return float(draw.fading_power * gain_factor(d, theta, beam_azimuth_rad, radio))


def array_factor_exact(M: int, spacing_wavelengths: float, beam_azimuth_rad, angle_rad,
                       chunk: int = 4096):
    """(1/M) |a(theta_k)^H a(theta_bar)|^2 by the explicit M-term sum.

    The steering vector uses the true sine of each angle and any element
    spacing; no small-angle reduction is made.
    """
    angle = np.atleast_1d(np.asarray(angle_rad, dtype=float))
    beam = np.broadcast_to(np.asarray(beam_azimuth_rad, dtype=float), angle.shape)
    phase = 2.0 * np.pi * spacing_wavelengths * (np.sin(angle) - np.sin(beam))
    m = np.arange(M)
    out = np.empty(angle.shape)
    flat_phase = phase.ravel()
    flat_out = out.ravel()
    for start in range(0, flat_phase.size, chunk):
        p = flat_phase[start:start + chunk]
        s = np.exp(1j * np.outer(p, m)).sum(axis=1)
        flat_out[start:start + chunk] = (s.real ** 2 + s.imag ** 2) / M
    out = flat_out.reshape(angle.shape)
    return out if np.ndim(angle_rad) else float(out[0])


def gain_factor_exact(distance_m, angle_rad, beam_azimuth_rad, radio: RadioParams):
    af = array_factor_exact(radio.antenna_count, radio.antenna_spacing_wavelengths,
                            beam_azimuth_rad, angle_rad)
    return array_scale(radio) * af / path_loss(distance_m, radio.altitude_m, radio.pathloss_exponent)


def effective_gain_exact(draw: ChannelDraw, beam_azimuth_rad: float, radio: RadioParams) -> float:
    """|h^H b|^2 for h = sqrt(M) alpha a(theta_k) / sqrt(PL), b = a(theta_bar) / ||a(theta_bar)||.

    With unit-norm steering vectors this is |alpha|^2 / PL * (1/M) |sum|^2;
    unit-modulus entries multiply that by M.
    """
    d, theta = draw.position
    return float(draw.fading_power * gain_factor_exact(d, theta, beam_azimuth_rad, radio))


def sample_fading(rng: np.random.Generator, size=None):
    """|CN(0, 1)|^2, i.e. unit-mean exponential."""
    return rng.standard_exponential(size)
