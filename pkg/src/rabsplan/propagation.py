"""mmWave link budget: LoS probability, LoS/NLoS mixture path loss, per-RB rates.

All functions accept scalars or numpy arrays of distances. Path loss is
returned as a linear gain in (0, 1] for d >= 1 m; ``pathloss_db`` gives the
positive attenuation in dB.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .scenario import RadioParams

SPEED_OF_LIGHT = 299_792_458.0


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def _check_distance(d):
    arr = np.asarray(d, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("distance must be strictly positive")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def free_space_reference(radio: RadioParams) -> float:
    """Free-space gain at 1 m, ``(c / (4 pi f_c))**2``."""
    return (SPEED_OF_LIGHT / (4.0 * math.pi * radio.carrier_frequency_hz)) ** 2


def noise_psd_w_per_hz(radio: RadioParams) -> float:
    return 10.0 ** (radio.noise_psd_dbm_per_hz / 10.0) / 1000.0


def los_probability(d):
    d_arr = _check_distance(d)
    decay = np.exp(-d_arr / 36.0)
    p = np.minimum(18.0 / d_arr, 1.0) * (1.0 - decay) + decay
    return _out(p, d)


def pathloss(d, radio: RadioParams):
    """Mean path gain, weighting LoS and NLoS power laws by the LoS probability."""
    d_arr = _check_distance(d)
    beta = free_space_reference(radio)
    p = np.asarray(los_probability(d_arr))
    gain = p * beta * d_arr ** (-radio.los_exponent) + (1.0 - p) * beta * d_arr ** (-radio.nlos_exponent)
    return _out(gain, d)


def pathloss_db(d, radio: RadioParams):
    return _out(-linear_to_db(pathloss(d, radio)), d)


def _snr(d, radio: RadioParams, antenna_gain_linear: float):
    noise_w = noise_psd_w_per_hz(radio) * radio.rb_bandwidth_hz
    return radio.per_rb_tx_power_w * np.asarray(pathloss(d, radio)) * antenna_gain_linear / noise_w


def backhaul_snr(d, radio: RadioParams):
    """SNR of a beam-aligned backhaul link (gain G at both ends)."""
    g = float(db_to_linear(radio.main_lobe_gain_db))
    return _out(_snr(d, radio, g * g), d)


def access_snr(d, radio: RadioParams):
    g = float(db_to_linear(radio.main_lobe_gain_db))
    return _out(_snr(d, radio, g), d)


def backhaul_unit_rate(d, radio: RadioParams):
    """Rate of one RB on a backhaul link of length ``d``, capped at ``w0 * SE_max``."""
    se = np.log2(1.0 + np.asarray(backhaul_snr(d, radio)))
    rate = radio.rb_bandwidth_hz * np.minimum(radio.se_max_bps_per_hz, se)
    return _out(rate, d)


def access_unit_rate(cell_radius_m, radio: RadioParams):
    """Worst-case (cell-edge) rate of one access RB."""
    if np.any(~(np.asarray(cell_radius_m, dtype=float) > 0)):
        raise DomainError("cell radius must be strictly positive")
    se = np.log2(1.0 + np.asarray(access_snr(cell_radius_m, radio)))
    if radio.cap_access_se:
        se = np.minimum(radio.se_max_bps_per_hz, se)
    return _out(radio.rb_bandwidth_hz * se, cell_radius_m)


@dataclass(frozen=True)
class LinkBudget:
    distance_m: float
    los_probability: float
    pathloss_linear: float
    pathloss_db: float
    snr_linear: float
    unit_rate_bps: float
    access_snr_linear: float
    access_unit_rate_bps: float

    def to_dict(self):
        return asdict(self)


def link_budget(d: float, radio: RadioParams) -> LinkBudget:
    """Full budget at distance ``d``: backhaul figures plus the access rate at that radius."""
    gain = pathloss(d, radio)
    return LinkBudget(
        distance_m=float(d),
        los_probability=los_probability(d),
        pathloss_linear=gain,
        pathloss_db=float(-linear_to_db(gain)),
        snr_linear=backhaul_snr(d, radio),
        unit_rate_bps=backhaul_unit_rate(d, radio),
        access_snr_linear=access_snr(d, radio),
        access_unit_rate_bps=access_unit_rate(d, radio),
    )
