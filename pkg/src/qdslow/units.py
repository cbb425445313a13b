"""Physical constants and unit handling.

All frequencies are angular frequencies in ps^-1 internally. Energies given in
meV or ueV are converted with hbar; ``Omega0`` is the reference Rabi frequency
6.6 ueV used throughout the figure presets.
"""

import math
import re

import scipy.constants as _sc

from .errors import ConfigError

HBAR_MEV_PS = 0.6582119569
KB_MEV_PER_K = 0.0861733

OMEGA0 = 6.6e-3 / HBAR_MEV_PS  # ps^-1
SPEED_OF_LIGHT_UM_PER_PS = _sc.c * 1e-6  # um/ps


def mev_to_rate(energy_mev):
    return energy_mev / HBAR_MEV_PS


def uev_to_rate(energy_uev):
    return energy_uev * 1e-3 / HBAR_MEV_PS


def rate_to_omega0(rate):
    return rate / OMEGA0


def omega0_to_rate(value):
    return value * OMEGA0


def signal_angular_frequency(lambda_um):
    """Optical angular frequency 2*pi*c/lambda in ps^-1."""
    return 2.0 * math.pi * SPEED_OF_LIGHT_UM_PER_PS / lambda_um


_RATE_UNITS = {
    "ps^-1": 1.0,
    "1/ps": 1.0,
    "mev": 1.0 / HBAR_MEV_PS,
    "uev": 1e-3 / HBAR_MEV_PS,
    "omega0": OMEGA0,
}

_INVERSE_RATE_UNITS = {
    "ps": 1.0,
    "1/omega0": 1.0 / OMEGA0,
    "omega0^-1": 1.0 / OMEGA0,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")


def _split(text, what):
    if isinstance(text, bool) or not isinstance(text, str):
        raise ConfigError(
            f"{what}: expected a string '<number> <unit>', got {text!r} "
            "(an explicit unit suffix is required)")
    m = _QUANTITY.match(text)
    if m is None:
        raise ConfigError(f"{what}: cannot parse quantity {text!r}")
    return float(m.group(1)), m.group(2)


def parse_rate(text, what="frequency"):
    """Parse '3 Omega0', '6.6 ueV', '1 meV' or '0.01 ps^-1' into ps^-1."""
    value, unit = _split(text, what)
    try:
        return value * _RATE_UNITS[unit.lower()]
    except KeyError:
        raise ConfigError(
            f"{what}: unknown unit {unit!r}; use one of ps^-1, meV, ueV, Omega0") from None


def parse_inverse_rate(text, what="inverse frequency"):
    """Parse '0.15 1/Omega0' or '2.0 ps' into ps."""
    value, unit = _split(text, what)
    try:
        return value * _INVERSE_RATE_UNITS[unit.lower()]
    except KeyError:
        raise ConfigError(
            f"{what}: unknown unit {unit!r}; use ps or 1/Omega0") from None


def parse_temperature(value, what="temperature"):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    v, unit = _split(value, what)
    if unit != "K":
        raise ConfigError(f"{what}: temperatures are given in K, got {unit!r}")
    return v


def format_rate_omega0(rate):
    return f"{rate / OMEGA0!r} Omega0"
