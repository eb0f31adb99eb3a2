"""Laser generation on g-n while an external field drives m-n.

The external field adds a spectral structure ``alpha`` to the threshold
condition: a Bennett "spike" at ``Omega_mu = -k_mu Omega / k`` and an
interference "spike" at ``+k_mu Omega / k``. Everything here is first order
in G^2, so the widths are the unsaturated ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Config, ConfigError


class DegenerateWidth(ConfigError):
    pass


class RegimeWarning(UserWarning):
    pass


VALIDITY_MARGIN = 10.0


def validity_gate(config: Config, margin: float = VALIDITY_MARGIN) -> list[str]:
    """Check that the g-n saturation is unaffected by the external field.

    Returns a (possibly empty) list of warnings; never raises.
    """
    rates, ens = config.rates, config.ensemble
    G, G_mu, gam = config.strong.G, config.probe.G_mu, rates.Gamma
    dmn = abs(ens.population("m") - ens.population("n"))
    dgn = abs(ens.population("g") - ens.population("n"))
    out = []
    if margin * dmn * G**2 / gam**2 >= dgn and G > 0:
        out.append("|N_m - N_n| G^2/Gamma^2 is not << |N_g - N_n|")
    if margin * dmn * G**4 / gam**4 >= dgn * G_mu**2 / gam**2 and G > 0:
        out.append("|N_m - N_n| G^4/Gamma^4 is not << |N_g - N_n| G_mu^2/Gamma^2")
    return out


@dataclass(frozen=True)
class GenerationWidths:
    gamma0: float
    gamma_plus: float


def widths(config: Config) -> GenerationWidths:
    rates, r = config.rates, config.ratio
    gam = rates.Gamma
    ggn, ggm = rates.width("g", "n"), rates.width("g", "m")
    g0 = ggn + r * gam
    if r < 1.0:
        gp = ggm * r + (1.0 - r) * ggn
    else:
        gp = ggm + (r - 1.0) * gam
    return GenerationWidths(g0, gp)


def _lor(width, x):
    return width**2 / (width**2 + x**2)


@dataclass(frozen=True)
class AlphaParts:
    bennett: np.ndarray
    interference: np.ndarray

    @property
    def total(self):
        return self.bennett + self.interference


def alpha_structure(Omega_mu, config: Config) -> AlphaParts:
    """External-field term added to the threshold population difference."""
    rates, strong, ens = config.rates, config.strong, config.ensemble
    w = widths(config)
    r = config.ratio
    gam, gn = rates.Gamma, rates.level("n")
    collisional = gam + rates.width("g", "n") - rates.width("g", "m")
    if collisional <= 0:
        raise DegenerateWidth("Gamma + Gamma_gn - Gamma_gm must be positive")
    om = np.asarray(Omega_mu, dtype=float)
    shift = r * strong.Omega
    front = r * (ens.population("m") - ens.population("n")) * strong.G**2
    branching = 1.0 - rates.decay("m", "n") / rates.level("m")
    g0, gp = w.gamma0, w.gamma_plus
    bennett = front * branching / (gn * g0) * (_lor(g0, om + shift) + _lor(g0, om - shift))
    d = om - shift
    interference = front / collisional * (gp / (gp**2 + d**2) - g0 / (g0**2 + d**2))
    return AlphaParts(bennett, interference)


@dataclass(frozen=True)
class GenerationPoint:
    Omega_mu: np.ndarray
    power: np.ndarray
    above_threshold: np.ndarray
    alpha: np.ndarray
    I_minus: np.ndarray
    I_plus: np.ndarray
    Omega_r: np.ndarray


def _spike_front(config: Config):
    ens, rates = config.ensemble, config.rates
    w = widths(config)
    dng = ens.population("n") - ens.population("g")
    return (
        (ens.population("m") - ens.population("n")) / dng * config.ratio
        * config.strong.G**2 / (rates.level("n") * w.gamma0)
    )


def spikes(Omega_mu, config: Config, warn: bool = True):
    """(I_minus, I_plus): the two narrow structures of the power curve.

    Assumes collision-free widths, Gamma + Gamma_gn - Gamma_gm = Gamma_n;
    a RegimeWarning is issued otherwise.
    """
    rates = config.rates
    gn = rates.level("n")
    collisional = rates.Gamma + rates.width("g", "n") - rates.width("g", "m")
    if warn and abs(collisional - gn) > 1e-9 * gn:
        warnings.warn("spike formulas assume Gamma + Gamma_gn - Gamma_gm = Gamma_n", RegimeWarning)
    w = widths(config)
    om = np.asarray(Omega_mu, dtype=float)
    shift = config.ratio * config.strong.Omega
    b = rates.decay("m", "n") / rates.level("m")
    front = _spike_front(config)
    i_minus = front * (1.0 - b) * _lor(w.gamma0, om + shift)
    i_plus = front * (w.gamma0 / w.gamma_plus * _lor(w.gamma_plus, om - shift) - b * _lor(w.gamma0, om - shift))
    return i_minus, i_plus


def saturation_factor(config: Config) -> float:
    """Gamma_n Gamma_g Gamma_ng / (Gamma_n + Gamma_g - gamma_ng)."""
    rates = config.rates
    gn, gg = rates.level("n"), rates.level("g")
    return gn * gg * rates.width("n", "g") / (gn + gg - rates.decay("n", "g"))


def power(Omega_mu, config: Config) -> GenerationPoint:
    """Generation intensity G_mu^2 versus probe detuning (0 below threshold)."""
    if config.resonator is None:
        raise ConfigError("generation needs a [resonator] section")
    ens, rates = config.ensemble, config.rates
    om = np.asarray(Omega_mu, dtype=float)
    dgn = ens.population("g") - ens.population("n")
    alpha = alpha_structure(om, config).total
    doppler = np.exp((om / (config.probe.k_mu * ens.v_bar)) ** 2)
    gain = 1.0 - (config.resonator.Delta_N * doppler + alpha) / dgn
    gng = rates.width("n", "g")
    hole = 1.0 + gng**2 / (gng**2 + om**2)
    raw = saturation_factor(config) * gain / hole
    above = gain > 0
    i_minus, i_plus = spikes(om, config, warn=False)
    return GenerationPoint(
        Omega_mu=om,
        power=np.where(above, raw, 0.0),
        above_threshold=above,
        alpha=alpha,
        I_minus=i_minus,
        I_plus=i_plus,
        Omega_r=resonator_map(om, config, warn=False),
    )


def phi(Omega_mu, config: Config):
    """Dispersion of the external-field structure (enters the frequency condition)."""
    rates, strong = config.rates, config.strong
    w = widths(config)
    r = config.ratio
    om = np.asarray(Omega_mu, dtype=float)
    shift = r * strong.Omega
    gng = rates.width("n", "g")
    gn = rates.level("n")
    g0, gp = w.gamma0, w.gamma_plus
    b = rates.decay("m", "n") / rates.level("m")
    hole = 2.0 * gng**2 + om**2
    collisional = rates.Gamma + gng - rates.width("g", "m")
    lo, hi = om + shift, om - shift
    bennett = (1.0 - b) / gn * (
        (lo - g0 * gng * om / hole) / (g0**2 + lo**2) + (hi - g0 * gng * om / hole) / (g0**2 + hi**2)
    )
    interference = (
        (hi - gp * gng * om / hole) / (gp**2 + hi**2) - (hi - g0 * gng * om / hole) / (g0**2 + hi**2)
    ) / collisional
    return bennett + interference


def resonator_map(Omega_mu, config: Config, warn: bool = True):
    """Resonator detuning Omega_r = omega_r - omega_gn that produces generation at Omega_mu.

    Collects frequency pulling (Doppler-broadened gain), repulsion from the
    Lamb dip and the external-field dispersion ``phi``.
    """
    res, ens, rates = config.resonator, config.ensemble, config.rates
    if res is None:
        raise ConfigError("resonator_map needs a [resonator] section")
    om = np.asarray(Omega_mu, dtype=float)
    kvb = config.strong.k * ens.v_bar
    if warn and np.any(np.abs(om) > 0.1 * config.probe.k_mu * ens.v_bar):
        warnings.warn("resonator map assumes |Omega_mu| << k_mu v_bar", RegimeWarning)
    excess = (ens.population("g") - ens.population("n")) / res.Delta_N
    gng = rates.width("n", "g")
    pulling = 2.0 / math.sqrt(math.pi) * excess * om / kvb
    repulsion = (excess - 1.0) * om * gng / (2.0 * gng**2 + om**2)
    external = (
        config.ratio * config.strong.G**2
        * (ens.population("m") - ens.population("n")) / res.Delta_N * phi(om, config)
    )
    return om + res.l_over_lr * res.delta_omega_r / 2.0 * (pulling - repulsion - external)


@dataclass(frozen=True)
class PullingSlope:
    slope: float
    stabilizing: bool
    warnings: tuple[str, ...]


def pulling_slope(config: Config, which: str = "+") -> PullingSlope:
    """d Omega_mu / d Omega_r at the spike centre Omega_mu = +-k_mu Omega / k.

    For a purely radiative scheme with gamma_mn << Gamma_m and
    Gamma_ng << Omega << k_mu v_bar the map near the spike reduces to a
    dispersion curve of width Gamma_+ (``"+"``) or Gamma_0 (``"-"``), whose
    slope inverts to ``1 / (1 - C)`` with
    ``C = dw_r l/l_r (N_m - N_n)/dN k_mu/k G^2 / (2 Gamma_n width^2)``.
    A slope below one (N_m < N_n) stabilizes the generation frequency.
    """
    if which not in ("+", "-"):
        raise ValueError("which must be '+' or '-'")
    res, ens, rates = config.resonator, config.ensemble, config.rates
    if res is None:
        raise ConfigError("pulling_slope needs a [resonator] section")
    w = widths(config)
    width = w.gamma_plus if which == "+" else w.gamma0
    c = (
        res.delta_omega_r / (2.0 * width) * res.l_over_lr
        * (ens.population("m") - ens.population("n")) / res.Delta_N
        * config.ratio * config.strong.G**2 / (rates.level("n") * width)
    )
    notes = []
    om, gng = abs(config.strong.Omega), rates.width("n", "g")
    kvb = config.probe.k_mu * ens.v_bar
    if config.strong.G > 0:
        if not (VALIDITY_MARGIN * gng <= om and VALIDITY_MARGIN * om <= kvb):
            notes.append("needs Gamma_ng << Omega << k_mu v_bar")
        if rates.decay("m", "n") * VALIDITY_MARGIN > rates.level("m"):
            notes.append("needs gamma_mn << Gamma_m")
    for n in notes:
        warnings.warn(n, RegimeWarning)
    slope = 1.0 / (1.0 - c)
    return PullingSlope(slope=slope, stabilizing=slope < 1.0, warnings=tuple(notes))
