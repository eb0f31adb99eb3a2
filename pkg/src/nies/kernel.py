"""Probe power absorbed/emitted by atoms of one velocity (before averaging)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Config, ConfigError
from .steady_state import SaturationState, populations, saturation


class NonpositiveBin(ConfigError):
    pass


@dataclass(frozen=True)
class KernelSample:
    total: np.ndarray
    pop_part: np.ndarray
    coh_part: np.ndarray
    emission_only: np.ndarray
    population_difference: np.ndarray


def w_fixed(v, Omega_mu, config: Config, sat: SaturationState | None = None) -> KernelSample:
    """Probe power density for atoms moving with velocity ``v``.

    Evaluates

        2 P |G_mu|^2 Re{ ([G_pm + i(W_mu' + W')](rho_s - rho_p) - i G r)
                         / ([G_pm + i(W_mu' + W')][G_ps + i W_mu'] + G^2) }

    with ``P = config.prefactor``, the shifted detunings
    ``W' = Omega - k v`` and ``W_mu' = Omega_mu - sigma k_mu v``, and the
    level roles taken from the configured transition (s = shared strong
    level, p = probe partner). ``v`` and ``Omega_mu`` broadcast.

    The population and coherence parts are returned separately;
    ``total == pop_part + coh_part``.
    """
    rates, strong, probe = config.rates, config.strong, config.probe
    b = config.bundle
    if sat is None:
        sat = saturation(rates, strong)
    v = np.asarray(v, dtype=float)
    pops = populations(v, rates, strong, config.ensemble, sat)
    rho = pops.rho

    det = b.detuning_sign * (strong.Omega - strong.k * v)
    det_mu = b.probe_sign * (np.asarray(Omega_mu, dtype=float) - probe.sigma * probe.k_mu * v)

    two_photon = rates.width(b.partner, b.other) + 1j * (det_mu + det)
    step = rates.width(b.partner, b.shared) + 1j * det_mu
    denom = two_photon * step + strong.G**2

    rho_s = rho[b.shared]
    rho_p = rho.get(b.partner, np.zeros_like(v))
    coherence = 1j * strong.G * (rho[b.other] - rho[b.shared]) / (rates.Gamma + 1j * det)

    scale = 2.0 * config.prefactor * probe.G_mu**2
    pop = scale * np.real(two_photon * (rho_s - rho_p) / denom)
    coh = scale * np.real(-1j * strong.G * coherence / denom)
    emission = scale * np.real((two_photon * rho_s - 1j * strong.G * coherence) / denom)
    return KernelSample(
        total=pop + coh,
        pop_part=pop,
        coh_part=coh,
        emission_only=emission,
        population_difference=np.broadcast_to(rho_s - rho_p, np.shape(pop)),
    )


def spontaneous_weight(gamma_nj: float, dOmega_mu: float, dO: float) -> float:
    """Zero-point replacement for |G_mu|^2: gamma_nj dOmega_mu dO / (8 pi^2)."""
    if not dOmega_mu > 0 or not dO > 0:
        raise NonpositiveBin("spectral and solid-angle bins must be positive")
    return gamma_nj * dOmega_mu * dO / (8.0 * math.pi**2)
