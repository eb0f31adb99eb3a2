"""Steady state of the strongly driven m-n pair plus weakly coupled levels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AtomicRates, Ensemble, StrongField


@dataclass(frozen=True)
class SaturationState:
    tau_sq: float
    ae: float
    gamma_B: float


@dataclass(frozen=True)
class VelocityPopulations:
    """Level densities at velocity ``v`` and the strong-transition coherence.

    ``rho`` maps every level named in the ensemble (plus ``m`` and ``n``) to
    its density. ``r_nm`` is the slowly varying amplitude of rho_nm; the
    travelling-wave phase factor is never formed.
    """

    rho: dict
    r_nm: np.ndarray

    @property
    def rho_mm(self):
        return self.rho["m"]

    @property
    def rho_nn(self):
        return self.rho["n"]

    @property
    def rho_jj(self):
        return self.rho.get("j")


def saturation(rates: AtomicRates, strong: StrongField) -> SaturationState:
    """Interaction time, saturation parameter and Bennett width.

    tau^2 = 2 (Gamma_m + Gamma_n - gamma_mn) / (Gamma_m Gamma_n Gamma),
    ae = tau^2 G^2, Gamma_B = Gamma sqrt(1 + ae).
    """
    gm, gn, gam = rates.level("m"), rates.level("n"), rates.Gamma
    tau_sq = 2.0 * (gm + gn - rates.decay("m", "n")) / (gm * gn * gam)
    ae = tau_sq * strong.G**2
    return SaturationState(tau_sq=tau_sq, ae=ae, gamma_B=gam * math.sqrt(1.0 + ae))


def bennett_dist(v, strong: StrongField, sat: SaturationState):
    """Lorentzian velocity profile of the hole, normalized in ``k v``."""
    detuning = strong.Omega - strong.k * np.asarray(v, dtype=float)
    gb = sat.gamma_B
    return gb / (math.pi * (gb**2 + detuning**2))


def population_shift(v, rates, strong, ens, sat):
    """Field-induced flux 2 pi G^2 (n_m - n_n) W_B / sqrt(1 + ae).

    Level m loses flux/Gamma_m and level n gains flux (1 - gamma_mn/Gamma_m)/Gamma_n.
    """
    diff = ens.n("m", v) - ens.n("n", v)
    return 2.0 * math.pi * strong.G**2 / math.sqrt(1.0 + sat.ae) * diff * bennett_dist(v, strong, sat)


def populations(
    v,
    rates: AtomicRates,
    strong: StrongField,
    ens: Ensemble,
    sat: SaturationState | None = None,
) -> VelocityPopulations:
    if sat is None:
        sat = saturation(rates, strong)
    v = np.asarray(v, dtype=float)
    gm, gn = rates.level("m"), rates.level("n")
    flux = population_shift(v, rates, strong, ens, sat)

    rho = {lvl: ens.n(lvl, v) for lvl in ens.N}
    rho["m"] = ens.n("m", v) - flux / gm
    rho["n"] = ens.n("n", v) + flux * (1.0 - rates.decay("m", "n") / gm) / gn
    # cascade feeding of the remaining levels from the perturbed m, n
    for lvl in rho:
        if lvl in ("m", "n"):
            continue
        gl = rates.gamma_level.get(lvl)
        if gl is None:
            continue
        for src in ("m", "n"):
            g_src = rates.decay(src, lvl)
            if g_src:
                rho[lvl] = rho[lvl] + g_src / gl * (rho[src] - ens.n(src, v))

    detuning = strong.Omega - strong.k * v
    r_nm = 1j * strong.G * (rho["m"] - rho["n"]) / (rates.Gamma + 1j * detuning)
    return VelocityPopulations(rho=rho, r_nm=r_nm)
