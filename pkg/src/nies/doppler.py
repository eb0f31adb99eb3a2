"""Closed-form Doppler-averaged probe line shapes.

In the Doppler limit (Gamma_B << k v_bar) the strong field selects one
velocity group, and the velocity-averaged probe response looks like that of
a single "effective atom" with step-wise width ``gamma0`` and two-photon
width ``gamma_pm``. Everything here is a function of the detuning
``z = Omega_mu - sigma Omega k_mu / k`` measured from that group's
resonance.

The Bennett (velocity-distribution) term is ``F`` and the interference
(coherence) term is ``f``. Both share the resonance denominator
``(gamma0 + iz)(gamma_pm + iz) + G^2 = (z1 + iz)(z2 + iz)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import NJ_BUNDLE, AtomicRates, Config, ConfigError, ProbeField, StrongField, TransitionBundle
from .steady_state import SaturationState, saturation

REAL = "real"
COMPLEX = "complex"
CONFLUENT = "confluent"

ROOT_EPS = 1e-12
OFF_AXIS_MAX_AE = 0.3
SQRT3 = math.sqrt(3.0)


class OffAxisSaturationTooLarge(ConfigError):
    pass


class BranchMismatch(ValueError):
    pass


class RatioOutOfRange(ValueError):
    pass


class FactorOutOfRange(ValueError):
    pass


class RegimeWarning(UserWarning):
    pass


class OverlapWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EffectiveWidths:
    gamma0: float
    gamma_pm: float
    sign: int

    @property
    def s(self) -> float:
        """(gamma0 - gamma_pm) / (gamma0 + gamma_pm), always in (-1, 1)."""
        return (self.gamma0 - self.gamma_pm) / (self.gamma0 + self.gamma_pm)


@dataclass(frozen=True)
class RootPair:
    """Roots of (gamma0 + iz)(gamma_pm + iz) + G^2 = (z1 + iz)(z2 + iz).

    On the complex branch ``z1, z2 = z0 +- i zeta``; otherwise ``zeta`` is 0
    and ``z1 >= z2`` are real.
    """

    branch: str
    z1: complex
    z2: complex
    z0: float
    zeta: float

    @property
    def product(self) -> complex:
        return self.z1 * self.z2


@dataclass(frozen=True)
class EffectiveAtom:
    """Everything the closed forms need for one probe direction.

    ``weight_f`` and ``weight_F`` multiply ``ratio * G2`` to give the
    prefactors of the interference and Bennett terms.
    """

    widths: EffectiveWidths
    roots: RootPair
    ratio: float
    G2: float
    weight_f: float
    weight_F: float
    sat: SaturationState
    off_axis: bool = False


def effective_widths(
    rates: AtomicRates,
    strong: StrongField,
    probe: ProbeField,
    sat: SaturationState,
    bundle: TransitionBundle = NJ_BUNDLE,
) -> EffectiveWidths:
    """gamma0 = G_ps + Gamma_B r, gamma_pm = G_po + Gamma_B (r +- 1), r = k_mu/k."""
    r = probe.k_mu / strong.k
    sign = probe.sigma * bundle.probe_sign
    g0 = rates.width(bundle.partner, bundle.shared) + sat.gamma_B * r
    gpm = rates.width(bundle.partner, bundle.other) + sat.gamma_B * (r + sign)
    return EffectiveWidths(gamma0=g0, gamma_pm=gpm, sign=sign)


def roots(widths: EffectiveWidths, G: float) -> RootPair:
    g0, gp = widths.gamma0, widths.gamma_pm
    total = g0 + gp
    gap_sq = (g0 - gp) ** 2
    four_g2 = 4.0 * G**2
    product = g0 * gp + G**2
    if gap_sq > four_g2 * (1.0 + ROOT_EPS):
        z1 = 0.5 * (total + math.sqrt(gap_sq - four_g2))
        # the product form keeps z2 accurate when G^2 << gap^2
        z2 = min(product / z1, z1)
        return RootPair(REAL, complex(z1), complex(z2), 0.5 * total, 0.0)
    if gap_sq < four_g2 * (1.0 - ROOT_EPS):
        z0 = 0.5 * total
        zeta = math.sqrt(G**2 - gap_sq / 4.0)
        return RootPair(COMPLEX, complex(z0, zeta), complex(z0, -zeta), z0, zeta)
    z0 = 0.5 * total
    return RootPair(CONFLUENT, complex(z0), complex(z0), z0, 0.0)


def resonance_re(z, rp: RootPair):
    """Re[1 / ((z1 + iz)(z2 + iz))] by the branch-appropriate expansion."""
    z = np.asarray(z, dtype=float)
    if rp.branch == REAL:
        z1, z2 = rp.z1.real, rp.z2.real
        return (z2 / (z2**2 + z**2) - z1 / (z1**2 + z**2)) / (z1 - z2)
    if rp.branch == CONFLUENT:
        z0 = rp.z0
        return (z0**2 - z**2) / (z0**2 + z**2) ** 2
    z0, zeta = rp.z0, rp.zeta
    u, w = z + zeta, z - zeta
    return (u / (z0**2 + u**2) - w / (z0**2 + w**2)) / (2.0 * zeta)


def weighted_resonance_re(z, rp: RootPair, a: float):
    """Re[(a + iz) / ((z1 + iz)(z2 + iz))]."""
    z = np.asarray(z, dtype=float)
    if rp.branch == REAL:
        z1, z2 = rp.z1.real, rp.z2.real
        return ((z1 - a) * z1 / (z1**2 + z**2) - (z2 - a) * z2 / (z2**2 + z**2)) / (z1 - z2)
    if rp.branch == CONFLUENT:
        z0 = rp.z0
        return (a * (z0**2 - z**2) + 2.0 * z0 * z**2) / (z0**2 + z**2) ** 2
    z0, zeta = rp.z0, rp.zeta
    s = (z0 - a) / z0
    u, w = z + zeta, z - zeta
    lor = 1.0 / (z0**2 + u**2) + 1.0 / (z0**2 + w**2)
    disp = u / (z0**2 + u**2) - w / (z0**2 + w**2)
    return 0.5 * z0 * (lor - s / zeta * disp)


def effective_atom(config: Config, direction: str | None = None) -> EffectiveAtom:
    """Assemble widths, roots and term weights for the configured probe.

    An antiparallel probe with k_mu < k uses the small-saturation
    replacement widths; that path refuses ae > 0.3.
    """
    rates, strong = config.rates, config.strong
    probe = config.probe if direction is None else ProbeField(
        config.probe.G_mu, config.probe.k_mu, direction
    )
    bundle = config.bundle
    if bundle.shared != "n":
        raise ConfigError("closed-form line shapes are available for probes sharing level n")
    sat = saturation(rates, strong)
    r = probe.k_mu / strong.k
    sign = probe.sigma * bundle.probe_sign
    branching = 1.0 - rates.decay("m", "n") / rates.level("m")
    gn = rates.level("n")
    G2 = strong.G**2

    if sign < 0 and r < 1.0:
        if sat.ae > OFF_AXIS_MAX_AE:
            raise OffAxisSaturationTooLarge(
                f"antiparallel probe with k_mu < k needs ae <= {OFF_AXIS_MAX_AE}, got {sat.ae:.3g}"
            )
        gps = rates.width(bundle.partner, bundle.shared)
        gpo = rates.width(bundle.partner, bundle.other)
        widths = EffectiveWidths(
            gamma0=gps + rates.Gamma * r,
            gamma_pm=gpo * r + (1.0 - r) * gps,
            sign=sign,
        )
        unsat = SaturationState(tau_sq=sat.tau_sq, ae=0.0, gamma_B=rates.Gamma)
        return EffectiveAtom(
            widths=widths,
            roots=roots(widths, 0.0),
            ratio=r,
            G2=G2,
            weight_f=2.0 * r,
            weight_F=2.0 * branching / gn,
            sat=unsat,
            off_axis=True,
        )

    widths = effective_widths(rates, strong, probe, sat, bundle)
    root = math.sqrt(1.0 + sat.ae)
    return EffectiveAtom(
        widths=widths,
        roots=roots(widths, strong.G),
        ratio=r,
        G2=G2,
        weight_f=(1.0 - sign * root) / root,
        weight_F=2.0 * branching / (gn * root),
        sat=sat,
    )


def f_interference(z, atom: EffectiveAtom):
    """Re f(z), the coherence-driven part of the line-shape correction."""
    return atom.ratio * atom.G2 * atom.weight_f * resonance_re(z, atom.roots)


def F_bennett(z, atom: EffectiveAtom):
    """Re F(z), the part due to the Bennett hole/peak in level n."""
    return atom.ratio * atom.G2 * atom.weight_F * weighted_resonance_re(
        z, atom.roots, atom.widths.gamma_pm
    )


@dataclass(frozen=True)
class CenterAmplitudes:
    f0: float
    F0: float
    total0: float
    ae_eff: float
    ae_ratio: float


def amplitudes_at_center(atom: EffectiveAtom) -> CenterAmplitudes:
    """Line-center values for real roots.

    ``ae_eff = G^2 / (gamma0 gamma_pm)`` is the effective atom's saturation
    parameter and ``ae_ratio = ae / ae_eff = gamma0 gamma_pm tau^2``.
    """
    if atom.roots.branch == COMPLEX:
        raise BranchMismatch("center amplitudes are defined for real roots")
    w = atom.widths
    prod = w.gamma0 * w.gamma_pm + atom.G2
    f0 = atom.ratio * atom.weight_f * atom.G2 / prod
    F0 = atom.ratio * atom.weight_F * atom.G2 * w.gamma_pm / prod
    # sum in the bracketed form: G^2 gpm / (z1 z2) [2(1-b)/Gn + (1 -+ root)/gpm] / root
    total0 = atom.ratio * atom.G2 * w.gamma_pm / prod * (atom.weight_F + atom.weight_f / w.gamma_pm)
    return CenterAmplitudes(
        f0=f0,
        F0=F0,
        total0=total0,
        ae_eff=atom.G2 / (w.gamma0 * w.gamma_pm),
        ae_ratio=w.gamma0 * w.gamma_pm * atom.sat.tau_sq,
    )


def c_factor(config: Config, direction: str | None = None) -> float:
    """Shape factor that replaces s when F and f are summed (complex roots)."""
    atom = effective_atom(config, direction)
    rates = config.rates
    branching = 1.0 - rates.decay("m", "n") / rates.level("m")
    if branching <= 0:
        raise FactorOutOfRange("c is undefined when gamma_mn = Gamma_m (the Bennett term vanishes)")
    w = atom.widths
    root = math.sqrt(1.0 + atom.sat.ae)
    return w.s - rates.level("n") / (w.gamma0 + w.gamma_pm) / branching * (1.0 - w.sign * root)


@dataclass(frozen=True)
class SeriesRoots:
    z1: float
    z2: float
    warning: bool
    reasons: tuple[str, ...]


def series_roots(config: Config, margin: float = 10.0) -> SeriesRoots:
    """Expanded roots for an antiparallel probe with narrow two-photon width.

    Valid when Gamma + Gamma_jn >> Gamma_jm, k_mu ~ k and (Gamma tau)^2 >> 1;
    each condition is checked with the factor ``margin`` and a RegimeWarning
    is emitted for any that fails.
    """
    rates, strong = config.rates, config.strong
    b = config.bundle
    sat = saturation(rates, strong)
    gam = rates.Gamma
    gjn = rates.width(b.partner, b.shared)
    gjm = rates.width(b.partner, b.other)
    r = config.ratio
    root = math.sqrt(1.0 + sat.ae)
    shift = strong.G**2 / (gam * root + gjn - gjm)
    z1 = gjn + gam * r * root - shift
    z2 = gjm + gam * (r - 1.0) * root + shift

    reasons = []
    if gam + gjn < margin * gjm:
        reasons.append("Gamma + Gamma_jn is not >> Gamma_jm")
    if abs(r - 1.0) > 1.0 / margin:
        reasons.append("k_mu is not close to k")
    if gam**2 * sat.tau_sq < margin:
        reasons.append("(Gamma tau)^2 is not >> 1")
    if reasons:
        warnings.warn("series roots outside their regime: " + "; ".join(reasons), RegimeWarning)
    return SeriesRoots(z1=z1, z2=z2, warning=bool(reasons), reasons=tuple(reasons))


@dataclass(frozen=True)
class LineshapeSample:
    Omega_mu: np.ndarray
    z: np.ndarray
    F: np.ndarray
    f: np.ndarray
    population_term: float
    correction_weight: float
    gaussian: np.ndarray
    scale: float
    total: np.ndarray

    @property
    def correction(self):
        """Power carried by F + f alone."""
        return self.scale * self.gaussian * self.correction_weight * (self.F + self.f)


def envelope(Omega_mu, config: Config):
    """sqrt(pi)/(k_env v_bar) exp(-Omega_mu^2 / (k_mu v_bar)^2)."""
    k_env = config.strong.k if config.envelope_wavenumber == "k" else config.probe.k_mu
    vb = config.ensemble.v_bar
    om = np.asarray(Omega_mu, dtype=float)
    return math.sqrt(math.pi) / (k_env * vb) * np.exp(-((om / (config.probe.k_mu * vb)) ** 2))


def shifted_detuning(Omega_mu, config: Config, sign: int):
    return np.asarray(Omega_mu, dtype=float) - sign * config.strong.Omega * config.ratio


def lineshape(Omega_mu, config: Config) -> LineshapeSample:
    """Doppler-averaged probe power with its F/f decomposition."""
    atom = effective_atom(config)
    b = config.bundle
    ens = config.ensemble
    z = shifted_detuning(Omega_mu, config, atom.widths.sign)
    F = F_bennett(z, atom)
    f = f_interference(z, atom)
    pop = ens.population(b.shared) - ens.population(b.partner)
    weight = ens.population(b.other) - ens.population(b.shared)
    gauss = envelope(Omega_mu, config)
    scale = 2.0 * config.prefactor * config.probe.G_mu**2
    total = scale * gauss * (pop + weight * (F + f))
    return LineshapeSample(
        Omega_mu=np.asarray(Omega_mu, dtype=float),
        z=z,
        F=F,
        f=f,
        population_term=pop,
        correction_weight=weight,
        gaussian=gauss,
        scale=scale,
        total=total,
    )


@dataclass(frozen=True)
class StandingWaveSample:
    Omega_mu: np.ndarray
    z_plus: np.ndarray
    z_minus: np.ndarray
    F_plus: np.ndarray
    f_plus: np.ndarray
    F_minus: np.ndarray
    f_minus: np.ndarray
    population_term: float
    correction_weight: float
    gaussian: np.ndarray
    scale: float

    @property
    def structure(self):
        return self.F_plus + self.f_plus + self.F_minus + self.f_minus

    @property
    def total(self):
        return self.scale * self.gaussian * (
            self.population_term + self.correction_weight * self.structure
        )


def standing_wave(Omega_mu, config: Config, warn: bool = True) -> StandingWaveSample:
    """Strong standing wave as two independent counter-propagating waves.

    Only meaningful when |Omega| exceeds the effective widths, so that the
    two waves burn holes in different velocity groups; otherwise an
    OverlapWarning is issued (pass ``warn=False`` to silence it).
    """
    plus = lineshape(Omega_mu, config.with_(probe__direction="parallel"))
    minus = lineshape(Omega_mu, config.with_(probe__direction="antiparallel"))
    if warn:
        w = effective_atom(config, "parallel").widths
        limit = max(w.gamma0, w.gamma_pm)
        if abs(config.strong.Omega) <= limit:
            warnings.warn(
                f"|Omega| = {abs(config.strong.Omega):.3g} <= {limit:.3g}: the two Bennett "
                "distributions overlap and the additive picture is approximate",
                OverlapWarning,
            )
    return StandingWaveSample(
        Omega_mu=plus.Omega_mu,
        z_plus=plus.z,
        z_minus=minus.z,
        F_plus=plus.F,
        f_plus=plus.f,
        F_minus=minus.F,
        f_minus=minus.f,
        population_term=plus.population_term,
        correction_weight=plus.correction_weight,
        gaussian=plus.gaussian,
        scale=plus.scale,
    )


def _normalized_roots(z1_over_z2=None, zeta_over_z0=None, unit: str = "z1") -> RootPair:
    if (z1_over_z2 is None) == (zeta_over_z0 is None):
        raise ValueError("give exactly one of z1_over_z2 and zeta_over_z0")
    if z1_over_z2 is not None:
        q = float(z1_over_z2)
        if not q >= 1.0:
            raise RatioOutOfRange(f"z1/z2 must be >= 1, got {q}")
        z1, z2 = (1.0, 1.0 / q) if unit == "z1" else (2.0 * q / (q + 1.0), 2.0 / (q + 1.0))
        if q == 1.0:
            return RootPair(CONFLUENT, complex(z1), complex(z1), z1, 0.0)
        return RootPair(REAL, complex(z1), complex(z2), 0.5 * (z1 + z2), 0.0)
    ratio = float(zeta_over_z0)
    if not 0.0 <= ratio <= SQRT3 * (1.0 + 1e-12):
        raise RatioOutOfRange(f"zeta/z0 must lie in [0, sqrt(3)], got {ratio}")
    if ratio == 0.0:
        return RootPair(CONFLUENT, 1.0 + 0j, 1.0 + 0j, 1.0, 0.0)
    return RootPair(COMPLEX, complex(1.0, ratio), complex(1.0, -ratio), 1.0, ratio)


def normalized_f_curve(x, z1_over_z2=None, zeta_over_z0=None):
    """Dimensionless interference profile.

    Real roots: ``x = z / z1`` and the curve is ``z1^2 Re[1/((z1+iz)(z2+iz))]``.
    Complex roots: ``x = z / z0`` and the curve is ``z0^2 Re[...]``.
    """
    rp = _normalized_roots(z1_over_z2, zeta_over_z0, unit="z1")
    return resonance_re(x, rp)


def normalized_F_curve(x, factor, z1_over_z2=None, zeta_over_z0=None):
    """Dimensionless Bennett profile ``2 z0 Re[(z0(1 - factor) + iz)/((z1+iz)(z2+iz))]``.

    ``x = z / z0``. With ``factor = s`` this is F alone; with ``factor = c``
    (see :func:`c_factor`) it is the combined F + f contour.
    """
    factor = float(factor)
    if not -1.0 <= factor <= 1.0:
        raise FactorOutOfRange(f"shape factor must lie in [-1, 1], got {factor}")
    rp = _normalized_roots(z1_over_z2, zeta_over_z0, unit="z0")
    return 2.0 * weighted_resonance_re(x, rp, 1.0 - factor)
