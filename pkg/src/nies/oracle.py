"""Brute-force velocity averaging of the fixed-atom kernel.

This is the independent check on the closed forms in :mod:`nies.doppler`:
it never uses the effective-atom widths or roots, only the per-velocity
kernel and the Maxwellian. The integrator is a vectorized, globally
adaptive Gauss-Kronrod (7/15) rule with the difference of the two embedded
rules as the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Config
from .kernel import w_fixed
from .steady_state import saturation

# Gauss-Kronrod 7/15 nodes on [-1, 1]
_XK = np.array(
    [
        -0.991455371120812639206854697526329,
        -0.949107912342758524526189684047851,
        -0.864864423359769072789712788640926,
        -0.741531185599394439863864773280788,
        -0.586087235467691130294144845693013,
        -0.405845151377397166906606412076961,
        -0.207784955007898467600689403773245,
        0.0,
        0.207784955007898467600689403773245,
        0.405845151377397166906606412076961,
        0.586087235467691130294144845693013,
        0.741531185599394439863864773280788,
        0.864864423359769072789712788640926,
        0.949107912342758524526189684047851,
        0.991455371120812639206854697526329,
    ]
)
_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
        0.204432940075298892414161999234649,
        0.190350578064785409913256402421014,
        0.169004726639267902826583426598550,
        0.140653259715525918745189590510238,
        0.104790010322250183839876322541518,
        0.063092092629978553290700663189204,
        0.022935322010529224963732008058970,
    ]
)
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


class ToleranceNotMet(RuntimeError):
    def __init__(self, value, error, message):
        self.value = value
        self.error = error
        super().__init__(message)


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    v_cut: float = 6.0
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.v_cut < 4:
            raise ValueError("v_cut must be >= 4 (Gaussian tail control)")


@dataclass(frozen=True)
class Integral:
    value: np.ndarray
    error: np.ndarray
    intervals: int


def _gk15(func, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * _XK[None, :]).ravel()
    fx = np.asarray(func(x), dtype=float)
    fx = fx.reshape(fx.shape[:-1] + (len(lo), 15))
    kron = (fx * _WK).sum(axis=-1) * half
    gauss = (fx * _WG).sum(axis=-1) * half
    return kron, np.abs(kron - gauss)


def integrate(func, a: float, b: float, points=(), rel_tol=1e-8, abs_tol=1e-12, max_subdivisions=4000):
    """Adaptive Gauss-Kronrod integral of a vectorized ``func`` over [a, b].

    ``func`` maps a 1-D array of abscissae to an array whose last axis
    matches it; leading axes are integrated component-wise. ``points`` are
    extra breakpoints (narrow features) inside the interval.

    Globally adaptive: every pass bisects, in one vectorized call, all
    intervals whose error estimate exceeds an equal share of the target
    ``max(abs_tol, rel_tol * |I|)``. When no interval exceeds its share the
    summed estimate is within the target.
    """
    edges = np.unique(np.clip(np.concatenate([[a, b], np.asarray(points, float).ravel()]), a, b))
    lo, hi = edges[:-1], edges[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    vals, errs = _gk15(func, lo, hi)
    while True:
        total = vals.sum(axis=-1)
        total_err = errs.sum(axis=-1)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            return Integral(total, total_err, len(lo))
        over = errs > (tol / len(lo))[..., None]
        bad = over.reshape(-1, len(lo)).any(axis=0)
        if not bad.any():
            bad = errs.reshape(-1, len(lo)).max(axis=0) == errs.reshape(-1, len(lo)).max()
        if len(lo) + bad.sum() > max_subdivisions:
            raise ToleranceNotMet(
                total, total_err, f"quadrature did not converge within {max_subdivisions} intervals"
            )
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[bad], mid])
        new_hi = np.concatenate([mid, hi[bad]])
        new_vals, new_errs = _gk15(func, new_lo, new_hi)
        lo = np.concatenate([lo[~bad], new_lo])
        hi = np.concatenate([hi[~bad], new_hi])
        vals = np.concatenate([vals[..., ~bad], new_vals], axis=-1)
        errs = np.concatenate([errs[..., ~bad], new_errs], axis=-1)


def velocity_integral(integrand, config: Config, spec: QuadratureSpec = QuadratureSpec(), seeds=()):
    """Integral of ``integrand(v)`` over |v| <= v_cut * v_bar."""
    vb = config.ensemble.v_bar
    lim = spec.v_cut * vb
    return integrate(
        integrand,
        -lim,
        lim,
        points=[s for s in seeds if -lim < s < lim],
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol,
        max_subdivisions=spec.max_subdivisions,
    )


def maxwell_average(integrand, config: Config, spec: QuadratureSpec = QuadratureSpec(), seeds=()):
    """Average of ``integrand(v)`` over the Maxwellian exp(-v^2/v_bar^2)/(sqrt(pi) v_bar)."""
    ens = config.ensemble
    return velocity_integral(lambda v: integrand(v) * ens.maxwell(v), config, spec, seeds)


def _seeds(Omega_mu: float, config: Config, sigma_k_mu: float) -> list[float]:
    """Velocities where narrow structure sits: the hole and the probe resonances."""
    rates, strong = config.rates, config.strong
    sat = saturation(rates, strong)
    k = strong.k
    out = []
    hole = strong.Omega / k
    for c in (0.0, 1.0, 4.0, 16.0, 64.0):
        out += [hole - c * sat.gamma_B / k, hole + c * sat.gamma_B / k]
    b = config.bundle
    step_w = rates.width(b.partner, b.shared)
    if sigma_k_mu != 0:
        v1 = Omega_mu / sigma_k_mu
        for c in (0.0, 1.0, 4.0, 16.0):
            out += [v1 - c * step_w / abs(sigma_k_mu), v1 + c * step_w / abs(sigma_k_mu)]
    kk = sigma_k_mu + k
    if kk != 0:
        out.append((Omega_mu + strong.Omega) / kk)
    return out


@dataclass(frozen=True)
class AveragedSample:
    Omega_mu: float
    pop_part: float
    coh_part: float
    total: float
    correction: float
    error: float


def _average_1d(Omega_mu: float, config: Config, spec: QuadratureSpec) -> np.ndarray:
    sat = saturation(config.rates, config.strong)
    free = config.with_(strong__G=0.0)
    free_sat = saturation(free.rates, free.strong)

    def integrand(v):
        s = w_fixed(v, Omega_mu, config, sat)
        s0 = w_fixed(v, Omega_mu, free, free_sat)
        return np.stack([s.pop_part, s.coh_part, s.total, s.total - s0.total])

    sigma_k_mu = config.probe.sigma * config.bundle.probe_sign * config.probe.k_mu
    res = velocity_integral(integrand, config, spec, _seeds(Omega_mu, config, sigma_k_mu))
    return res.value, res.error


def average_lineshape(
    Omega_mu: float,
    config: Config,
    spec: QuadratureSpec = QuadratureSpec(),
    theta: float | None = None,
) -> AveragedSample:
    """Velocity average of :func:`nies.kernel.w_fixed` at one probe detuning.

    With ``theta=None`` the probe direction comes from the configuration.
    Otherwise ``theta`` is the angle between the probe and the strong wave
    and the average runs over the velocity components along (v) and
    across (u) the strong wave, each Maxwellian.

    ``correction`` is the part of the average created by the strong field
    (kernel minus its G = 0 value, integrated point by point).
    """
    Omega_mu = float(Omega_mu)
    if theta is None:
        val, err = _average_1d(Omega_mu, config, spec)
        return AveragedSample(Omega_mu, *map(float, val), float(np.max(err)))

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    k_mu = config.probe.k_mu
    if abs(sin_t) < 1e-12:
        direction = "parallel" if cos_t > 0 else "antiparallel"
        return average_lineshape(Omega_mu, config.with_(probe__direction=direction), spec)

    along = config.with_(
        probe__k_mu=k_mu * abs(cos_t),
        probe__direction="parallel" if cos_t >= 0 else "antiparallel",
    )
    inner_spec = QuadratureSpec(spec.rel_tol, spec.abs_tol * 1e-2, spec.v_cut, spec.max_subdivisions)
    ens = config.ensemble

    def outer(u):
        rows = [_average_1d(Omega_mu - k_mu * sin_t * ui, along, inner_spec)[0] for ui in u]
        return np.asarray(rows).T * ens.maxwell(u)

    lim = spec.v_cut * ens.v_bar
    res = integrate(outer, -lim, lim, points=[0.0], rel_tol=spec.rel_tol * 10, abs_tol=spec.abs_tol,
                    max_subdivisions=spec.max_subdivisions)
    return AveragedSample(Omega_mu, *map(float, res.value), float(np.max(res.error)))


def average_scan(Omega_mu, config: Config, spec: QuadratureSpec = QuadratureSpec(), theta=None):
    return [average_lineshape(om, config, spec, theta) for om in np.asarray(Omega_mu, float)]


def strong_part_config(config: Config) -> Config:
    """Same atom with only the strong-pair population difference kept.

    The kernel is linear in the populations. Putting ``N_other - N_shared``
    on the other strong level and emptying the shared and partner levels
    keeps exactly the part of the response that is proportional to the
    strong-transition inversion, which is what the closed-form F + f
    describes. The remaining part (proportional to N_shared - N_partner) is
    field independent in the Doppler limit.
    """
    b = config.bundle
    N = dict(config.ensemble.N)
    diff = N.get(b.other, 0.0) - N.get(b.shared, 0.0)
    N.update({b.other: diff, b.shared: 0.0, b.partner: 0.0})
    return config.with_(ensemble__N=N)


def average_correction(Omega_mu, config: Config, spec: QuadratureSpec = QuadratureSpec(), theta=None):
    """Oracle counterpart of the closed-form F + f power, one value per detuning."""
    part = strong_part_config(config)
    return np.array([s.total for s in average_scan(Omega_mu, part, spec, theta)])


@dataclass(frozen=True)
class CompareReport:
    max_rel_err: float
    arg_max: int
    rel_err: np.ndarray
    closed: np.ndarray
    oracle: np.ndarray
    included: np.ndarray

    def table(self):
        return [
            (i, float(c), float(o), float(e) if inc else None)
            for i, (c, o, e, inc) in enumerate(zip(self.closed, self.oracle, self.rel_err, self.included))
        ]


def compare(closed, oracle, abs_floor: float = 0.0, grid_closed=None, grid_oracle=None) -> CompareReport:
    """Pointwise relative deviation |closed - oracle| / |oracle|.

    Points where both magnitudes fall below ``abs_floor`` are excluded.
    """
    closed = np.asarray(closed, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    if closed.shape != oracle.shape:
        raise GridMismatch(f"scan lengths differ: {closed.shape} vs {oracle.shape}")
    if grid_closed is not None and grid_oracle is not None:
        if not np.array_equal(np.asarray(grid_closed, float), np.asarray(grid_oracle, float)):
            raise GridMismatch("closed-form and oracle grids differ")
    included = np.maximum(np.abs(closed), np.abs(oracle)) >= abs_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(closed - oracle) / np.abs(oracle)
    rel = np.where(included, rel, 0.0)
    rel = np.where(included & (closed == oracle), 0.0, rel)
    idx = int(np.argmax(rel)) if rel.size else 0
    return CompareReport(float(rel[idx]) if rel.size else 0.0, idx, rel, closed, oracle, included)
