import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nies.core import AtomicRates, Config, Ensemble, ProbeField, StrongField
from nies.kernel import NonpositiveBin, spontaneous_weight, w_fixed
from nies.oracle import integrate
from nies.steady_state import populations


def _config(G=0.6, Omega=0.3, gjn=0.8, gjm=0.5, direction="antiparallel", N=None, transition="n-j", **kw):
    levels = {"m": 0.6, "n": 1.4, "j": 0.1, "g": 0.3, "l": 0.2, "f": 0.4}
    rates = AtomicRates.spontaneous(levels, {"mn": 0.2, "nj": 0.3})
    pairs = dict(rates.gamma_pair)
    pairs[frozenset("jn")] = gjn
    pairs[frozenset("jm")] = gjm
    rates = AtomicRates(rates.gamma_level, pairs, rates.branch)
    return Config(
        rates=rates,
        strong=StrongField(G=G, Omega=Omega, k=1.0),
        probe=ProbeField(G_mu=0.7, k_mu=1.2, direction=direction),
        ensemble=Ensemble(v_bar=2.0, N=N or {"m": 1.0, "n": 0.3, "j": 0.1, "g": 0.2}),
        transition=transition,
        **kw,
    )


def test_field_off_is_lorentzian():
    cfg = _config(G=0.0, prefactor=1.7)
    v = 0.4
    om = np.linspace(-5, 5, 101)
    s = w_fixed(v, om, cfg)
    p = populations(v, cfg.rates, cfg.strong, cfg.ensemble)
    det = om + cfg.probe.k_mu * v
    gjn = cfg.rates.width("j", "n")
    expected = 2 * cfg.prefactor * cfg.probe.G_mu**2 * (p.rho_nn - p.rho_jj) * gjn / (gjn**2 + det**2)
    np.testing.assert_allclose(s.total, expected, rtol=1e-13)
    assert np.all(s.coh_part == 0)


def test_no_population_no_power():
    cfg = _config(G=0.0, N={"m": 0.0, "n": 0.4, "j": 0.4})
    s = w_fixed(np.linspace(-2, 2, 9), 0.3, cfg)
    np.testing.assert_allclose(s.total, 0.0, atol=1e-16)


def test_absorption_sign():
    cfg = _config(G=0.0, N={"m": 0.0, "n": 0.1, "j": 0.5})
    assert w_fixed(0.0, 0.0, cfg).total < 0


@pytest.mark.parametrize("direction", ["parallel", "antiparallel"])
@pytest.mark.parametrize("transition", ["n-j", "m-l", "f-m", "g-n"])
def test_integral_intensity_per_velocity(direction, transition):
    cfg = _config(direction=direction, transition=transition, prefactor=1.3)
    v = 0.37
    b = cfg.bundle
    # resonances sit near Omega_mu = sigma k_mu v and there minus the strong detuning
    c = cfg.probe.sigma * cfg.probe.k_mu * v
    pts = [c - cfg.strong.Omega, c, c + cfg.strong.Omega, c - 1, c + 1]

    def f(om):
        s = w_fixed(v, om, cfg)
        return np.stack([s.pop_part, s.coh_part])

    pop, coh = integrate(f, -1e4, 1e4, points=pts, rel_tol=1e-10, abs_tol=1e-14).value
    p = populations(v, cfg.rates, cfg.strong, cfg.ensemble)
    target = 2 * math.pi * cfg.prefactor * cfg.probe.G_mu**2 * (p.rho[b.shared] - p.rho.get(b.partner, 0.0))
    assert abs(coh) <= 1e-3 * abs(pop)
    assert abs(pop + coh - target) <= 1e-3 * abs(target)


def test_level_splitting_two_peaks():
    G = 4.0
    cfg = _config(G=G, Omega=0.0, gjn=0.1, gjm=0.1)
    om = np.linspace(-8, 8, 16001)
    y = np.abs(w_fixed(0.0, om, cfg).pop_part)
    peaks = [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]
    assert len(peaks) == 2
    for i, s in zip(peaks, (-1, 1)):
        assert om[i] == pytest.approx(s * G, rel=0.05)


@settings(max_examples=80, deadline=None)
@given(
    st.floats(-20, 20),
    st.floats(-20, 20),
    st.floats(0, 5),
    st.floats(-5, 5),
    st.sampled_from(["parallel", "antiparallel"]),
    st.sampled_from(["n-j", "m-l", "f-m", "g-n"]),
)
def test_decomposition_exact(v, om, G, Omega, direction, transition):
    s = w_fixed(v, om, _config(G=G, Omega=Omega, direction=direction, transition=transition))
    assert s.total == s.pop_part + s.coh_part
    assert np.isfinite(s.total)


def test_emission_only_drops_partner():
    cfg = _config()
    # no cascade into j, so an empty j stays empty under the strong field
    rates = AtomicRates(cfg.rates.gamma_level, cfg.rates.gamma_pair, {("m", "n"): 0.2})
    free = cfg.with_(rates=rates, ensemble__N={"m": 1.0, "n": 0.3, "j": 0.0})
    v, om = 0.2, np.linspace(-3, 3, 13)
    # with j empty the emission-only value equals the total
    s = w_fixed(v, om, free)
    np.testing.assert_allclose(s.emission_only, s.total, rtol=1e-13, atol=1e-16)


@pytest.mark.parametrize(
    "g, dw, do, expected",
    [(1.0, 8 * math.pi**2, 1.0, 1.0), (0.1, 2 * math.pi, 4 * math.pi, 0.1)],
)
def test_spontaneous_weight(g, dw, do, expected):
    assert spontaneous_weight(g, dw, do) == pytest.approx(expected, rel=1e-15)


def test_spontaneous_weight_rejects_empty_bin():
    with pytest.raises(NonpositiveBin):
        spontaneous_weight(1.0, 1.0, 0.0)
