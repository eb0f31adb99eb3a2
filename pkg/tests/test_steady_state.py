import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nies.core import AtomicRates, Ensemble, StrongField
from nies.oracle import integrate
from nies.steady_state import bennett_dist, populations, saturation


def _rates(gm=1.0, gn=1.0, gamma=1.0, b=0.0, gj=0.5, gnj=0.0):
    return AtomicRates.from_labels(
        {"m": gm, "n": gn, "j": gj}, {"nm": gamma, "jn": 1.0, "jm": 1.0}, {"mn": b, "nj": gnj}
    )


@pytest.mark.parametrize(
    "b, G, tau_sq, ae, gb",
    [(0.0, 0.5, 4.0, 1.0, math.sqrt(2)), (0.0, 0.0, 4.0, 0.0, 1.0), (1.0, 1.0, 2.0, 2.0, math.sqrt(3))],
)
def test_saturation_examples(b, G, tau_sq, ae, gb):
    s = saturation(_rates(b=b), StrongField(G=G))
    assert s.tau_sq == pytest.approx(tau_sq, rel=1e-15)
    assert s.ae == pytest.approx(ae, rel=1e-15)
    assert s.gamma_B == pytest.approx(gb, rel=1e-15)


def test_bennett_peak_and_half_width():
    strong = StrongField(G=0.5, Omega=0.3, k=2.0)
    sat = saturation(_rates(), strong)
    gb = sat.gamma_B
    v0 = strong.Omega / strong.k
    assert bennett_dist(v0, strong, sat) == pytest.approx(1 / (math.pi * gb), rel=1e-15)
    for s in (-1, 1):
        assert bennett_dist(v0 + s * gb / strong.k, strong, sat) == pytest.approx(1 / (2 * math.pi * gb), rel=1e-14)


def test_bennett_normalization():
    strong = StrongField(G=0.5, Omega=0.3)
    sat = saturation(_rates(), strong)
    gb = sat.gamma_B
    lo, hi = strong.Omega - 50 * gb, strong.Omega + 50 * gb
    res = integrate(lambda kv: bennett_dist(kv, strong, sat), lo, hi, points=[strong.Omega], rel_tol=1e-13)
    # truncating a Lorentzian at 50 widths drops 2/(50 pi) of its mass
    assert res.value == pytest.approx(2 / math.pi * math.atan(50.0), rel=1e-10)
    assert abs(res.value - 1) <= 2 / (50 * math.pi)
    full = integrate(
        lambda t: bennett_dist(strong.Omega + gb * np.tan(t), strong, sat) * gb / np.cos(t) ** 2,
        -math.pi / 2, math.pi / 2, rel_tol=1e-13,
    )
    assert full.value == pytest.approx(1.0, abs=1e-10)


ENS = Ensemble(v_bar=3.0, N={"m": 1.0, "n": 0.4, "j": 0.2})


def test_field_off():
    v = np.linspace(-5, 5, 11)
    p = populations(v, _rates(), StrongField(G=0.0), ENS)
    for lvl in "mnj":
        np.testing.assert_array_equal(p.rho[lvl], ENS.n(lvl, v))
    assert np.all(p.r_nm == 0)


def test_full_branching_leaves_n_untouched():
    rates = _rates(gm=0.7, b=0.7)
    v = np.linspace(-5, 5, 11)
    p = populations(v, rates, StrongField(G=0.8, Omega=0.5), ENS)
    np.testing.assert_array_equal(p.rho_nn, ENS.n("n", v))
    assert np.all(p.rho_mm < ENS.n("m", v))
    assert np.all(np.abs(p.r_nm) > 0)


def test_equal_populations():
    ens = Ensemble(v_bar=3.0, N={"m": 0.5, "n": 0.5})
    v = np.linspace(-5, 5, 11)
    p = populations(v, _rates(), StrongField(G=0.8), ens)
    np.testing.assert_allclose(p.rho_mm, ens.n("m", v), rtol=1e-15)
    np.testing.assert_allclose(p.rho_nn, ens.n("m", v), rtol=1e-15)
    assert np.all(p.r_nm == 0)


widths = st.floats(0.05, 5.0)


@settings(max_examples=60, deadline=None)
@given(widths, widths, st.floats(0, 1), st.floats(0, 3), st.floats(-3, 3), st.floats(0.05, 5), st.floats(0, 1))
def test_rate_balance_and_cascade(gm, gn, bfrac, G, Omega, gj, nj_frac):
    rates = _rates(gm=gm, gn=gn, gamma=0.5 * (gm + gn), b=0.999 * bfrac * gm, gj=gj, gnj=nj_frac * gn)
    v = np.linspace(-6, 6, 25)
    p = populations(v, rates, StrongField(G=G, Omega=Omega), ENS)
    b = rates.decay("m", "n") / gm
    flux = gm * (ENS.n("m", v) - p.rho_mm)
    fed = gn * (p.rho_nn - ENS.n("n", v))
    np.testing.assert_allclose(fed, (1 - b) * flux, rtol=1e-10, atol=1e-12 * np.max(np.abs(flux)))
    np.testing.assert_allclose(
        p.rho_jj - ENS.n("j", v), rates.decay("n", "j") / gj * (p.rho_nn - ENS.n("n", v)), rtol=1e-10, atol=1e-15
    )
    # with N_m > N_n the field moves population down
    assert np.all(p.rho_mm <= ENS.n("m", v) + 1e-15)
    assert np.all(p.rho_nn >= ENS.n("n", v) - 1e-15)


def test_population_difference_closed_form():
    rates = _rates(gm=0.6, gn=1.4, gamma=1.0, b=0.2)
    strong = StrongField(G=0.7, Omega=0.4)
    sat = saturation(rates, strong)
    v = np.linspace(-4, 4, 81)
    p = populations(v, rates, strong, ENS, sat)
    det = strong.Omega - strong.k * v
    expected = (ENS.n("m", v) - ENS.n("n", v)) * (1 + det**2) / (sat.gamma_B**2 + det**2)
    np.testing.assert_allclose(p.rho_mm - p.rho_nn, expected, rtol=1e-12)


def test_coherence_peaks_on_resonance():
    rates = _rates()
    strong = StrongField(G=0.7, Omega=0.4)
    v = np.linspace(-2, 2, 4001)
    det = strong.Omega - v
    frozen = np.abs(1j * strong.G / (rates.Gamma + 1j * det))
    assert abs(v[np.argmax(frozen)] - 0.4) < 1e-3
