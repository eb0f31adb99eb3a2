import pytest
from hypothesis import given
from hypothesis import strategies as st

from nies.core import (
    NJ_BUNDLE,
    TRANSITIONS,
    AtomicRates,
    Config,
    Ensemble,
    ProbeField,
    Resonator,
    StrongField,
    TransitionBundle,
    UnknownTransition,
    ValidationError,
    check,
    substitute,
    validate,
)


def _config(rates, **kw):
    return Config(rates=rates, strong=StrongField(G=0.5), **kw)


def test_branching_exceeds_width():
    rates = AtomicRates.from_labels({"m": 1.0, "n": 1.0}, {"nm": 1.0}, {"mn": 2.0})
    with pytest.raises(ValidationError) as exc:
        validate(_config(rates))
    assert "BranchingExceedsWidth" in exc.value.kinds
    bad = [v for v in exc.value.violations if v.kind == "BranchingExceedsWidth"][0]
    assert set(bad.keys) == {"gamma_mn", "Gamma_m"}


def test_spontaneous_mean():
    rates = AtomicRates.spontaneous({"m": 1.2, "n": 0.8})
    assert rates.Gamma == pytest.approx(1.0, abs=0)


def test_physical_set_passes():
    rates = AtomicRates.spontaneous({"m": 0.6, "n": 1.4, "j": 0.1}, {"mn": 0.2})
    cfg = _config(rates)
    assert check(cfg) == []
    assert validate(cfg) is cfg


def test_missing_gamma_nm():
    rates = AtomicRates.from_labels({"m": 1.0, "n": 1.0}, {"jn": 1.0})
    assert "MissingRequiredRate" in {v.kind for v in check(_config(rates))}


def test_all_violations_reported_together():
    rates = AtomicRates.from_labels({"m": -1.0, "n": 1.0}, {"nm": 0.0}, {"nj": -0.1})
    cfg = Config(
        rates=rates,
        strong=StrongField(G=-1.0, k=0.0),
        probe=ProbeField(k_mu=-1.0, direction="sideways"),
        ensemble=Ensemble(v_bar=0.0, N={"m": -1.0}),
        resonator=Resonator(delta_omega_r=0.0, Delta_N=0.0, l_over_lr=2.0),
        transition="x-y",
    )
    kinds = {v.kind for v in check(cfg)}
    assert kinds >= {
        "NegativeWidth",
        "InvalidField",
        "InvalidEnsemble",
        "InvalidResonator",
        "UnknownTransition",
    }


def test_substitute_identity_and_ml():
    assert substitute("n-j") == NJ_BUNDLE
    ml = substitute("m-l")
    assert (ml.shared, ml.other, ml.partner) == ("m", "n", "l")
    assert ml.detuning_sign == -1 and ml.probe_sign == 1


def test_substitute_gn_recovers_generation_widths():
    # the g-n bundle applied to gamma0 = Gamma_ps + r Gamma (unsaturated) gives Gamma_gn + r Gamma
    gn = substitute("g-n")
    assert (gn.shared, gn.other, gn.partner) == ("n", "m", "g")
    assert gn.probe_sign == -1


def test_unknown_transition():
    with pytest.raises(UnknownTransition):
        substitute("q-r")


labels = st.sampled_from(["m", "n", "j", "l", "f", "g"])
bundles = st.builds(
    TransitionBundle,
    shared=labels,
    other=labels,
    partner=labels,
    detuning_sign=st.sampled_from([-1, 1]),
    probe_sign=st.sampled_from([-1, 1]),
)


@given(bundles, st.sampled_from(TRANSITIONS))
def test_substitute_is_involution(bundle, sel):
    assert substitute(sel, substitute(sel, bundle)) == bundle


@given(st.dictionaries(st.sampled_from(list("mnjlfg")), st.floats(1e-3, 1e3), min_size=2))
def test_spontaneous_pairs_exact(levels):
    rates = AtomicRates.spontaneous(levels)
    for a in levels:
        for b in levels:
            if a != b:
                assert rates.width(a, b) - (levels[a] + levels[b]) / 2 == 0


def test_with_nested():
    cfg = _config(AtomicRates.spontaneous({"m": 1.0, "n": 1.0}))
    c2 = cfg.with_(strong__G=0.0, probe__direction="parallel", prefactor=2.0)
    assert c2.strong.G == 0.0 and c2.probe.sigma == 1 and c2.prefactor == 2.0
    assert cfg.strong.G == 0.5
