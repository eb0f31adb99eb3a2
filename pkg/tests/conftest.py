import math

import pytest

from nies.core import AtomicRates, Config, Ensemble, ProbeField, Resonator, StrongField

_REPORT: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    _REPORT.setdefault(criterion, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_REPORT):
        items = _REPORT[n]
        status = "PASS" if all(ok for ok, _ in items) else "FAIL"
        detail = "; ".join(d for _, d in items)
        terminalreporter.write_line(f"{status} criterion {n:2d}: {detail}")


@pytest.fixture
def desk_rates():
    return AtomicRates.spontaneous({"m": 0.6, "n": 1.4, "j": 0.1}, {"mn": 0.2})


def make_config(rates, G=0.6, Omega=0.0, k_mu=1.0, direction="antiparallel", v_bar=None, N=None, **kw):
    cfg = Config(
        rates=rates,
        strong=StrongField(G=G, Omega=Omega, k=1.0),
        probe=ProbeField(G_mu=1.0, k_mu=k_mu, direction=direction),
        ensemble=Ensemble(v_bar=v_bar or 100.0, N=N or {"m": 1.0, "n": 0.3, "j": 0.1}),
        **kw,
    )
    return cfg


@pytest.fixture
def desk(desk_rates):
    return make_config(desk_rates)


def generation_config(Nm=1.0, Nn=0.5, G=0.3, Omega=40.0, v_bar=1e3, gamma_mn=0.0, delta_omega_r=1.0):
    rates = AtomicRates.spontaneous({"m": 0.3, "n": 1.0, "g": 0.2, "j": 0.1}, {"mn": gamma_mn})
    return Config(
        rates=rates,
        strong=StrongField(G=G, Omega=Omega, k=1.0),
        probe=ProbeField(G_mu=0.1, k_mu=1.0),
        ensemble=Ensemble(v_bar=v_bar, N={"m": Nm, "n": Nn, "g": 2.0}),
        resonator=Resonator(delta_omega_r=delta_omega_r, Delta_N=0.5),
    )


def local_maxima(y):
    """Indices of strict local maxima; a flat run counts once (at its middle)."""
    idx = []
    i, n = 1, len(y)
    while i < n - 1:
        j = i
        while j + 1 < n - 1 and y[j + 1] == y[i]:
            j += 1
        if y[i] > y[i - 1] and y[j] > y[j + 1]:
            idx.append((i + j) // 2)
        i = j + 1
    return idx


SQRT3 = math.sqrt(3.0)
