"""Domain types, validation and the transition relabeling table.

All rates, widths and detunings are angular frequencies. By convention they
are expressed in units of the strong-transition width ``Gamma_nm`` so that a
configuration with ``Gamma_nm = 1`` is dimensionless; wavenumbers and the
thermal velocity only ever appear through the products ``k * v`` and
``k_mu * v``.

Level labels follow the usual five-level scheme: the strong field couples
``m`` (upper) and ``n`` (lower); the weak probe couples one of the strong
levels to a partner level (``j``, ``l``, ``f`` or ``g``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Mapping

import numpy as np

PARALLEL = "parallel"
ANTIPARALLEL = "antiparallel"
DIRECTIONS = (PARALLEL, ANTIPARALLEL)

TRANSITIONS = ("n-j", "m-l", "f-m", "g-n")


class ConfigError(ValueError):
    """Base class for configuration problems."""


@dataclass(frozen=True)
class Violation:
    kind: str
    keys: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class ValidationError(ConfigError):
    """Raised with the complete list of invariant violations."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


class UnknownTransition(ConfigError):
    pass


def _pair_key(a: str, b: str) -> frozenset:
    return frozenset((a, b))


@dataclass(frozen=True)
class AtomicRates:
    """Relaxation constants of the level scheme.

    ``gamma_level`` holds the level widths Gamma_i, ``gamma_pair`` the
    transition widths Gamma_ik (keyed by unordered pair) and ``branch`` the
    radiative feeding rates gamma_ik of level k by the decay of level i.
    """

    gamma_level: Mapping[str, float]
    gamma_pair: Mapping[frozenset, float]
    branch: Mapping[tuple[str, str], float] = field(default_factory=dict)

    @classmethod
    def from_labels(
        cls,
        levels: Mapping[str, float],
        pairs: Mapping[str, float],
        branch: Mapping[str, float] | None = None,
    ) -> "AtomicRates":
        """Build from two-letter string keys, e.g. ``pairs={"nm": 1.0}``."""
        gp = {_pair_key(key[0], key[1]): float(val) for key, val in pairs.items()}
        br = {(key[0], key[1]): float(val) for key, val in (branch or {}).items()}
        return cls(dict(levels), gp, br)

    @classmethod
    def spontaneous(
        cls,
        levels: Mapping[str, float],
        branch: Mapping[str, float] | None = None,
    ) -> "AtomicRates":
        """Pure radiative relaxation: Gamma_ik = (Gamma_i + Gamma_k) / 2."""
        levels = {k: float(v) for k, v in levels.items()}
        pairs = {
            _pair_key(a, b): 0.5 * (levels[a] + levels[b])
            for a, b in combinations(sorted(levels), 2)
        }
        br = {(key[0], key[1]): float(val) for key, val in (branch or {}).items()}
        return cls(levels, pairs, br)

    def level(self, i: str) -> float:
        return float(self.gamma_level[i])

    def width(self, i: str, k: str) -> float:
        if i == k:
            return self.level(i)
        return float(self.gamma_pair[_pair_key(i, k)])

    def decay(self, i: str, k: str) -> float:
        """gamma_ik, the rate at which level i feeds level k (0 if absent)."""
        return float(self.branch.get((i, k), 0.0))

    @property
    def Gamma(self) -> float:
        return self.width("n", "m")


@dataclass(frozen=True)
class StrongField:
    G: float
    Omega: float = 0.0
    k: float = 1.0


@dataclass(frozen=True)
class ProbeField:
    G_mu: float = 1.0
    k_mu: float = 1.0
    direction: str = ANTIPARALLEL

    @property
    def sigma(self) -> int:
        """+1 for a probe along the strong wave, -1 against it."""
        return 1 if self.direction == PARALLEL else -1


@dataclass(frozen=True)
class Ensemble:
    """Maxwellian ensemble, n_i(v) = N_i exp(-v^2/v_bar^2) / (sqrt(pi) v_bar)."""

    v_bar: float
    N: Mapping[str, float]

    def population(self, i: str) -> float:
        return float(self.N.get(i, 0.0))

    def maxwell(self, v):
        v = np.asarray(v, dtype=float)
        return np.exp(-((v / self.v_bar) ** 2)) / (math.sqrt(math.pi) * self.v_bar)

    def n(self, i: str, v):
        return self.population(i) * self.maxwell(v)


@dataclass(frozen=True)
class Resonator:
    delta_omega_r: float
    Delta_N: float
    l_over_lr: float = 1.0


@dataclass(frozen=True)
class TransitionBundle:
    """Role assignment of levels for one probe transition.

    ``shared`` is the strong-field level the probe couples to, ``other`` the
    remaining strong level and ``partner`` the probe-only level. The two
    signs multiply the strong-field and probe detunings seen by a moving
    atom.
    """

    shared: str = "n"
    other: str = "m"
    partner: str = "j"
    detuning_sign: int = 1
    probe_sign: int = 1


NJ_BUNDLE = TransitionBundle()

# label permutation (an involution) and sign flips for each transition
_SUBSTITUTIONS: dict[str, tuple[dict[str, str], int, int]] = {
    "n-j": ({}, 1, 1),
    "m-l": ({"m": "n", "n": "m", "j": "l", "l": "j"}, -1, 1),
    "f-m": ({"m": "n", "n": "m", "j": "f", "f": "j"}, -1, -1),
    "g-n": ({"j": "g", "g": "j"}, 1, -1),
}


def substitute(sel: str, base: TransitionBundle = NJ_BUNDLE) -> TransitionBundle:
    """Relabel a bundle for the transition ``sel``.

    Each substitution is its own inverse, so applying it twice returns
    ``base``.
    """
    try:
        perm, s_det, s_probe = _SUBSTITUTIONS[sel]
    except KeyError:
        raise UnknownTransition(f"unknown transition {sel!r}; expected one of {TRANSITIONS}")
    return TransitionBundle(
        shared=perm.get(base.shared, base.shared),
        other=perm.get(base.other, base.other),
        partner=perm.get(base.partner, base.partner),
        detuning_sign=base.detuning_sign * s_det,
        probe_sign=base.probe_sign * s_probe,
    )


@dataclass(frozen=True)
class Config:
    """Everything needed to evaluate line shapes and generation curves.

    ``prefactor`` stands for hbar*omega_nj: power densities are reported as
    ``2 * prefactor * |G_mu|^2 * Re{...}``.
    """

    rates: AtomicRates
    strong: StrongField
    probe: ProbeField = ProbeField()
    ensemble: Ensemble = Ensemble(v_bar=100.0, N={"m": 1.0, "n": 0.0, "j": 0.0})
    resonator: Resonator | None = None
    transition: str = "n-j"
    prefactor: float = 1.0
    envelope_wavenumber: str = "k"

    @property
    def bundle(self) -> TransitionBundle:
        return substitute(self.transition)

    @property
    def ratio(self) -> float:
        """k_mu / k."""
        return self.probe.k_mu / self.strong.k

    def with_(self, **changes) -> "Config":
        """Copy with top-level fields or nested field values replaced.

        Nested keys use ``section__field`` (e.g. ``strong__G=0.0``).
        """
        top = {}
        nested: dict[str, dict] = {}
        for key, val in changes.items():
            if "__" in key:
                sec, name = key.split("__", 1)
                nested.setdefault(sec, {})[name] = val
            else:
                top[key] = val
        for sec, vals in nested.items():
            top[sec] = replace(top.get(sec, getattr(self, sec)), **vals)
        return replace(self, **top)


def check(config: Config) -> list[Violation]:
    """Return every invariant violation in ``config`` (empty if valid)."""
    out: list[Violation] = []
    rates = config.rates
    if _pair_key("n", "m") not in rates.gamma_pair:
        out.append(Violation("MissingRequiredRate", ("Gamma_nm",), "Gamma_nm is required"))
    for lvl, val in rates.gamma_level.items():
        if not val > 0:
            out.append(
                Violation("NegativeWidth", (f"Gamma_{lvl}",), f"Gamma_{lvl} = {val} must be > 0")
            )
    for pair, val in rates.gamma_pair.items():
        name = "Gamma_" + "".join(sorted(pair, reverse=True))
        if not val > 0:
            out.append(Violation("NegativeWidth", (name,), f"{name} = {val} must be > 0"))
    for (i, k), val in rates.branch.items():
        name = f"gamma_{i}{k}"
        if val < 0:
            out.append(Violation("NegativeWidth", (name,), f"{name} = {val} must be >= 0"))
        gi = rates.gamma_level.get(i)
        if gi is None:
            out.append(
                Violation("MissingRequiredRate", (f"Gamma_{i}",), f"{name} given without Gamma_{i}")
            )
        elif val > gi:
            out.append(
                Violation(
                    "BranchingExceedsWidth",
                    (name, f"Gamma_{i}"),
                    f"{name} = {val} exceeds Gamma_{i} = {gi}",
                )
            )
    for lvl in ("m", "n"):
        if lvl not in rates.gamma_level:
            out.append(Violation("MissingRequiredRate", (f"Gamma_{lvl}",), f"Gamma_{lvl} is required"))
    if config.strong.G < 0:
        out.append(Violation("InvalidField", ("G",), "G must be >= 0"))
    if not config.strong.k > 0:
        out.append(Violation("InvalidField", ("k",), "k must be > 0"))
    if config.probe.G_mu < 0:
        out.append(Violation("InvalidField", ("G_mu",), "G_mu must be >= 0"))
    if not config.probe.k_mu > 0:
        out.append(Violation("InvalidField", ("k_mu",), "k_mu must be > 0"))
    if config.probe.direction not in DIRECTIONS:
        out.append(
            Violation("InvalidField", ("direction",), f"direction must be one of {DIRECTIONS}")
        )
    if not config.ensemble.v_bar > 0:
        out.append(Violation("InvalidEnsemble", ("v_bar",), "v_bar must be > 0"))
    for lvl, val in config.ensemble.N.items():
        if val < 0:
            out.append(Violation("InvalidEnsemble", (f"N_{lvl}",), f"N_{lvl} must be >= 0"))
    if config.transition not in TRANSITIONS:
        out.append(
            Violation("UnknownTransition", ("transition",), f"unknown transition {config.transition!r}")
        )
    if config.envelope_wavenumber not in ("k", "k_mu"):
        out.append(
            Violation("InvalidField", ("envelope_wavenumber",), "envelope_wavenumber must be k or k_mu")
        )
    res = config.resonator
    if res is not None:
        if not res.delta_omega_r > 0:
            out.append(Violation("InvalidResonator", ("delta_omega_r",), "delta_omega_r must be > 0"))
        if not 0 < res.l_over_lr <= 1:
            out.append(Violation("InvalidResonator", ("l_over_lr",), "l_over_lr must be in (0, 1]"))
        if not res.Delta_N > 0:
            out.append(Violation("InvalidResonator", ("Delta_N",), "Delta_N must be > 0"))
    return out


def validate(config: Config) -> Config:
    """Return ``config`` unchanged, or raise ValidationError listing all problems."""
    problems = check(config)
    if problems:
        raise ValidationError(problems)
    return config
