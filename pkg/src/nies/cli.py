"""Command-line front end: config parsing, scans, figure presets, output.

Config files are line oriented::

    # comment
    [rates]
    Gamma_nm = 1.0
    Gamma_m = 0.6
    ...

Sections are ``[rates]``, ``[strong]``, ``[probe]``, ``[ensemble]``,
``[resonator]`` and ``[scan]``. In ``[rates]`` a one-letter suffix is a
level width (``Gamma_n``), a two-letter suffix a transition width
(``Gamma_jn``) and ``gamma_ik`` the feeding rate of level k by level i.
``spontaneous = true`` fills every missing transition width with
(Gamma_i + Gamma_k)/2. ``[ensemble]`` takes ``v_bar`` and ``N_<level>``.
``[scan] unit_scale`` divides every rate and frequency (and ``v_bar``) so that
values can be given in laboratory units.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import doppler, generation, oracle
from .core import (
    AtomicRates,
    Config,
    ConfigError,
    Ensemble,
    ProbeField,
    Resonator,
    StrongField,
    ValidationError,
    Violation,
    validate,
)
from .steady_state import saturation

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GATE = 3
EXIT_IO = 4

MODES = ("lineshape", "standing_wave", "generation", "oracle_compare", "figure")
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

LINESHAPE_COLUMNS = ("Omega_mu", "z", "F", "f", "population_term", "correction", "total")
COMPARE_COLUMNS = LINESHAPE_COLUMNS + ("oracle", "rel_err")
GENERATION_COLUMNS = ("Omega_mu", "power", "above_threshold", "alpha", "I_minus", "I_plus", "Omega_r")
FIGURE_COLUMNS = ("curve", "parameter", "x", "y")

COLUMN_HELP = """\
output columns (CSV header order; JSON rows use the same names):
  lineshape, standing_wave:
    Omega_mu, z, F, f, population_term, correction, total
      population_term = field-free part of the power
      correction      = power carried by F + f
      total           = population_term + correction
      (standing_wave: F and f sum both waves; z is measured from the
       group addressed by the co-propagating wave)
  oracle_compare:
    the lineshape columns, then oracle, rel_err
      oracle  = numerically velocity-averaged power of the part
                proportional to the strong-pair inversion
      rel_err = |correction - oracle| / |oracle|, empty where both are
                below 1% of the largest |oracle|
  generation:
    Omega_mu, power, above_threshold, alpha, I_minus, I_plus, Omega_r
  figure:
    curve, parameter, x, y

exit codes: 0 ok, 2 invalid input, 3 tolerance gate failed, 4 I/O error
"""


class ParseError(ConfigError):
    """Malformed config text; ``errors`` holds (line number, message) pairs."""

    def __init__(self, errors):
        self.errors = sorted(errors)
        super().__init__("; ".join(f"line {n}: {m}" for n, m in self.errors))


class UnknownFigure(ValueError):
    pass


class GateFailure(RuntimeError):
    pass


SECTIONS = ("rates", "strong", "probe", "ensemble", "resonator", "scan")
_SCALED = {
    "strong": ("G", "Omega"),
    "probe": ("G_mu",),
    "ensemble": ("v_bar",),
    "resonator": ("delta_omega_r",),
}


@dataclass(frozen=True)
class Document:
    config: Config
    gate: float | None = None


def _tokenize(text: str):
    """Yield (section, key, value, line number); collects syntax errors."""
    errors = []
    entries = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append((lineno, f"malformed section header {line!r}"))
                continue
            section = line[1:-1].strip()
            if section not in SECTIONS:
                errors.append((lineno, f"unknown section [{section}]"))
            continue
        if "=" not in line:
            errors.append((lineno, f"expected 'key = value', got {line!r}"))
            continue
        if section is None:
            errors.append((lineno, "key outside of any section"))
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            errors.append((lineno, "empty key"))
            continue
        entries.append((section, key, value, lineno))
    return entries, errors


def _float(value, lineno, errors):
    try:
        return float(value)
    except ValueError:
        errors.append((lineno, f"not a number: {value!r}"))
        return None


def _bool(value, lineno, errors):
    v = value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    errors.append((lineno, f"not a boolean: {value!r}"))
    return None


_KNOWN = {
    "strong": {"G", "Omega", "k"},
    "probe": {"G_mu", "k_mu", "direction", "transition"},
    "resonator": {"delta_omega_r", "Delta_N", "l_over_lr"},
    "scan": {"unit_scale", "prefactor", "envelope_wavenumber", "gate"},
}


def parse_document(text: str) -> Document:
    """Parse and validate config text.

    Raises ParseError (syntax, with line numbers) or ValidationError
    (physically inconsistent values, naming the offending keys).
    """
    entries, errors = _tokenize(text)
    seen = {}
    values: dict[str, dict] = {s: {} for s in SECTIONS}
    for section, key, value, lineno in entries:
        if (section, key) in seen:
            errors.append((lineno, f"duplicate key {key!r} (first on line {seen[section, key]})"))
            continue
        seen[section, key] = lineno
        if section == "rates":
            if key == "spontaneous":
                val = _bool(value, lineno, errors)
            elif key.startswith(("Gamma_", "gamma_")) and len(key) in (7, 8) and key[6:].isalpha():
                if key.startswith("gamma_") and len(key) != 8:
                    errors.append((lineno, f"branching rate needs two level labels: {key!r}"))
                    continue
                val = _float(value, lineno, errors)
            else:
                errors.append((lineno, f"unknown rate key {key!r}"))
                continue
        elif section == "ensemble":
            if key == "v_bar" or (key.startswith("N_") and len(key) == 3):
                val = _float(value, lineno, errors)
            else:
                errors.append((lineno, f"unknown ensemble key {key!r}"))
                continue
        elif section in _KNOWN:
            if key not in _KNOWN[section]:
                errors.append((lineno, f"unknown key {key!r} in [{section}]"))
                continue
            if key in ("direction", "transition", "envelope_wavenumber"):
                val = value
            else:
                val = _float(value, lineno, errors)
        else:
            continue
        if val is not None:
            values[section][key] = val
    if errors:
        raise ParseError(errors)
    return Document(config=_build(values), gate=values["scan"].get("gate"))


def parse_config(text: str) -> Config:
    return parse_document(text).config


def _build(values) -> Config:
    scan = values["scan"]
    unit = scan.get("unit_scale", 1.0)
    if not unit > 0:
        raise ValidationError([_violation("InvalidField", "unit_scale", "unit_scale must be > 0")])

    rates_in = values["rates"]
    levels, pairs, branch = {}, {}, {}
    for key, val in rates_in.items():
        if key == "spontaneous":
            continue
        label = key[6:]
        if key.startswith("gamma_"):
            branch[label] = val / unit
        elif len(label) == 1:
            levels[label] = val / unit
        else:
            pairs[label] = val / unit
    if rates_in.get("spontaneous"):
        have = {frozenset(p) for p in pairs}
        for a, b in combinations(sorted(levels), 2):
            if frozenset((a, b)) not in have:
                pairs[b + a] = 0.5 * (levels[a] + levels[b])
    rates = AtomicRates.from_labels(levels, pairs, branch)

    def scaled(section, key, default):
        val = values[section].get(key, default)
        return val / unit if key in _SCALED.get(section, ()) and val is not None else val

    strong = StrongField(
        G=scaled("strong", "G", 0.0), Omega=scaled("strong", "Omega", 0.0), k=values["strong"].get("k", 1.0)
    )
    probe_vals = values["probe"]
    direction = probe_vals.get("direction", "antiparallel")
    probe = ProbeField(G_mu=scaled("probe", "G_mu", 1.0), k_mu=probe_vals.get("k_mu", 1.0), direction=direction)

    ens_vals = values["ensemble"]
    if "v_bar" not in ens_vals:
        raise ValidationError([_violation("InvalidEnsemble", "v_bar", "v_bar is required")])
    N = {key[2:]: val for key, val in ens_vals.items() if key.startswith("N_")}
    ensemble = Ensemble(v_bar=scaled("ensemble", "v_bar", None), N=N)

    resonator = None
    if values["resonator"]:
        rv = values["resonator"]
        missing = [k for k in ("delta_omega_r", "Delta_N") if k not in rv]
        if missing:
            raise ValidationError(
                [_violation("InvalidResonator", k, f"{k} is required in [resonator]") for k in missing]
            )
        resonator = Resonator(
            delta_omega_r=scaled("resonator", "delta_omega_r", None),
            Delta_N=rv["Delta_N"],
            l_over_lr=rv.get("l_over_lr", 1.0),
        )
    config = Config(
        rates=rates,
        strong=strong,
        probe=probe,
        ensemble=ensemble,
        resonator=resonator,
        transition=probe_vals.get("transition", "n-j"),
        prefactor=scan.get("prefactor", 1.0),
        envelope_wavenumber=scan.get("envelope_wavenumber", "k"),
    )
    return validate(config)


def _violation(kind, key, message):
    return Violation(kind, (key,), message)


# --------------------------------------------------------------------- scans


@dataclass(frozen=True)
class ScanRequest:
    mode: str
    start: float
    stop: float
    points: int
    config: Config | None = None
    format: str = "csv"
    out: str | None = None
    gate: float | None = None
    figure: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.points < 2:
            raise ValueError("points must be >= 2")
        if not self.start < self.stop:
            raise ValueError("start must be < stop")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    max_rel_err: float | None = None


def _lineshape_table(x, config: Config, standing: bool) -> Table:
    if standing:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", doppler.OverlapWarning)
            s = doppler.standing_wave(x, config)
        F, f, z = s.F_plus + s.F_minus, s.f_plus + s.f_minus, s.z_plus
        pop = s.scale * s.gaussian * s.population_term
        corr = s.scale * s.gaussian * s.correction_weight * s.structure
    else:
        s = doppler.lineshape(x, config)
        F, f, z = s.F, s.f, s.z
        pop = s.scale * s.gaussian * s.population_term
        corr = s.correction
    total = pop + corr
    rows = list(zip(x, z, F, f, pop, corr, total))
    return Table(LINESHAPE_COLUMNS, rows)


def compare_grid(config: Config, points: int = 201, half_width: float = 10.0):
    """Default comparison grid: |z| <= half_width * Gamma_B around the hole."""
    atom = doppler.effective_atom(config)
    centre = atom.widths.sign * config.strong.Omega * config.ratio
    gb = saturation(config.rates, config.strong).gamma_B
    return np.linspace(centre - half_width * gb, centre + half_width * gb, points)


COMPARE_FLOOR = 1e-2


def _compare_table(x, config: Config) -> Table:
    base = _lineshape_table(x, config, standing=False)
    orc = oracle.average_correction(x, config)
    closed = np.array([row[5] for row in base.rows])
    floor = COMPARE_FLOOR * float(np.max(np.abs(orc))) if orc.size else 0.0
    rep = oracle.compare(closed, orc, abs_floor=floor)
    rows = [
        row + (o, float(e) if inc else None)
        for row, o, e, inc in zip(base.rows, orc, rep.rel_err, rep.included)
    ]
    return Table(COMPARE_COLUMNS, rows, max_rel_err=rep.max_rel_err)


def _generation_table(x, config: Config) -> Table:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", generation.RegimeWarning)
        p = generation.power(x, config)
    rows = list(zip(x, p.power, p.above_threshold.astype(int), p.alpha, p.I_minus, p.I_plus, p.Omega_r))
    return Table(GENERATION_COLUMNS, rows)


def run_scan(req: ScanRequest) -> Table:
    """Evaluate one scan; rows are ordered by grid index."""
    if req.mode == "figure":
        return figure_table(req.figure or "fig2")
    if req.config is None:
        raise ConfigError(f"mode {req.mode!r} needs a config")
    x = req.grid
    if req.mode == "lineshape":
        return _lineshape_table(x, req.config, standing=False)
    if req.mode == "standing_wave":
        return _lineshape_table(x, req.config, standing=True)
    if req.mode == "generation":
        return _generation_table(x, req.config)
    return _compare_table(x, req.config)


def check_gate(table: Table, gate: float | None):
    """Raise GateFailure when a comparison table exceeds ``gate``."""
    if gate is None or table.max_rel_err is None:
        return
    if not table.max_rel_err <= gate:
        raise GateFailure(f"max rel_err {table.max_rel_err:.6g} exceeds gate {gate:.6g}")


# ------------------------------------------------------------------ figures


FIG4_S = 0.9


def _fig_generation_config(Nm: float, Nn: float, gamma_mn: float = 0.0) -> Config:
    rates = AtomicRates.spontaneous({"m": 0.3, "n": 1.0, "g": 0.2}, {"mn": gamma_mn})
    return Config(
        rates=rates,
        strong=StrongField(G=0.3, Omega=20.0),
        probe=ProbeField(G_mu=0.1, k_mu=1.0),
        ensemble=Ensemble(v_bar=200.0, N={"m": Nm, "n": Nn, "g": 3.0}),
        resonator=Resonator(delta_omega_r=2.0, Delta_N=1.0),
    )


def figure_preset(name: str) -> list[tuple[str, float, np.ndarray, object]]:
    """Curve family of one figure as (label, parameter, x grid, evaluator)."""
    if name == "fig2":
        x = np.linspace(-4.0, 4.0, 801)
        return [(f"z1/z2={q:g}", q, x, lambda x, q=q: doppler.normalized_f_curve(x, z1_over_z2=q))
                for q in (5.0, 2.5, 1.0)]
    if name == "fig3":
        x = np.linspace(-6.0, 6.0, 1201)
        return [(f"zeta/z0={r:.6g}", r, x, lambda x, r=r: doppler.normalized_f_curve(x, zeta_over_z0=r))
                for r in (0.0, 1.0, doppler.SQRT3)]
    if name == "fig4":
        x = np.linspace(-6.0, 6.0, 1201)
        return [
            (f"z1/z2={q:g}", q, x, lambda x, q=q: doppler.normalized_F_curve(x, FIG4_S, z1_over_z2=q))
            for q in (5.0, 2.5, 1.0)
        ]
    if name == "fig5":
        x = np.linspace(-6.0, 6.0, 1201)
        return [(f"c={c:g}", c, x, lambda x, c=c: doppler.normalized_F_curve(x, c, zeta_over_z0=1.0))
                for c in (-1.0, 0.0, 1.0)]
    if name == "fig6":
        x = np.linspace(-40.0, 40.0, 1601)
        cases = [("N_m>N_n", 1.0, _fig_generation_config(1.0, 0.5)),
                 ("N_m<N_n", -1.0, _fig_generation_config(0.5, 1.0))]
        return [(lab, p, x, lambda x, c=c: generation.power(x, c).power) for lab, p, c in cases]
    if name == "fig7":
        x = np.linspace(-40.0, 40.0, 1601)
        cases = [("N_m>N_n", 1.0, _fig_generation_config(1.0, 0.5)),
                 ("N_m<N_n", -1.0, _fig_generation_config(0.5, 1.0))]
        return [(lab, p, x, lambda x, c=c: generation.resonator_map(x, c, warn=False))
                for lab, p, c in cases]
    raise UnknownFigure(f"unknown figure {name!r}; expected one of {FIGURES}")


def figure_table(name: str) -> Table:
    """Rows (curve, parameter, x, y). For fig7 x is Omega_r and y is Omega_mu."""
    rows = []
    for label, param, x, fn in figure_preset(name):
        y = np.asarray(fn(x), dtype=float)
        if name == "fig7":
            x, y = y, x
        rows += [(label, param, xi, yi) for xi, yi in zip(x, y)]
    return Table(FIGURE_COLUMNS, rows)


# ------------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _json_value(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def render(table: Table, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()
    payload = {
        "columns": list(table.columns),
        "rows": [dict(zip(table.columns, map(_json_value, row))) for row in table.rows],
    }
    if table.max_rel_err is not None:
        payload["max_rel_err"] = table.max_rel_err
    return json.dumps(payload, indent=1) + "\n"


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


# --------------------------------------------------------------------- main


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nies-sim",
        description="Probe line shapes and generation curves of gas atoms in a strong field.",
        epilog=COLUMN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="evaluate one mode over a detuning grid",
                          epilog=COLUMN_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    scan.add_argument("--config", required=True)
    scan.add_argument("--mode", required=True, choices=MODES[:-1])
    scan.add_argument("--from", dest="start", type=float, required=True)
    scan.add_argument("--to", dest="stop", type=float, required=True)
    scan.add_argument("--points", type=int, required=True)
    scan.add_argument("--format", choices=("csv", "json"), default="csv")
    scan.add_argument("--out")
    scan.add_argument("--gate", type=float, help="oracle_compare: fail (exit 3) above this max rel_err")

    fig = sub.add_parser("figure", help="write a figure's normalized curve family",
                         epilog=COLUMN_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    fig.add_argument("name", choices=FIGURES)
    fig.add_argument("--out", help="directory; writes <name>.csv (or .json)")
    fig.add_argument("--format", choices=("csv", "json"), default="csv")

    cmp_ = sub.add_parser("compare", help="closed form vs numerical velocity average",
                          epilog=COLUMN_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--gate", type=float, help="maximum allowed rel_err (default: [scan] gate)")
    cmp_.add_argument("--from", dest="start", type=float)
    cmp_.add_argument("--to", dest="stop", type=float)
    cmp_.add_argument("--points", type=int, default=201)
    cmp_.add_argument("--format", choices=("csv", "json"), default="csv")
    cmp_.add_argument("--out")
    return p


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "figure":
            table = figure_table(args.name)
            out = None
            if args.out is not None:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                out = str(Path(args.out) / f"{args.name}.{args.format}")
            _emit(render(table, args.format), out)
            return EXIT_OK

        doc = parse_document(_read(args.config))
        if args.command == "scan":
            req = ScanRequest(args.mode, args.start, args.stop, args.points, doc.config,
                              args.format, args.out, args.gate)
        else:
            if (args.start is None) != (args.stop is None):
                raise ValueError("give both --from and --to, or neither")
            if args.start is None:
                grid = compare_grid(doc.config, args.points)
                start, stop = float(grid[0]), float(grid[-1])
            else:
                start, stop = args.start, args.stop
            gate = args.gate if args.gate is not None else doc.gate
            req = ScanRequest("oracle_compare", start, stop, args.points, doc.config,
                              args.format, args.out, gate)
        table = run_scan(req)
        _emit(render(table, req.format), req.out)
        check_gate(table, req.gate)
        return EXIT_OK
    except GateFailure as exc:
        print(f"nies-sim: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (ConfigError, ValueError) as exc:
        print(f"nies-sim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"nies-sim: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
