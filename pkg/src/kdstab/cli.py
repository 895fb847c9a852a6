"""Command-line front end.

Settings come from built-in defaults, then an optional INI file
(``--config``), then command-line flags.  Exit codes: 0 success,
1 invalid input, 2 numerical failure, 3 failed verification.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field

from . import __version__
from .errors import KDStabError, NumericalError, ValidationError
from .flatspec import (
    PerturbationParams,
    collisions_to_csv,
    default_tau_grid,
    enumerate_collisions,
)
from .model import DEFAULT_N, ModelParams, WaveParams, wave_report
from .sweep import PRESETS, GridSpec, SweepConfig, find_band_edge, grid_sweep, numeric_spectrum

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
SUBCOMMANDS = ("wave", "spectrum", "collisions", "band-edge", "sweep", "verify")
FORMATS = ("csv", "json")

# section -> key -> parser
CONFIG_SCHEMA = {
    "params": {"rho": float, "phi": float, "k": float, "a": float, "gamma": float, "tau": float},
    "numerics": {"N": int, "N_max": int, "refine": "bool", "adaptive": "bool",
                 "margin": float, "workers": int},
    "grid": {"preset": str, "rho": "floats", "phi": "floats", "k": "floats", "a": "floats",
             "gamma": "floats", "tau": "floats"},
    "collisions": {"delta_max": int, "tau_grid": "taus"},
    "output": {"path": str, "format": str},
}


class ConfigError(ValidationError):
    pass


@dataclass
class RunConfig:
    """Fully resolved settings for one invocation."""

    subcommand: str
    rho: float = 0.0
    phi: float = 2.0
    k: float = 1.0
    a: float = 0.02
    gamma: float = 0.01
    tau: float = 0.0
    N: int = DEFAULT_N
    N_max: int = 256
    refine: bool = True
    adaptive: bool = True
    margin: float = 0.1
    workers: int | None = None
    preset: str | None = None
    grid: dict = field(default_factory=dict)
    delta_max: int = 3
    tau_grid: tuple = ()
    criteria: tuple = ()
    output: str | None = None
    format: str | None = None

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.delta_max < 1:
            raise ConfigError(f"delta-max must be >= 1, got {self.delta_max}")
        # constructing these runs their own checks
        self.model_params()
        self.wave_params()
        self.sweep_config()
        if self.subcommand in ("spectrum",):
            self.perturbation()

    def model_params(self) -> ModelParams:
        return ModelParams(self.rho, self.phi)

    def wave_params(self) -> WaveParams:
        return WaveParams(self.k, self.a)

    def perturbation(self) -> PerturbationParams:
        return PerturbationParams(self.gamma, self.tau)

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(N=self.N, N_max=self.N_max, adaptive=self.adaptive,
                           refine=self.refine, margin=self.margin, workers=self.workers)

    def grid_spec(self) -> GridSpec:
        base = PRESETS[self.preset]() if self.preset else GridSpec()
        values = {name: getattr(base, name) for name in ("rho", "phi", "k", "a", "gamma", "tau")}
        values.update(self.grid)
        return GridSpec(**values)


# parsing helpers ---------------------------------------------------------------

def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _taus(text: str) -> tuple:
    if text.strip().lower() == "default":
        return tuple(default_tau_grid())
    if text.strip().lower() == "none":
        return ()
    return _floats(text)


def _convert(kind, text: str):
    if kind == "bool":
        return _bool(text)
    if kind == "floats":
        return _floats(text)
    if kind == "taus":
        return _taus(text)
    return kind(text.strip())


def _line_of(text: str, section: str, key: str | None) -> int:
    """1-based line of ``key`` inside ``[section]`` (or of the header itself)."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None:
            name = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            if name.lower() == key.lower():
                return i
    return 0


def load_config(path: str) -> dict:
    """Read an INI file into ``{field: value}``; unknown sections or keys are errors."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep "N" distinct from "n"
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        msg = str(exc).splitlines()[0]
        errors = getattr(exc, "errors", None)
        if isinstance(exc, configparser.MissingSectionHeaderError):
            msg = "key outside any [section]"
        elif errors:
            lineno, bad = errors[0]  # bad is already repr()'d
            msg = f"cannot parse {bad}"
        raise ConfigError(f"{path}:{lineno or '?'}: malformed config: {msg}") from None

    out: dict = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            line = _line_of(text, section, None)
            raise ConfigError(f"{path}:{line}: unknown section [{section}]")
        schema = CONFIG_SCHEMA[section]
        for key, raw in parser.items(section):
            line = _line_of(text, section, key)
            if key not in schema:
                raise ConfigError(f"{path}:{line}: unknown key {key!r} in [{section}]")
            try:
                value = _convert(schema[key], raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line}: bad value for {key!r}: {exc}") from None
            if section == "grid" and key != "preset":
                out.setdefault("grid", {})[key] = value
            elif section == "output":
                out["output" if key == "path" else "format"] = value
            else:
                out[key] = value
    return out


# argument parser ---------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters")
    for name in ("rho", "phi", "k", "a", "gamma", "tau"):
        g.add_argument(f"--{name}", type=float, default=None)
    n = p.add_argument_group("numerics")
    n.add_argument("--N", type=int, default=None, help="initial Fourier truncation")
    n.add_argument("--N-max", dest="N_max", type=int, default=None)
    n.add_argument("--refine", dest="refine", action="store_true", default=None,
                   help="use the Newton-refined wave (default)")
    n.add_argument("--no-refine", dest="refine", action="store_false",
                   help="use the third-order expansion wave")
    n.add_argument("--no-adaptive", dest="adaptive", action="store_false", default=None,
                   help="single truncation, no convergence loop")
    n.add_argument("--margin", type=float, default=None)
    n.add_argument("--workers", type=int, default=None)
    o = p.add_argument_group("output")
    o.add_argument("--config", default=None, help="INI file with default settings")
    o.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    o.add_argument("--format", choices=FORMATS, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdstab",
        description="Transverse stability of small periodic waves of the KD equation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "wave": "profile coefficients, speed and residual",
        "spectrum": "Hill spectrum at one (gamma, tau)",
        "collisions": "catalog of collisions of the zero-amplitude spectrum",
        "band-edge": "numeric and predicted edge of the modulational band",
        "sweep": "analytic and numeric verdicts on a parameter grid",
        "verify": "run the acceptance checks",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_common(p)
        if name == "collisions":
            p.add_argument("--delta-max", dest="delta_max", type=int, default=None)
            p.add_argument("--tau-grid", dest="tau_grid", type=_taus, default=None,
                           help="comma-separated values, 'default' or 'none'")
        if name == "sweep":
            p.add_argument("--preset", choices=sorted(PRESETS), default=None)
        if name == "verify":
            p.add_argument("--criteria", type=lambda s: tuple(int(x) for x in s.split(",")),
                           default=None, help="comma-separated criterion numbers")
    return parser


def resolve(argv) -> RunConfig:
    """Parse ``argv`` into a validated :class:`RunConfig`."""
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.subcommand)
    if args.config:
        for key, value in load_config(args.config).items():
            setattr(cfg, key, value)
    for key, value in vars(args).items():
        if key in ("subcommand", "config") or value is None:
            continue
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


# commands ----------------------------------------------------------------------

def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def cmd_wave(cfg: RunConfig) -> tuple[str, int]:
    rep = wave_report(cfg.model_params(), cfg.wave_params(), cfg.refine, cfg.N)
    if cfg.format == "csv":
        rows = [[n, repr(re_), repr(im), repr(rep.c), repr(rep.residual_norm)]
                for n, re_, im in rep.w.to_json()]
        return _rows_csv(("n", "re", "im", "c", "residual_norm"), rows), EXIT_OK
    return _dump(rep.to_json()), EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> tuple[str, int]:
    res = numeric_spectrum(cfg.model_params(), cfg.wave_params(), cfg.perturbation(),
                           cfg.sweep_config())
    if cfg.format == "csv":
        rows = [[repr(float(z.real)), repr(float(z.imag))] for z in res.eigenvalues]
        return _rows_csv(("re", "im"), rows), EXIT_OK
    return _dump(res.to_json()), EXIT_OK


def cmd_collisions(cfg: RunConfig) -> tuple[str, int]:
    cols = enumerate_collisions(cfg.delta_max, cfg.tau_grid, cfg.k)
    if cfg.format == "json":
        return _dump([c.to_json() for c in cols]), EXIT_OK
    return collisions_to_csv(cols), EXIT_OK


def cmd_band_edge(cfg: RunConfig) -> tuple[str, int]:
    edge = find_band_edge(cfg.model_params(), cfg.wave_params(), cfg.tau, cfg.sweep_config())
    if cfg.format == "csv":
        d = edge.to_json()
        return _rows_csv(tuple(d), [[repr(v) for v in d.values()]]), EXIT_OK
    return _dump(edge.to_json()), EXIT_OK


def cmd_sweep(cfg: RunConfig) -> tuple[str, int]:
    table = grid_sweep(cfg.grid_spec(), cfg.sweep_config())
    if cfg.format == "json":
        return _dump(table.to_json()), EXIT_OK
    return table.to_csv(), EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    from .acceptance import run_criterion

    numbers = cfg.criteria or tuple(range(1, 11))
    lines, failed = [], 0
    for n in numbers:
        r = run_criterion(n)
        # keep stdout parseable in JSON mode
        print(r.line(), file=sys.stderr if cfg.format == "json" else sys.stdout, flush=True)
        lines.append(r)
        failed += not r.passed
    summary = f"{len(numbers) - failed}/{len(numbers)} criteria passed\n"
    if cfg.format == "json":
        out = _dump([{"number": r.number, "title": r.title, "passed": r.passed,
                      "detail": r.detail, "elapsed": r.elapsed} for r in lines])
    else:
        out = summary
    return out, EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "wave": cmd_wave,
    "spectrum": cmd_spectrum,
    "collisions": cmd_collisions,
    "band-edge": cmd_band_edge,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute a resolved config; output goes to ``cfg.output`` or stdout."""
    try:
        text, code = COMMANDS[cfg.subcommand](cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, KDStabError) as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    try:
        cfg = resolve(sys.argv[1:] if argv is None else argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:
        # argparse reports usage errors with status 2; those are input errors here
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    return run(cfg)
