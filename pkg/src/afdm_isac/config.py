"""Plain-text experiment configuration.

INI grammar (``configparser``), all sections and keys optional::

    [system]
    preset = desk              ; table1 | desk | small, base for the keys below
    N = 1024
    bandwidth_hz = 15.36e6
    carrier_hz = 79e9
    tau_max_s = 0.65e-6
    f_max_hz = 45e3
    k_f = 4
    overhead = min             ; "min" or a fraction in (0, 1]
    m0 = auto                  ; "auto" or a pilot index
    cpp_len = auto             ; "auto" (= l_max) or samples
    c1 = auto                  ; "auto" (= (k_f + k_max) / N) or a value
    c2 = 0
    modulation_bits = 2

    [experiment]
    snr_db = -10, 0, 10, 20, 30
    trials = 500
    P = 1
    mode = pilot               ; pilot | full
    sic = off                  ; on | off
    seed = 0
    integer_shifts = no
    si_db = 30
    oversampling = 2

    [grid]
    delta_tau = 0.1
    delta_f = 0.1
    window = 1

    [throughput]
    overheads = min, 0.35, 0.4, 0.5

Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace

from .harness import ConfigError, ExperimentConfig
from .params import SystemConfig, desk, small, table1

PRESETS = {"table1": table1, "desk": desk, "small": small}

_SYSTEM_KEYS = {
    "N": int, "bandwidth_hz": float, "carrier_hz": float, "tau_max_s": float,
    "f_max_hz": float, "k_f": int, "overhead": "overhead", "m0": "auto_int",
    "cpp_len": "auto_int", "c1": "auto_float", "c2": float, "modulation_bits": int,
}
_EXPERIMENT_KEYS = {
    "snr_db": "floats", "trials": int, "P": int, "mode": str, "sic": bool, "seed": int,
    "integer_shifts": bool, "si_db": float, "oversampling": int,
}
_GRID_KEYS = {"delta_tau": float, "delta_f": float, "window": int}
_SECTIONS = {"system", "experiment", "grid", "throughput"}


@dataclass
class RunConfig:
    experiment: ExperimentConfig
    overheads: list = field(default_factory=lambda: [None, 0.35, 0.4, 0.5])


def _overhead(v: str):
    return None if v.strip().lower() in ("min", "none", "") else float(v)


def _convert(section: configparser.SectionProxy, key: str, kind):
    raw = section[key]
    try:
        if kind is bool:
            return section.getboolean(key)
        if kind == "floats":
            vals = [float(s) for s in raw.replace(";", ",").split(",") if s.strip()]
            return tuple(vals)
        if kind == "overhead":
            return _overhead(raw)
        if kind in ("auto_int", "auto_float"):
            if raw.strip().lower() in ("auto", "none", ""):
                return None
            return int(raw) if kind == "auto_int" else float(raw)
        return kind(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r}: {exc}") from exc


def _section_values(cp: configparser.ConfigParser, name: str, keys: dict) -> dict:
    if not cp.has_section(name):
        return {}
    sec = cp[name]
    unknown = set(sec.keys()) - {k.lower() for k in keys} - ({"preset"} if name == "system" else set())
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    out = {}
    for key, kind in keys.items():
        if key.lower() in sec:
            out[key] = _convert(sec, key.lower(), kind)
    return out


def parse_config(text: str) -> RunConfig:
    """Parse INI text into a :class:`RunConfig`; raises :class:`ConfigError`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    extra = set(cp.sections()) - _SECTIONS
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")

    preset = cp.get("system", "preset", fallback="desk").strip()
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    system: SystemConfig = PRESETS[preset]()
    sys_vals = _section_values(cp, "system", _SYSTEM_KEYS)
    try:
        system = replace(system, **sys_vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    exp_vals = _section_values(cp, "experiment", _EXPERIMENT_KEYS)
    exp_vals.update(_section_values(cp, "grid", _GRID_KEYS))
    try:
        exp = ExperimentConfig(system=system, **exp_vals)
    except ConfigError:
        raise
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc

    run = RunConfig(exp)
    if cp.has_section("throughput"):
        sec = cp["throughput"]
        unknown = set(sec.keys()) - {"overheads"}
        if unknown:
            raise ConfigError(f"unknown keys in [throughput]: {sorted(unknown)}")
        if "overheads" in sec:
            try:
                run.overheads = [_overhead(s) for s in sec["overheads"].split(",") if s.strip()]
            except ValueError as exc:
                raise ConfigError(f"[throughput] overheads: {exc}") from exc
    return run


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def default_config() -> RunConfig:
    return parse_config("")


def override(run: RunConfig, **kw) -> RunConfig:
    """Apply command-line overrides (``None`` values are ignored)."""
    kw = {k: v for k, v in kw.items() if v is not None}
    if not kw:
        return run
    names = {f.name for f in fields(ExperimentConfig)}
    bad = set(kw) - names
    if bad:
        raise ConfigError(f"unknown overrides {sorted(bad)}")
    try:
        return replace(run, experiment=replace(run.experiment, **kw))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
