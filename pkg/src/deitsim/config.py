"""Layered key-value configuration with explicit unit suffixes.

Files use an INI-style ``[section]`` layout.  Every physical quantity
carries a unit token ("0.68 MHz", "150 G", "1e14 cm^-3", "1.6 mm"), so a
bare number for a dimensioned key is an error.  Frequencies are ordinary
frequencies and become angular (rad/s) on load.  Later files override
earlier ones key by key.
"""

from __future__ import annotations

import configparser
import math
from importlib import resources
from pathlib import Path

from .constants import EXCITED, GROUND
from .errors import ConfigError

TWO_PI = 2.0 * math.pi

_FREQ_UNITS = {"Hz": TWO_PI, "kHz": TWO_PI * 1e3, "MHz": TWO_PI * 1e6, "GHz": TWO_PI * 1e9}
_LENGTH_UNITS = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_DENSITY_UNITS = {"m^-3": 1.0, "cm^-3": 1e6}
_FIELD_UNITS = {"G": 1.0, "T": 1e4}
_POLARIZATIONS = {"sigma+": +1, "sigma-": -1, "pi": 0}


def _unit_value(text: str, units: dict[str, float], key: str) -> float:
    parts = text.split()
    if len(parts) != 2 or parts[1] not in units:
        raise ConfigError(
            f"{key}: expected '<number> <unit>' with unit in {sorted(units)}, got {text!r}"
        )
    try:
        return float(parts[0]) * units[parts[1]]
    except ValueError as exc:
        raise ConfigError(f"{key}: bad number in {text!r}") from exc


def _level_value(text: str, key: str) -> tuple[str, int, int]:
    parts = text.split()
    try:
        manifold, f_part, m_part = parts
        if manifold not in (GROUND, EXCITED):
            raise ValueError
        f = int(f_part.removeprefix("F="))
        m = int(m_part.removeprefix("mF="))
        return manifold, f, m
    except (ValueError, IndexError) as exc:
        raise ConfigError(
            f"{key}: expected e.g. '5S1/2 F=1 mF=0', got {text!r}"
        ) from exc


def _plain(cast, key, text):
    try:
        return cast(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}") from exc


def _bool_value(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


# (section, key) -> parser(text, keyname) -> value.  Everything a config
# file may contain is declared here; unknown keys are rejected.
_PARSERS = {}


def _register(section: str, key: str, parser):
    _PARSERS[(section, key)] = parser


for _k in ("magnetic_field",):
    _register("atom", _k, lambda t, k: _unit_value(t, _FIELD_UNITS, k))
_register("atom", "linewidth", lambda t, k: _unit_value(t, _FREQ_UNITS, k))
_register("atom", "density", lambda t, k: _unit_value(t, _DENSITY_UNITS, k))

for _k in ("1", "2", "3", "4", "5", "6", "7", "X"):
    _register("levels", f"state_{_k}", _level_value)

for _k in ("rabi_1", "rabi_2", "rabi_pump", "delta_1", "delta_2", "delta_pump"):
    _register("lasers", _k, lambda t, k: _unit_value(t, _FREQ_UNITS, k))
for _k in ("polarization_1", "polarization_2", "polarization_pump"):
    _register(
        "lasers",
        _k,
        lambda t, k: _POLARIZATIONS[t]
        if t in _POLARIZATIONS
        else (_ for _ in ()).throw(ConfigError(f"{k}: unknown polarization {t!r}")),
    )

_register("mixture", "p1", lambda t, k: _plain(float, k, t))
_register("mixture", "p2", lambda t, k: _plain(float, k, t))
_register("mixture", "raman_efficiency", lambda t, k: _plain(float, k, t))
_register("mixture", "from_preparation", _bool_value)

_register("geometry", "length", lambda t, k: _unit_value(t, _LENGTH_UNITS, k))

_register("run", "t_end", lambda t, k: _unit_value(t, _TIME_UNITS, k))
_register("run", "samples", lambda t, k: _plain(int, k, t))
_register("run", "truncation_order", lambda t, k: _plain(int, k, t))
_register("run", "rwa_cutoff", lambda t, k: _unit_value(t, _FREQ_UNITS, k))
_register("run", "tolerance", lambda t, k: _plain(float, k, t))
_register("run", "tiers", lambda t, k: tuple(s.strip() for s in t.split(",") if s.strip()))
_register("run", "dipole_model", lambda t, k: t.strip())
_register("run", "turn_on_steps", lambda t, k: _plain(int, k, t))
_register("run", "turn_on_time", lambda t, k: _unit_value(t, _TIME_UNITS, k))
_register("run", "stark_state_decay", _bool_value)

_register("motion", "dephasing", lambda t, k: _unit_value(t, _FREQ_UNITS, k))
_register("motion", "transit", lambda t, k: _unit_value(t, _FREQ_UNITS, k))

_register("pulse", "photons", lambda t, k: _plain(float, k, t))
_register("pulse", "waist", lambda t, k: _unit_value(t, _LENGTH_UNITS, k))
_register("pulse", "duration", lambda t, k: _unit_value(t, _TIME_UNITS, k))
_register("pulse", "doppler_detuning", lambda t, k: _unit_value(t, _FREQ_UNITS, k))

_register("sweep", "parameter", lambda t, k: t.strip())
_register("sweep", "values", lambda t, k: tuple(float(v) for v in t.split(",")))
_register("sweep", "unit", lambda t, k: t.strip())


class RunConfig:
    """Resolved configuration: a flat {(section, key): value} mapping."""

    def __init__(self, values: dict[tuple[str, str], object], origin: str = ""):
        self.values = values
        self.origin = origin

    def get(self, section: str, key: str, default=None):
        return self.values.get((section, key), default)

    def require(self, section: str, key: str):
        try:
            return self.values[(section, key)]
        except KeyError:
            raise ConfigError(f"missing required config key [{section}] {key}") from None

    def level_map(self) -> dict[str, tuple[str, int, int]]:
        roles = {}
        for (section, key), value in self.values.items():
            if section == "levels":
                roles[key.removeprefix("state_")] = value
        if roles and set(roles) != {"1", "2", "3", "4", "5", "6", "7", "X"}:
            raise ConfigError("level map must define states 1..7 and X")
        return roles

    def polarizations(self) -> dict[str, int]:
        return {
            "1": self.require("lasers", "polarization_1"),
            "2": self.require("lasers", "polarization_2"),
            "p": self.require("lasers", "polarization_pump"),
        }

    def describe(self) -> list[str]:
        """Stable 'section.key = value' lines for output headers."""
        out = []
        for (section, key) in sorted(self.values):
            out.append(f"{section}.{key} = {self.values[(section, key)]!r}")
        return out


def _parse_file(text: str, origin: str) -> dict[tuple[str, str], object]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case (state_X)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from exc
    values: dict[tuple[str, str], object] = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _PARSERS.get((section, key))
            if spec is None:
                raise ConfigError(f"{origin}: unknown config key [{section}] {key}")
            values[(section, key)] = spec(raw.strip(), f"[{section}] {key}")
    return values


def load_config(*sources: str | Path, preset: str | None = None) -> RunConfig:
    """Resolve a preset plus override files into one configuration."""
    values: dict[tuple[str, str], object] = {}
    origins = []
    if preset is not None:
        name = preset.replace("-", "_")
        ref = resources.files("deitsim.presets").joinpath(f"{name}.cfg")
        if not ref.is_file():
            raise ConfigError(f"unknown preset {preset!r}")
        values.update(_parse_file(ref.read_text(), f"preset:{preset}"))
        origins.append(f"preset:{preset}")
    for src in sources:
        path = Path(src)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(_parse_file(path.read_text(), str(path)))
        origins.append(str(path))
    if not values:
        raise ConfigError("no configuration given (need a preset or a config file)")
    return RunConfig(values, origin="+".join(origins))
