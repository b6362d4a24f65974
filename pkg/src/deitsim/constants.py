"""Spectroscopic constants for the Rb-87 D1 line.

The numbers live in a versioned plain-text table shipped with the package
(``data/rb87_d1.txt``) rather than being fetched at runtime.  All quoted
MHz values are ordinary frequencies nu and are multiplied by 2*pi on load,
so every frequency-like attribute of :class:`SpectroscopicConstants` is an
angular frequency in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from types import MappingProxyType
from typing import Mapping

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

GROUND = "5S1/2"
EXCITED = "5P1/2"
MANIFOLDS = (GROUND, EXCITED)


@dataclass(frozen=True)
class SpectroscopicConstants:
    """Atomic constants of one alkali D line, in SI/angular-frequency units.

    ``hyperfine_a`` and ``g_j`` are keyed by manifold name ("5S1/2",
    "5P1/2").  ``mu_b_per_gauss`` is mu_B/hbar expressed per gauss, so
    ``mu_b_per_gauss * B[G]`` is an angular frequency.
    """

    nuclear_spin: float
    hyperfine_a: Mapping[str, float]
    g_j: Mapping[str, float]
    g_i: float
    linewidth: float
    wavelength: float
    reduced_dipole: float
    mu_b_per_gauss: float

    def __post_init__(self):
        for name in MANIFOLDS:
            if name not in self.hyperfine_a or name not in self.g_j:
                raise ConfigError(f"missing constants for manifold {name!r}")
        positive = {
            "nuclear_spin": self.nuclear_spin,
            "linewidth": self.linewidth,
            "wavelength": self.wavelength,
            "reduced_dipole": self.reduced_dipole,
            "mu_b_per_gauss": self.mu_b_per_gauss,
        }
        positive.update({f"A({m})": a for m, a in self.hyperfine_a.items()})
        for key, value in positive.items():
            if not value > 0.0:
                raise ConfigError(f"constant {key} must be positive, got {value}")
        # D1 linewidth sanity: gamma/2pi between 5.7 and 5.76 MHz.
        nu = self.linewidth / TWO_PI / 1e6
        if not 5.70 <= nu <= 5.76:
            raise ConfigError(f"D1 linewidth {nu:.4f} MHz outside expected range")

    @property
    def wavenumber(self) -> float:
        """Vacuum wavenumber k = 2*pi/lambda in 1/m."""
        return TWO_PI / self.wavelength

    @property
    def angular_frequency(self) -> float:
        """Optical angular frequency omega = ck in rad/s."""
        import scipy.constants as sc

        return sc.c * self.wavenumber


def _parse_table(text: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"constants table line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        try:
            values[key.strip()] = float(value.strip())
        except ValueError as exc:
            raise ConfigError(f"constants table line {lineno}: bad number {value!r}") from exc
    return values


def load_constants(text: str | None = None) -> SpectroscopicConstants:
    """Build :class:`SpectroscopicConstants` from the shipped (or given) table."""
    if text is None:
        text = resources.files("deitsim.data").joinpath("rb87_d1.txt").read_text()
    raw = _parse_table(text)
    try:
        mhz = lambda key: TWO_PI * 1e6 * raw[key]  # noqa: E731
        return SpectroscopicConstants(
            nuclear_spin=raw["nuclear_spin"],
            hyperfine_a=MappingProxyType(
                {GROUND: mhz("hyperfine_a_5s12_MHz"), EXCITED: mhz("hyperfine_a_5p12_MHz")}
            ),
            g_j=MappingProxyType({GROUND: raw["g_j_5s12"], EXCITED: raw["g_j_5p12"]}),
            g_i=raw["g_i"],
            linewidth=mhz("natural_linewidth_MHz"),
            wavelength=raw["d1_wavelength_nm"] * 1e-9,
            reduced_dipole=raw["reduced_dipole_Cm"],
            mu_b_per_gauss=mhz("bohr_magneton_MHz_per_G"),
        )
    except KeyError as exc:
        raise ConfigError(f"constants table is missing key {exc.args[0]!r}") from exc


RB87 = load_constants()
