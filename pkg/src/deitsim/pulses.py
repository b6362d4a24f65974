"""Gaussian pulse propagation in the slow-light medium (closed forms).

A single-photon-normalized Gaussian pulse of duration T and 1/e-intensity
waist w0 propagates paraxially with envelope

    E = E_max (w0^2/Theta)(T/Xi) exp{ -(x^2+y^2)/(2 Theta) - (z/v_gr - t)^2/Xi^2 }

where Theta = w0^2 + i z/k and Xi = sqrt(T^2 + 4 k z tau); tau is the
linearized absorption coefficient of the transparency window.  The
maximum cross-phase shift for two such pulses over L = 2 z_R with the
minimum duration T = 2 sqrt(tau k z_R) reduces to the closed form

    phi_max = -(3 sqrt(6) / 4 pi) (lambda/w0) (gamma/Delta) sqrt(rho k^-3).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import scipy.constants as sc

from .errors import PhysicsError

MAX_PHASE_COEFFICIENT = 3.0 * math.sqrt(6.0) / (4.0 * math.pi)


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian pulse geometry: waist (m), duration (s), wavelength (m)."""

    waist: float
    duration: float
    wavelength: float
    photon_number: float = 1.0

    def __post_init__(self):
        for name in ("waist", "duration", "wavelength", "photon_number"):
            if getattr(self, name) <= 0.0:
                raise PhysicsError(f"pulse {name} must be positive")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def omega(self) -> float:
        return sc.c * self.wavenumber

    @property
    def rayleigh_length(self) -> float:
        return self.wavenumber * self.waist ** 2


def e_max(pulse: PulseSpec) -> float:
    """Peak field amplitude of the photon-number-normalized pulse (V/m)."""
    single = math.sqrt(
        sc.hbar * pulse.omega
        / (math.sqrt(2.0 * math.pi ** 3) * sc.epsilon_0 * sc.c * pulse.duration * pulse.waist ** 2)
    )
    return math.sqrt(pulse.photon_number) * single


def gaussian_field(
    pulse: PulseSpec,
    medium_tau: float,
    x: float,
    y: float,
    z: float,
    t: float,
    group_velocity_: float | None = None,
) -> complex:
    """Complex envelope of the pulse at (x, y, z, t) in V/m."""
    k = pulse.wavenumber
    theta = pulse.waist ** 2 + 1j * z / k
    xi_sq = pulse.duration ** 2 + 4.0 * k * z * medium_tau
    if xi_sq <= 0.0:
        raise PhysicsError("pulse width argument T^2 + 4 k z tau is not positive")
    xi = cmath.sqrt(xi_sq)
    v = sc.c if group_velocity_ is None else group_velocity_
    envelope = cmath.exp(-(x * x + y * y) / (2.0 * theta) - (z / v - t) ** 2 / xi_sq)
    return e_max(pulse) * (pulse.waist ** 2 / theta) * (pulse.duration / xi) * envelope


def group_velocity(eta_i: float, omega: float) -> float:
    """Slow-light group velocity c / (1 + omega eta) from n = 1 + eta delta."""
    if eta_i < 0.0:
        raise PhysicsError("dispersion coefficient must be nonnegative")
    return sc.c / (1.0 + omega * eta_i)


def transparency_window(pump_coupling: float, gamma: float) -> float:
    """Width min(Omega, Omega^2/gamma) of the induced transparency (rad/s)."""
    if pump_coupling < 0.0 or gamma <= 0.0:
        raise PhysicsError("window inputs must be nonnegative (gamma positive)")
    return min(pump_coupling, pump_coupling ** 2 / gamma)


def doppler_window(rabi_pump: float, doppler_detuning: float) -> float:
    """Motion-narrowed transparency window Omega_p^2 / Delta_D (rad/s)."""
    if doppler_detuning <= 0.0:
        raise PhysicsError("Doppler detuning must be positive")
    return abs(rabi_pump) ** 2 / doppler_detuning


def min_pulse_duration(tau: float, k: float, z_r: float) -> tuple[float, float]:
    """Minimum duration 2 sqrt(tau k z_R) and the matched length L = 2 z_R."""
    if tau < 0.0 or k <= 0.0 or z_r <= 0.0:
        raise PhysicsError("duration inputs must be positive (tau nonnegative)")
    return 2.0 * math.sqrt(tau * k * z_r), 2.0 * z_r


def max_phase_shift(
    wavelength: float,
    waist: float,
    gamma: float,
    detuning: float,
    density: float,
) -> float:
    """Maximum single-photon cross-phase shift (radians, signed).

    Warnings flag the validity bounds gamma/|Delta| < 0.5, waist above the
    diffraction limit and density below the dipole-dipole scale
    rho k^-3 < 1; outside them the estimate is only indicative.
    """
    if detuning == 0.0:
        raise PhysicsError("maximum phase shift diverges at zero detuning")
    k = 2.0 * math.pi / wavelength
    rho_k3 = density / k ** 3
    if gamma / abs(detuning) >= 0.5:
        warnings.warn("gamma/|Delta| >= 0.5: outside the dispersive regime", stacklevel=2)
    if wavelength / waist >= 1.0:
        warnings.warn("waist below the diffraction limit lambda/w0 >= 1", stacklevel=2)
    if rho_k3 >= 1.0:
        warnings.warn("density reaches the dipole-dipole regime rho k^-3 >= 1", stacklevel=2)
    return -MAX_PHASE_COEFFICIENT * (wavelength / waist) * (gamma / detuning) * math.sqrt(rho_k3)
