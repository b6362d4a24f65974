"""Closed-form and weak-field perturbative models of the double-EIT medium.

The closed-form tier gives the refractive indices

    n1 = 1 + eta1 (delta1 - chi I2)
    n2 = 1 + eta2 (delta2 - chi I2) - eta1 chi I1

with eta_i = rho p_i |d_4i|^2 / (2 hbar eps0 |Omega_p|^2) and
chi = |d_53/hbar|^2 / (c eps0 Delta); intensities are I = c eps0 |E|^2 of
the complex envelope.  The perturbative tier integrates the non-Hermitian
seven-level Schrodinger equation with the signal couplings tagged by formal
order, truncating consistently at third order in the signal fields, and
extracts indices from the steady mean dipole moment by linear response,
n_i = 1 + rho <d>_i / (2 eps0 E_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.constants as sc
from scipy.linalg import expm

from .errors import ConvergenceError, ModeError, PhysicsError, SingularityError
from .scheme import SchemeHamiltonian

E_CHARGE = sc.e
A_BOHR = sc.physical_constants["Bohr radius"][0]


@dataclass(frozen=True)
class MediumParams:
    """Inputs of the closed-form tier (SI units, angular frequencies)."""

    density: float
    p1: float
    p2: float
    d41: float
    d42: float
    d53: float
    rabi_pump: complex
    gamma: float
    stark_detuning: float

    def __post_init__(self):
        if self.density <= 0.0:
            raise PhysicsError("atomic density must be positive")
        if self.p1 < 0.0 or self.p2 < 0.0 or self.p1 + self.p2 > 1.0 + 1e-12:
            raise PhysicsError("populations must be nonnegative with p1 + p2 <= 1")


@dataclass(frozen=True)
class RefractiveResult:
    """Indices and nonlinear coefficients of the closed-form tier."""

    n1: complex
    n2: complex
    xpm_coeff: float  # m^2/W, multiplies the partner intensity in both indices
    spm_coeff: float  # m^2/W, multiplies I2 in n2


@dataclass(frozen=True)
class PhaseResult:
    """Cross-phase shift and attenuation over a propagation length."""

    phase: float
    attenuation: float
    attenuation_off: float


def eta(i: int, medium: MediumParams) -> float:
    """Dispersion coefficient eta_i (seconds) of signal field i."""
    if i not in (1, 2):
        raise PhysicsError(f"signal field index must be 1 or 2, got {i}")
    if medium.rabi_pump == 0.0:
        raise SingularityError("eta diverges for a vanishing pump field")
    p = medium.p1 if i == 1 else medium.p2
    d = medium.d41 if i == 1 else medium.d42
    return medium.density * p * d * d / (2.0 * sc.hbar * sc.epsilon_0 * abs(medium.rabi_pump) ** 2)


def ac_stark_shift(rabi_stark: complex, detuning: float) -> float:
    """Level shift hbar |Omega|^2 / Delta in joules (sign follows Delta)."""
    if detuning == 0.0:
        raise SingularityError("AC Stark shift diverges at zero detuning")
    return sc.hbar * abs(rabi_stark) ** 2 / detuning


def kerr_chi(d53: float, detuning: float) -> float:
    """Cross-Kerr coefficient chi = |d53/hbar|^2 / (c eps0 Delta) in m^2/J."""
    if detuning == 0.0:
        raise SingularityError("Kerr coefficient diverges at zero detuning")
    return (d53 / sc.hbar) ** 2 / (sc.c * sc.epsilon_0 * detuning)


def sat_indices(
    medium: MediumParams,
    delta1: float = 0.0,
    delta2: float = 0.0,
    delta_pump: float = 0.0,
    intensity1: float = 0.0,
    intensity2: float = 0.0,
) -> RefractiveResult:
    """Closed-form refractive indices of both signal fields.

    The nonlinear branch assumes a resonant pump; with nonzero intensities
    and delta_pump != 0 a :class:`ModeError` is raised.  With both
    intensities zero the linear branch n_i = 1 + eta_i (delta_i - delta_pump)
    is returned and any pump detuning is allowed.
    """
    eta1 = eta(1, medium)
    eta2 = eta(2, medium)
    if intensity1 == 0.0 and intensity2 == 0.0:
        n1 = 1.0 + eta1 * (delta1 - delta_pump)
        n2 = 1.0 + eta2 * (delta2 - delta_pump)
        chi = kerr_chi(medium.d53, medium.stark_detuning)
        return RefractiveResult(n1, n2, eta1 * chi, eta2 * chi)
    if delta_pump != 0.0:
        raise ModeError("nonlinear closed-form indices require a resonant pump")
    chi = kerr_chi(medium.d53, medium.stark_detuning)
    n1 = 1.0 + eta1 * (delta1 - chi * intensity2)
    n2 = 1.0 + eta2 * (delta2 - chi * intensity2) - eta1 * chi * intensity1
    return RefractiveResult(n1, n2, eta1 * chi, eta2 * chi)


def eit_eta_with_decay(medium: MediumParams, delta1: float) -> tuple[complex, complex]:
    """Decay-corrected dispersion coefficient and its linearization.

    Returns (eta_tilde, eta1 + i tau delta1) with
    eta_tilde = eta1 |Omega_p|^2 / (|Omega_p|^2 - delta1 (delta1 + i gamma/2))
    and tau = eta1 gamma / (2 |Omega_p|^2).
    """
    eta1 = eta(1, medium)
    wp2 = abs(medium.rabi_pump) ** 2
    denom = wp2 - delta1 * (delta1 + 0.5j * medium.gamma)
    if denom == 0.0:
        raise SingularityError("dressed-state pole: |Omega_p|^2 = delta1 (delta1 + i gamma/2)")
    tau = eta1 * medium.gamma / (2.0 * wp2)
    return eta1 * wp2 / denom, eta1 + 1j * tau * delta1


def xpm_phase(n_on: complex, n_off: complex, length: float, omega: float) -> PhaseResult:
    """Cross-phase shift (omega/c) L Re(n_on - n_off) plus attenuations.

    The attenuation fraction is 1 - exp(-2 (omega/c) L Im n) evaluated for
    the partner-field-on and partner-field-off indices.
    """
    if length <= 0.0:
        raise PhysicsError("propagation length must be positive")
    kl = omega / sc.c * length
    att = lambda n: 1.0 - math.exp(-2.0 * kl * n.imag)  # noqa: E731
    return PhaseResult(
        phase=kl * (n_on.real - n_off.real),
        attenuation=att(complex(n_on)),
        attenuation_off=att(complex(n_off)),
    )


# ---------------------------------------------------------------------------
# Weak-field perturbative tier (seven levels, order-tagged integration)
# ---------------------------------------------------------------------------


def _split_order_blocks(scheme: SchemeHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    if scheme.perturbation_mask is None:
        raise PhysicsError("scheme carries no perturbation mask; build it with build_seven_level")
    v = np.where(scheme.perturbation_mask, scheme.matrix, 0.0)
    h0 = scheme.matrix - v
    return h0, v


def _order_generator(scheme: SchemeHamiltonian, order: int) -> np.ndarray:
    """Block lower-triangular generator of the order-tagged system.

    Amplitude block k holds the k-th order (in the signal fields) piece of
    the state vector: d a_k/dt = -i (H0 a_k + V a_{k-1}).
    """
    h0, v = _split_order_blocks(scheme)
    n = scheme.dimension
    gen = np.zeros(((order + 1) * n, (order + 1) * n), dtype=complex)
    for k in range(order + 1):
        gen[k * n : (k + 1) * n, k * n : (k + 1) * n] = -1j * h0
        if k:
            gen[k * n : (k + 1) * n, (k - 1) * n : k * n] = -1j * v
    return gen


def eat_amplitude_series(
    scheme: SchemeHamiltonian,
    initial_state: int,
    t_grid: np.ndarray,
    order: int = 3,
) -> np.ndarray:
    """Order-resolved amplitudes on a uniform time grid.

    Returns an array of shape (len(t_grid), order + 1, dim); summing over
    the order axis gives the truncated amplitudes.  The propagation uses
    the exact matrix exponential of the (time-independent) order-tagged
    generator, stepped across the grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise PhysicsError("t_grid must be a one-dimensional array of times")
    steps = np.diff(t_grid)
    if len(steps) and not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise PhysicsError("t_grid must be uniform for stepped propagation")
    if initial_state not in range(scheme.dimension):
        raise PhysicsError("initial state index out of range")
    n = scheme.dimension
    gen = _order_generator(scheme, order)
    vec = np.zeros((order + 1) * n, dtype=complex)
    vec[initial_state] = 1.0
    out = np.empty((len(t_grid), order + 1, n), dtype=complex)
    if t_grid[0] != 0.0:
        vec = expm(gen * t_grid[0]) @ vec
    out[0] = vec.reshape(order + 1, n)
    if len(steps):
        prop = expm(gen * steps[0])
        for k in range(1, len(t_grid)):
            vec = prop @ vec
            out[k] = vec.reshape(order + 1, n)
    return out


def eat_amplitudes(
    scheme: SchemeHamiltonian,
    initial_state: int,
    t: float,
    order: int = 3,
) -> np.ndarray:
    """Truncated seven-level amplitudes at time t (sum of the order blocks)."""
    series = eat_amplitude_series(scheme, initial_state, np.array([0.0, t]), order)
    return series[-1].sum(axis=0)


def schroedinger_amplitudes(
    scheme: SchemeHamiltonian, initial_state: int, t_grid: np.ndarray
) -> np.ndarray:
    """Untruncated non-Hermitian evolution (oracle for the order expansion)."""
    t_grid = np.asarray(t_grid, dtype=float)
    gen = -1j * scheme.matrix
    vec = np.zeros(scheme.dimension, dtype=complex)
    vec[initial_state] = 1.0
    out = np.empty((len(t_grid), scheme.dimension), dtype=complex)
    if t_grid[0] != 0.0:
        vec = expm(gen * t_grid[0]) @ vec
    out[0] = vec
    steps = np.diff(t_grid)
    if len(steps):
        prop = expm(gen * steps[0])
        for k in range(1, len(t_grid)):
            vec = prop @ vec
            out[k] = vec
    return out


def _mean_dipole_per_field(
    series: np.ndarray,
    transitions: list[tuple[int, int, float]],
    order: int,
) -> np.ndarray:
    """Field-projected mean dipole <d>_i(t), truncated at total signal order.

    Each product a_e^(k) conj(a_g^(k')) carries total order k + k'; terms
    beyond the truncation order are dropped.
    """
    n_t, n_orders, _ = series.shape
    out = np.zeros(n_t, dtype=complex)
    for g, e, d in transitions:
        for k in range(n_orders):
            for kp in range(n_orders - k):
                if k + kp > order:
                    continue
                # rho_eg = a_e conj(a_g): the component co-rotating with the
                # field, so that Im(n) > 0 means absorption.
                out += d * series[:, k, e] * np.conj(series[:, kp, g])
    return out


def eat_cross_dipole(
    scheme_on: SchemeHamiltonian,
    scheme_off: SchemeHamiltonian,
    p1: float,
    p2: float,
    t_grid: np.ndarray,
    which_field: int,
    order: int = 3,
) -> np.ndarray:
    """Dimensionless mean cross dipole moment of one signal field.

    Both schemes are evolved from each initially populated ground state;
    the runs are mixed with weights (p1, p2), the mean dipole is projected
    on the transitions driven by ``which_field``, and the difference of
    moduli between partner-field-on and partner-field-off runs is
    normalized by e a0.
    """
    key = str(which_field)
    moduli = []
    for scheme in (scheme_on, scheme_off):
        trans = scheme.laser_transitions.get(key)
        if not trans:
            raise PhysicsError(f"scheme lacks dipole data for field {which_field}")
        total = np.zeros(len(t_grid), dtype=complex)
        for weight, init in ((p1, 0), (p2, 1)):
            if weight == 0.0:
                continue
            series = eat_amplitude_series(scheme, init, t_grid, order)
            total += weight * _mean_dipole_per_field(series, trans, order)
        moduli.append(np.abs(total))
    return (moduli[0] - moduli[1]) / (E_CHARGE * A_BOHR)


def mean_dipole_series(
    scheme: SchemeHamiltonian,
    p1: float,
    p2: float,
    t_grid: np.ndarray,
    which_field: int,
    order: int = 3,
) -> np.ndarray:
    """Complex field-projected mean dipole of the mixture (C*m)."""
    trans = scheme.laser_transitions[str(which_field)]
    total = np.zeros(len(t_grid), dtype=complex)
    for weight, init in ((p1, 0), (p2, 1)):
        if weight == 0.0:
            continue
        series = eat_amplitude_series(scheme, init, t_grid, order)
        total += weight * _mean_dipole_per_field(series, trans, order)
    return total


def steady_value(
    t_grid: np.ndarray,
    values: np.ndarray,
    fraction: float = 0.2,
    drift_tol: float = 0.01,
    floor: float = 0.0,
) -> float | complex:
    """Average of the final window, with a drift guard.

    The last ``fraction`` of the trace is averaged; the means of its two
    halves must agree to ``drift_tol`` relative or the trace is not steady.
    ``floor`` sets the scale below which a trace counts as settled at zero
    (useful for partner-off runs that relax onto an exact dark state).
    """
    n = len(t_grid)
    start = int(round((1.0 - fraction) * n))
    tail = values[start:]
    half = len(tail) // 2
    if half < 1:
        raise ConvergenceError("steady-state window too short")
    first, second = np.mean(tail[:half]), np.mean(tail[half:])
    scale = max(abs(first), abs(second), floor)
    if scale > 0.0 and abs(second - first) > drift_tol * scale:
        raise ConvergenceError(
            f"trace still drifting over the final window "
            f"({abs(second - first) / scale:.2%} > {drift_tol:.0%})"
        )
    return np.mean(tail)


def index_from_dipole(mean_dipole: complex, density: float, field_amplitude: complex) -> complex:
    """Linear-response refractive index n = 1 + rho <d> / (2 eps0 E)."""
    if field_amplitude == 0.0:
        raise SingularityError("cannot extract an index for a zero field amplitude")
    return 1.0 + density * mean_dipole / (2.0 * sc.epsilon_0 * field_amplitude)
