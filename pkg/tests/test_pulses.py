"""Pulse-propagation tests: envelope identities, windows, the phase bound."""

import cmath
import math
import warnings

import numpy as np
import pytest
import scipy.constants as sc

from deitsim.analytic import MediumParams, eta, kerr_chi
from deitsim.constants import RB87
from deitsim.errors import PhysicsError
from deitsim.pulses import (
    MAX_PHASE_COEFFICIENT,
    PulseSpec,
    doppler_window,
    e_max,
    gaussian_field,
    group_velocity,
    max_phase_shift,
    min_pulse_duration,
    transparency_window,
)

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6
LAMBDA = RB87.wavelength


def reference_pulse(waist=5.0 * LAMBDA, duration=1e-6, photons=1.0):
    return PulseSpec(waist, duration, LAMBDA, photons)


def test_e_max_scalings():
    base = e_max(reference_pulse())
    assert e_max(reference_pulse(duration=2e-6)) ** 2 == pytest.approx(base ** 2 / 2.0)
    assert e_max(reference_pulse(waist=10.0 * LAMBDA)) ** 2 == pytest.approx(base ** 2 / 4.0)
    assert e_max(reference_pulse(photons=100.0)) == pytest.approx(10.0 * base)


def test_e_max_photon_energy_bookkeeping():
    """eps0 c E^2 T (pi w0^2) recovers hbar omega up to the sqrt(2 pi^3)
    geometry factor of the normalization."""
    pulse = reference_pulse()
    lhs = (
        sc.epsilon_0
        * sc.c
        * e_max(pulse) ** 2
        * pulse.duration
        * math.pi
        * pulse.waist ** 2
    )
    assert lhs / (sc.hbar * pulse.omega) == pytest.approx(
        math.pi / math.sqrt(2.0 * math.pi ** 3), rel=1e-12
    )


def test_gaussian_field_at_origin_is_peak():
    pulse = reference_pulse()
    value = gaussian_field(pulse, 1e-16, 0.0, 0.0, 0.0, 0.0)
    assert value == pytest.approx(e_max(pulse), rel=1e-12)


def test_gaussian_field_duration_constant_without_window_absorption():
    pulse = reference_pulse()
    # with tau = 0 the temporal width never changes with z
    z = 3.0 * pulse.rayleigh_length
    t_half = pulse.duration
    on_peak = abs(gaussian_field(pulse, 0.0, 0.0, 0.0, z, z / sc.c))
    delayed = abs(gaussian_field(pulse, 0.0, 0.0, 0.0, z, z / sc.c + t_half))
    assert delayed / on_peak == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_gaussian_field_reduction_factor_oracle():
    pulse = reference_pulse()
    tau = 2.5e-16
    z = pulse.rayleigh_length
    k = pulse.wavenumber
    theta = pulse.waist ** 2 + 1j * z / k
    xi = cmath.sqrt(pulse.duration ** 2 + 4.0 * k * z * tau)
    expected = e_max(pulse) * abs(pulse.waist ** 2 / theta) * abs(pulse.duration / xi)
    got = abs(gaussian_field(pulse, tau, 0.0, 0.0, z, z / sc.c))
    assert got == pytest.approx(expected, rel=1e-12)


def test_gaussian_field_factorized_envelope_identity():
    """|E| |Theta| |Xi| = E_max w0^2 T on axis at the pulse center."""
    pulse = reference_pulse()
    tau = 1e-16
    k = pulse.wavenumber
    for z in (0.0, 0.3 * pulse.rayleigh_length, 2.0 * pulse.rayleigh_length):
        theta = pulse.waist ** 2 + 1j * z / k
        xi = cmath.sqrt(pulse.duration ** 2 + 4.0 * k * z * tau)
        value = abs(gaussian_field(pulse, tau, 0.0, 0.0, z, z / sc.c)) * abs(theta) * abs(xi)
        assert value == pytest.approx(e_max(pulse) * pulse.waist ** 2 * pulse.duration, rel=1e-12)


def test_gaussian_field_domain_error():
    pulse = reference_pulse(duration=1e-9)
    with pytest.raises(PhysicsError):
        gaussian_field(pulse, 1e-3, 0.0, 0.0, -1.0, 0.0)


def test_group_velocity_limits_and_monotonicity():
    omega = RB87.angular_frequency
    assert group_velocity(0.0, omega) == sc.c
    etas = np.logspace(-12, -8, 7)
    values = [group_velocity(x, omega) for x in etas]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_group_velocity_matching_after_full_swap():
    """p1 |d41|^2 = p2 |d42|^2 holds exactly for the swap populations."""
    from deitsim.scheme import scheme_dipoles

    d = scheme_dipoles(150.0)
    w41, w42 = d["41"] ** 2, d["42"] ** 2
    p1, p2 = w42 / (w41 + w42), w41 / (w41 + w42)  # swapped branching
    med = lambda p, dd: MediumParams(  # noqa: E731
        1e20, p, 1.0 - p, abs(d["41"]), abs(d["42"]), abs(d["53"]), 4.06 * MHZ, 5.73 * MHZ, -1.0
    )
    omega = RB87.angular_frequency
    v1 = group_velocity(eta(1, med(p1, d)), omega)
    v2 = group_velocity(eta(2, med(p1, d)), omega)
    assert abs(v1 - v2) / v1 < 1e-6


def test_transparency_window_branches():
    gamma = 5.73 * MHZ
    weak = 0.2 * gamma
    assert transparency_window(weak, gamma) == pytest.approx(weak ** 2 / gamma)
    strong = 3.0 * gamma
    assert transparency_window(strong, gamma) == pytest.approx(strong)
    assert transparency_window(gamma, gamma) == pytest.approx(gamma)


def test_mismatch_clears_transparency_window():
    from deitsim.scheme import fields_from_structure
    from deitsim.structure import magnetic_mismatch

    f = fields_from_structure(150.0, 0.68 * MHZ, -0.55 * MHZ, 4.06 * MHZ)
    window = transparency_window(abs(f.rabi_pump_aux), 5.73 * MHZ)
    assert abs(magnetic_mismatch(150.0)) > 3.0 * window


def test_doppler_window():
    rabi = 4.06 * MHZ
    assert doppler_window(rabi, TWO_PI * 500e6) == pytest.approx(
        rabi ** 2 / (TWO_PI * 500e6)
    )
    assert doppler_window(rabi, 1e30) < 1e-10
    assert doppler_window(2.0 * rabi, TWO_PI * 500e6) == pytest.approx(
        4.0 * doppler_window(rabi, TWO_PI * 500e6)
    )


def test_min_pulse_duration():
    k = RB87.wavenumber
    z_r = k * (5.0 * LAMBDA) ** 2
    t0, length = min_pulse_duration(1e-16, k, z_r)
    assert length == 2.0 * z_r
    assert min_pulse_duration(0.0, k, z_r)[0] == 0.0
    assert min_pulse_duration(1e-16, k, 4.0 * z_r)[0] == pytest.approx(2.0 * t0)
    # at z = z_R the width factor is exactly sqrt(2) for the minimum duration
    tau = 2.2e-16
    t_min, _ = min_pulse_duration(tau, k, z_r)
    xi_over_t = math.sqrt(1.0 + 4.0 * k * z_r * tau / t_min ** 2)
    assert xi_over_t == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_max_phase_coefficient_exact():
    assert MAX_PHASE_COEFFICIENT == pytest.approx(3.0 * math.sqrt(6.0) / (4.0 * math.pi), abs=1e-15)
    assert MAX_PHASE_COEFFICIENT == pytest.approx(0.5848, abs=1e-4)


def test_max_phase_headline_estimate():
    gamma = 5.73 * MHZ
    detuning = gamma / 0.17
    k = TWO_PI / LAMBDA
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        phi = max_phase_shift(LAMBDA, LAMBDA, gamma, detuning, k ** 3)
    assert abs(phi) == pytest.approx(0.0994, abs=0.0006)


def test_max_phase_validity_warnings():
    gamma = 5.73 * MHZ
    with pytest.warns(UserWarning):
        max_phase_shift(LAMBDA, 0.5 * LAMBDA, gamma, 100.0 * gamma, 1e18)
    with pytest.warns(UserWarning):
        max_phase_shift(LAMBDA, 5.0 * LAMBDA, gamma, 1.2 * gamma, 1e18)


def test_max_phase_scale_invariance():
    gamma, detuning = 5.73 * MHZ, -TWO_PI * 134.58e6
    base = max_phase_shift(LAMBDA, 5.0 * LAMBDA, gamma, detuning, 1e20)
    for s in (0.5, 2.0, 7.0):
        scaled = max_phase_shift(s * LAMBDA, 5.0 * s * LAMBDA, gamma, detuning, 1e20 / s ** 3)
        assert scaled == pytest.approx(base, rel=1e-12)


def test_max_phase_pipeline_identity():
    """Assembling E_max, T_min, L = 2 z_R and the Kerr coefficient
    reproduces the closed form, with the linewidth dipole and unit initial
    population."""
    gamma = 5.73 * MHZ
    detuning = -TWO_PI * 134.58e6
    density = 1e20
    waist = 5.0 * LAMBDA
    k = RB87.wavenumber
    omega = RB87.angular_frequency
    d_linewidth = math.sqrt(
        3.0 * math.pi * sc.epsilon_0 * sc.hbar * sc.c ** 3 * gamma / omega ** 3
    )
    med = MediumParams(
        density, 1.0, 0.0, d_linewidth, d_linewidth, d_linewidth, 4.06 * MHZ, gamma, detuning
    )
    eta1 = eta(1, med)
    tau = eta1 * gamma / (2.0 * abs(med.rabi_pump) ** 2)
    t_min, length = min_pulse_duration(tau, k, k * waist ** 2)
    pulse = PulseSpec(waist, t_min, LAMBDA)
    chi = kerr_chi(d_linewidth, detuning)
    # phase = (omega/c) L (n - 1) with n - 1 = -eta1 chi I
    pipeline = -length * (omega / sc.c) * eta1 * chi * sc.c * sc.epsilon_0 * e_max(pulse) ** 2
    closed = max_phase_shift(LAMBDA, waist, gamma, detuning, density)
    assert pipeline == pytest.approx(closed, rel=1e-10)


def test_pulse_spec_validation():
    with pytest.raises(PhysicsError):
        PulseSpec(-1.0, 1e-6, LAMBDA)
    with pytest.raises(PhysicsError):
        max_phase_shift(LAMBDA, 5.0 * LAMBDA, 1.0, 0.0, 1e20)
