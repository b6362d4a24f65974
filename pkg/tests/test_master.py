"""Master-equation tests: generator properties, oracles, state preparation."""

import math

import numpy as np
import pytest
import scipy.constants as sc
from scipy.linalg import expm

from deitsim.constants import EXCITED, GROUND
from deitsim.errors import ConfigError, ConvergenceError, IntegrationError, PhysicsError
from deitsim.master import (
    DensityMatrix,
    LindbladOperator,
    PrepConfig,
    Trajectory,
    add_motion_channels,
    cross_dipole_num,
    evolve,
    lindblad_rhs,
    mean_dipole,
    prepare_mixture,
)
from deitsim.scheme import DEFAULT_LEVEL_MAP, SchemeHamiltonian
from deitsim.structure import dipole_element, get_level, zeeman_spectrum

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6
GAMMA = 5.73 * MHZ

rng = np.random.default_rng(20240817)


def random_density(n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def two_level_decay(gamma=GAMMA):
    h = np.zeros((2, 2), dtype=complex)
    return SchemeHamiltonian(
        dimension=2, matrix=h, decay_channels=[(1, 0, gamma)], labels=["g", "e"]
    )


def lambda_system(rabi1, rabi_pump, gamma=GAMMA, delta=0.0):
    """States (|1>, |3>, |4>): both grounds coupled to the excited state."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0] = delta
    h[2, 0] = rabi1
    h[0, 2] = np.conj(rabi1)
    h[2, 1] = rabi_pump
    h[1, 2] = np.conj(rabi_pump)
    return SchemeHamiltonian(
        dimension=3,
        matrix=h,
        decay_channels=[(2, 0, gamma / 2.0), (2, 1, gamma / 2.0)],
        labels=["1", "3", "4"],
    )


def vectorized_liouvillian(scheme):
    """Independent superoperator construction (test-side oracle)."""
    n = scheme.dimension
    eye = np.eye(n)
    h = scheme.matrix
    lio = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    ops = [
        math.sqrt(rate) * np.outer(np.eye(n)[dst], np.eye(n)[src])
        for src, dst, rate in scheme.decay_channels
    ]
    ops += [
        math.sqrt(2.0 * rate) * np.diag(np.eye(n)[s])
        for s, rate in scheme.dephasing_channels
    ]
    for op in ops:
        lio += np.kron(op, op.conj())
        lio -= 0.5 * (
            np.kron(op.conj().T @ op, eye) + np.kron(eye, (op.conj().T @ op).T)
        )
    return lio


# --- generator -------------------------------------------------------------


def test_rhs_zero_for_mixed_state_without_channels():
    h = np.diag([1.0, 2.0, 5.0]).astype(complex)
    scheme = SchemeHamiltonian(dimension=3, matrix=h)
    rho = DensityMatrix.maximally_mixed(3)
    assert np.max(np.abs(lindblad_rhs(rho, scheme))) == 0.0


def test_rhs_is_trace_free():
    for n, channels in ((3, [(2, 0, 1.1), (2, 1, 0.4)]), (4, [(3, 1, 0.7)])):
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = h + h.conj().T
        scheme = SchemeHamiltonian(
            dimension=n,
            matrix=h,
            decay_channels=channels,
            dephasing_channels=[(0, 0.3)],
        )
        for _ in range(5):
            deriv = lindblad_rhs(random_density(n), scheme)
            assert abs(np.trace(deriv)) < 1e-12 * np.max(np.abs(deriv))


def test_rhs_dimension_mismatch():
    scheme = two_level_decay()
    with pytest.raises(PhysicsError):
        lindblad_rhs(np.eye(3) / 3.0, scheme)


def test_rhs_matches_vectorized_oracle():
    for n in (2, 3, 4):
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = h + h.conj().T
        channels = [(n - 1, 0, 0.8), (n - 1, n - 2, 0.5)]
        scheme = SchemeHamiltonian(
            dimension=n,
            matrix=h,
            decay_channels=channels,
            dephasing_channels=[(1, 0.2)],
        )
        lio = vectorized_liouvillian(scheme)
        rho = random_density(n)
        direct = lindblad_rhs(rho, scheme)
        assert np.max(np.abs(direct.ravel() - lio @ rho.ravel())) < 1e-12


def test_two_level_spontaneous_decay_closed_form():
    gamma = GAMMA
    scheme = two_level_decay(gamma)
    t_grid = np.linspace(0.0, 3.0 / gamma, 31)
    traj = evolve(DensityMatrix.pure(2, 1), scheme, t_grid[-1], tol=1e-10, t_eval=t_grid)
    excited = traj.observables["populations"][:, 1]
    assert np.max(np.abs(excited - np.exp(-gamma * t_grid))) < 1e-8


# --- evolve ----------------------------------------------------------------


def test_evolve_identity_without_generator():
    scheme = SchemeHamiltonian(dimension=3, matrix=np.zeros((3, 3), dtype=complex))
    rho0 = random_density(3)
    traj = evolve(DensityMatrix(rho0), scheme, 1e-6, tol=1e-10, n_snapshots=7)
    for state in traj.states:
        assert np.max(np.abs(state.entries - rho0)) < 1e-9


def test_dark_state_is_stationary():
    """EIT dark state: excited population stays below 1e-8 over 10/gamma."""
    rabi1, rabi_pump = 0.7 * MHZ, 4.0 * MHZ
    scheme = lambda_system(rabi1, rabi_pump)
    dark = np.array([rabi_pump, -rabi1, 0.0], dtype=complex)
    dark /= np.linalg.norm(dark)
    rho0 = DensityMatrix(np.outer(dark, dark.conj()))
    traj = evolve(rho0, scheme, 10.0 / GAMMA, tol=1e-10, n_snapshots=51)
    excited = traj.observables["populations"][:, 2]
    assert np.max(excited) < 1e-8


def test_evolve_matches_superoperator_exponential():
    """Dense matrix exponential of the vectorized generator (dim <= 4)."""
    for n in (3, 4):
        h = rng.normal(size=(n, n)) * MHZ / 10.0
        h = (h + h.T) + 0j
        scheme = SchemeHamiltonian(
            dimension=n,
            matrix=h,
            decay_channels=[(n - 1, 0, GAMMA / 2), (n - 1, 1, GAMMA / 2)],
        )
        rho0 = random_density(n)
        t_end = 5.0 / GAMMA
        traj = evolve(DensityMatrix(rho0), scheme, t_end, tol=1e-11, n_snapshots=3)
        oracle = expm(vectorizer_t := vectorized_liouvillian(scheme) * t_end) @ rho0.ravel()
        assert np.max(np.abs(traj.states[-1].entries.ravel() - oracle)) < 1e-8


def test_evolve_is_linear_in_the_state():
    scheme = lambda_system(0.5 * MHZ, 3.0 * MHZ)
    rho_a = DensityMatrix.pure(3, 0)
    rho_b = DensityMatrix.pure(3, 1)
    p1, p2 = 0.3, 0.7
    mix = DensityMatrix(p1 * rho_a.entries + p2 * rho_b.entries)
    t_end = 2.0 / GAMMA
    final_mix = evolve(mix, scheme, t_end, tol=1e-10, n_snapshots=2).states[-1].entries
    final_a = evolve(rho_a, scheme, t_end, tol=1e-10, n_snapshots=2).states[-1].entries
    final_b = evolve(rho_b, scheme, t_end, tol=1e-10, n_snapshots=2).states[-1].entries
    assert np.max(np.abs(final_mix - p1 * final_a - p2 * final_b)) < 1e-9


def test_evolve_preserves_state_invariants():
    scheme = lambda_system(0.7 * MHZ, 4.0 * MHZ)
    traj = evolve(DensityMatrix.pure(3, 0), scheme, 2e-6, tol=1e-9, n_snapshots=41)
    for state in traj.states:
        breach = state.invariant_breach()
        assert breach["hermiticity"] < 1e-12
        assert breach["trace"] < 1e-9
        assert breach["negativity"] < 1e-9


def test_evolve_flags_invariant_breach():
    """A corrupted generator (non-Hermitian 'Hamiltonian' with closed
    channels) loses trace and must abort, not silently continue."""
    h = np.zeros((2, 2), dtype=complex)
    h[1, 1] = -0.5j * GAMMA  # decay folded in, but channel list claims closed
    scheme = SchemeHamiltonian(dimension=2, matrix=h, decay_channels=[])
    with pytest.raises(IntegrationError):
        evolve(DensityMatrix.pure(2, 1), scheme, 1.0 / GAMMA, tol=1e-10)


def test_trajectory_requires_increasing_times():
    with pytest.raises(PhysicsError):
        Trajectory(times=np.array([0.0, 0.0]), states=[DensityMatrix.pure(2, 0)] * 2)


def test_cross_dipole_num_vanishes_for_identical_schemes():
    scheme = lambda_system(0.5 * MHZ, 3.0 * MHZ)
    scheme.laser_transitions = {"1": [(0, 2, 1e-29)]}
    rho0 = DensityMatrix.pure(3, 0)
    t_grid = np.linspace(0.0, 1e-6, 21)
    dx = cross_dipole_num(scheme, scheme, rho0, t_grid, 1, tol=1e-9)
    assert np.max(np.abs(dx)) < 1e-14


# --- state preparation ------------------------------------------------------


def branching_populations():
    excited = zeeman_spectrum(EXCITED, 150.0)
    ground = zeeman_spectrum(GROUND, 150.0)
    up = get_level(excited, 2, 1)
    d41 = dipole_element(get_level(ground, 1, 0), up, +1).amplitude
    d42 = dipole_element(get_level(ground, 2, 2), up, -1).amplitude
    total = d41 ** 2 + d42 ** 2
    return d41 ** 2 / total, d42 ** 2 / total


def test_prepare_mixture_no_swap_matches_branching():
    p1_exp, p2_exp = branching_populations()
    mix = prepare_mixture(PrepConfig(raman_efficiency=0.0), 150.0)
    pops = mix.populations()
    ground = sorted(zeeman_spectrum(GROUND, 150.0), key=lambda lv: (lv.f_label, lv.m_f))
    keys = [(lv.f_label, lv.m_f) for lv in ground]
    p1 = pops[keys.index((1, 0))]
    p2 = pops[keys.index((2, 2))]
    assert p1 == pytest.approx(p1_exp, abs=1e-3)
    assert p2 == pytest.approx(p2_exp, abs=1e-3)
    assert mix.dimension == 16
    assert np.max(np.abs(mix.entries - np.diag(np.diag(mix.entries)))) == 0.0


def test_prepare_mixture_full_swap():
    p1_exp, p2_exp = branching_populations()
    mix = prepare_mixture(PrepConfig(raman_efficiency=1.0), 150.0)
    pops = mix.populations()
    ground = sorted(zeeman_spectrum(GROUND, 150.0), key=lambda lv: (lv.f_label, lv.m_f))
    keys = [(lv.f_label, lv.m_f) for lv in ground]
    # ideal swap: p_i becomes the partner's branching fraction
    assert pops[keys.index((1, 0))] == pytest.approx(p2_exp, abs=1e-3)
    assert pops[keys.index((2, 2))] == pytest.approx(p1_exp, abs=1e-3)


def test_prepare_mixture_partial_swap_interpolates():
    p1_0, _ = branching_populations()
    for eps in (0.3, 0.9):
        mix = prepare_mixture(PrepConfig(raman_efficiency=eps), 150.0)
        ground = sorted(zeeman_spectrum(GROUND, 150.0), key=lambda lv: (lv.f_label, lv.m_f))
        keys = [(lv.f_label, lv.m_f) for lv in ground]
        p1 = mix.populations()[keys.index((1, 0))]
        expected = (1.0 - eps) * p1_0 + eps * (1.0 - p1_0)
        assert p1 == pytest.approx(expected, abs=2e-3)


def test_prepare_mixture_detects_trap_state():
    # excluding a ground state from the repump set leaves a trap
    repump = [(2, m) for m in (-2, -1, 0, 1)] + [(1, -1)]  # (1, +1) missing
    with pytest.raises(ConvergenceError, match="trapped"):
        prepare_mixture(PrepConfig(), 150.0, repump_set=repump)


def test_prep_config_validation():
    with pytest.raises(ConfigError):
        PrepConfig(raman_efficiency=1.5)


# --- motion channels --------------------------------------------------------


def test_add_motion_channels_zero_rates_noop():
    scheme = lambda_system(0.5 * MHZ, 3.0 * MHZ)
    assert add_motion_channels(scheme, 0.0, 0.0) is scheme


def test_add_motion_channels_requires_target():
    scheme = lambda_system(0.5 * MHZ, 3.0 * MHZ)
    with pytest.raises(ConfigError):
        add_motion_channels(scheme, 0.0, TWO_PI * 1e3)


def test_dephasing_rate_convention():
    """sqrt(2 rate)|s><s| makes a dephased state's coherences decay at
    ``rate`` against undephased partners."""
    rate = TWO_PI * 50e3
    scheme = SchemeHamiltonian(
        dimension=2,
        matrix=np.zeros((2, 2), dtype=complex),
        dephasing_channels=[(0, rate)],
    )
    rho0 = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
    t_end = 2.0 / rate
    traj = evolve(DensityMatrix(rho0), scheme, t_end, tol=1e-10, n_snapshots=5)
    coherence = np.array([abs(s.entries[0, 1]) for s in traj.states])
    assert coherence[-1] == pytest.approx(0.5 * math.exp(-rate * t_end), rel=1e-6)


def test_strong_dephasing_destroys_transparency():
    """Ground dephasing far above the window turns the dark state lossy:
    transmission over the reference cell drops below 50%."""
    import deitsim.analytic as analytic

    rabi1, rabi_pump = 0.2 * MHZ, 4.06 * MHZ
    d41 = 1.269e-29
    scheme = lambda_system(rabi1, rabi_pump)
    scheme.laser_transitions = {"1": [(0, 2, d41)]}
    rho0 = DensityMatrix.pure(3, 0)
    length, density = 1.6e-3, 1e20
    omega = 2.369e15
    transmissions = []
    for rate in (0.0, TWO_PI * 2e6):
        target = np.zeros((3, 3), dtype=complex)
        target[0, 0] = 1.0
        noisy = add_motion_channels(scheme, rate, 0.0)
        traj = evolve(rho0, noisy, 4e-6, tol=1e-9, n_snapshots=101)
        d_mean = np.mean(
            [mean_dipole(s, noisy, 1) for s in traj.states[-20:]]
        )
        e_amp = -sc.hbar * rabi1 / d41
        n = analytic.index_from_dipole(d_mean, density, e_amp)
        transmissions.append(math.exp(-2.0 * omega / sc.c * length * n.imag))
    assert transmissions[0] > 0.95  # transparent without dephasing
    assert transmissions[1] < 0.50  # EIT collapsed


# --- sixteen- vs seven-level fast structure ---------------------------------


def test_extra_states_produce_fast_ripple(fig2_results):
    """Steady micro-oscillations exist in the sixteen-level tier and not in
    the seven-level one."""
    master_tier = fig2_results["tiers"]["master"]
    pert_tier = fig2_results["tiers"]["perturbative"]
    tail = slice(int(0.9 * len(master_tier["t"])), None)
    ripple_16 = np.std(master_tier["dxpm1"][tail])
    ripple_7 = np.std(pert_tier["dxpm1"][tail][: len(master_tier["dxpm1"][tail])])
    assert ripple_16 > 5.0 * ripple_7
