"""Lindblad master-equation tier: full density-matrix evolution.

The generator is

    d rho/dt = -i [H, rho] + sum_k ( L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho} )

with one jump operator sqrt(rate) |to><from| per decay channel and
sqrt(2 rate) |s><s| per dephasing channel, plus an optional transit
channel that relaxes rho toward a target mixture at a uniform rate.
Channels with ``to = None`` remove population from the modeled space
(amplitude damping without refill); the closed sixteen-level tier never
uses them, so its trace is conserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.constants as sc
from scipy.integrate import solve_ivp

from .errors import ConfigError, ConvergenceError, IntegrationError, PhysicsError
from .scheme import SchemeHamiltonian
from .structure import branching_ratios

E_CHARGE = sc.e
A_BOHR = sc.physical_constants["Bohr radius"][0]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive state of an n-level atom."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PhysicsError("density matrix must be square")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, dimension: int, state: int) -> "DensityMatrix":
        m = np.zeros((dimension, dimension), dtype=complex)
        m[state, state] = 1.0
        return cls(m)

    @classmethod
    def mixed(cls, populations: dict[int, float], dimension: int) -> "DensityMatrix":
        m = np.zeros((dimension, dimension), dtype=complex)
        for idx, p in populations.items():
            m[idx, idx] = p
        return cls(m)

    @classmethod
    def maximally_mixed(cls, dimension: int) -> "DensityMatrix":
        return cls(np.eye(dimension, dtype=complex) / dimension)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries))

    def invariant_breach(self) -> dict[str, float]:
        """Hermiticity, trace and positivity defects (all >= 0)."""
        m = self.entries
        herm = float(np.max(np.abs(m - m.conj().T)))
        trace = float(abs(np.trace(m).real - 1.0) + abs(np.trace(m).imag))
        eigmin = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        return {"hermiticity": herm, "trace": trace, "negativity": max(0.0, -eigmin)}

    def validate(self, herm_tol=1e-12, trace_tol=1e-9, pos_tol=1e-9):
        b = self.invariant_breach()
        if b["hermiticity"] > herm_tol:
            raise PhysicsError(f"density matrix not Hermitian: defect {b['hermiticity']:.2e}")
        if b["trace"] > trace_tol:
            raise PhysicsError(f"density matrix trace defect {b['trace']:.2e}")
        if b["negativity"] > pos_tol:
            raise PhysicsError(f"density matrix negativity {b['negativity']:.2e}")


@dataclass
class Trajectory:
    """Time series of density-matrix snapshots plus named observables."""

    times: np.ndarray
    states: list[DensityMatrix]
    observables: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0.0):
            raise PhysicsError("trajectory times must be strictly increasing")


@dataclass(frozen=True)
class PrepConfig:
    """Optical-pumping and Raman-swap settings for the initial mixture."""

    raman_efficiency: float = 1.0
    target_roles: tuple[str, str] = ("1", "2")
    residual_tol: float = 5e-3
    max_cycles: int = 200

    def __post_init__(self):
        if not 0.0 <= self.raman_efficiency <= 1.0:
            raise ConfigError("raman_efficiency must lie in [0, 1]")


class LindbladOperator:
    """Precomputed right-hand side of the master equation for one scheme.

    Folds the anticommutator of every channel into an effective
    non-Hermitian Hamiltonian; jump refill only feeds diagonals because
    each channel is a single |to><from| operator.
    """

    def __init__(self, scheme: SchemeHamiltonian):
        n = scheme.dimension
        h_eff = np.array(scheme.matrix, dtype=complex)
        refill_src: list[tuple[int, int, float]] = []
        for src, dst, rate in scheme.decay_channels:
            if src >= n or (dst is not None and dst >= n):
                raise PhysicsError("decay channel index out of range")
            h_eff[src, src] += -0.5j * rate
            if dst is not None:
                refill_src.append((dst, src, rate))
        for state, rate in scheme.dephasing_channels:
            # L = sqrt(2 rate)|s><s|: anticommutator -rate on row/col s,
            # refill 2 rate on the diagonal.
            h_eff[state, state] += -1.0j * rate
            refill_src.append((state, state, 2.0 * rate))
        self.dimension = n
        self.h_eff = h_eff
        self.refill = refill_src
        self.transit_rate = scheme.transit_rate
        if scheme.transit_rate > 0.0:
            if scheme.transit_target is None:
                raise ConfigError("transit channel requires a target mixture")
            self.transit_target = np.asarray(scheme.transit_target, dtype=complex)
        else:
            self.transit_target = None
        self.trace_preserving = (
            all(dst is not None for _, dst, _ in scheme.decay_channels)
        )

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.h_eff @ rho - rho @ self.h_eff.conj().T)
        for dst, src, rate in self.refill:
            out[dst, dst] += rate * rho[src, src]
        if self.transit_rate > 0.0:
            out += self.transit_rate * (self.transit_target * np.trace(rho) - rho)
        return out


def lindblad_rhs(rho: np.ndarray | DensityMatrix, scheme: SchemeHamiltonian) -> np.ndarray:
    """Time derivative of the density matrix under the scheme's generator."""
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (scheme.dimension, scheme.dimension):
        raise PhysicsError(
            f"density matrix dimension {m.shape} does not match scheme "
            f"dimension {scheme.dimension}"
        )
    return LindbladOperator(scheme).apply(m)


def evolve(
    rho0: DensityMatrix | np.ndarray,
    scheme: SchemeHamiltonian,
    t_end: float,
    tol: float = 1e-8,
    n_snapshots: int = 201,
    t_eval: np.ndarray | None = None,
    check_invariants: bool = True,
) -> Trajectory:
    """Adaptive integration of the master equation.

    Snapshots are checked (never repaired): Hermiticity, positivity and,
    for trace-preserving channel sets, the trace; a breach beyond 10 x tol
    aborts with an :class:`IntegrationError` carrying the magnitude.
    """
    if tol <= 0.0:
        raise ConfigError("tolerance must be positive")
    m0 = rho0.entries if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    DensityMatrix(m0).validate(herm_tol=1e-10, trace_tol=1e-7, pos_tol=1e-7)
    op = LindbladOperator(scheme)
    n = scheme.dimension
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, n_snapshots)

    def rhs(_t, y):
        return op.apply(y.reshape(n, n)).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, float(t_end)),
        m0.ravel().astype(complex),
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol * 1e-3,
    )
    if not sol.success:
        raise IntegrationError(f"integrator failed: {sol.message}")

    states = [DensityMatrix(sol.y[:, k].reshape(n, n)) for k in range(sol.y.shape[1])]
    if check_invariants:
        limit = 10.0 * tol
        for t, state in zip(sol.t, states):
            b = state.invariant_breach()
            worst = max(b["hermiticity"], b["negativity"])
            if op.trace_preserving:
                worst = max(worst, b["trace"])
            if worst > limit:
                raise IntegrationError(
                    f"state invariant breached at t={t:.3e}s: {b}", breach=worst
                )
    populations = np.array([s.populations() for s in states])
    return Trajectory(
        times=sol.t,
        states=states,
        observables={"populations": populations},
    )


def mean_dipole(
    state: DensityMatrix | np.ndarray,
    scheme: SchemeHamiltonian,
    which_field: int | str,
) -> complex:
    """Field-projected mean dipole sum_(g,e) d_ge rho_eg (C*m)."""
    m = state.entries if isinstance(state, DensityMatrix) else np.asarray(state)
    trans = scheme.laser_transitions.get(str(which_field))
    if not trans:
        raise PhysicsError(f"scheme lacks dipole data for field {which_field}")
    return complex(sum(d * m[e, g] for g, e, d in trans))


def cross_dipole_num(
    scheme_on: SchemeHamiltonian,
    scheme_off: SchemeHamiltonian,
    rho0: DensityMatrix,
    t_grid: np.ndarray,
    which_field: int | str,
    tol: float = 1e-8,
) -> np.ndarray:
    """Cross dipole moment time series from two master-equation runs.

    The partner-on and partner-off schemes are evolved from the same
    initial state; the per-field mean dipole moduli are subtracted and
    normalized by e a0.
    """
    moduli = []
    for scheme in (scheme_on, scheme_off):
        traj = evolve(rho0, scheme, t_grid[-1], tol=tol, t_eval=t_grid)
        series = np.array([mean_dipole(s, scheme, which_field) for s in traj.states])
        moduli.append(np.abs(series))
    return (moduli[0] - moduli[1]) / (E_CHARGE * A_BOHR)


def prepare_mixture(
    prep: PrepConfig,
    b_gauss: float,
    level_map: dict[str, tuple[str, int, int]] | None = None,
    repump_set: list[tuple[int, int]] | None = None,
) -> DensityMatrix:
    """Pump/repump cascade followed by a partial Raman population swap.

    Population starts uniform over the eight ground Zeeman states.  Each
    cycle moves everything in ``repump_set`` (default: all ground states
    except the two targets) to the pumped excited state, which
    redistributes it by the branching ratios of the atomic structure.
    Ground states outside both the repump set and the targets trap
    population and raise.  The final swap exchanges the two target
    populations with efficiency ``raman_efficiency``.

    The returned 16-level density matrix uses the full-D1 state ordering:
    ground states sorted by (F, mF), then excited states.
    """
    from .constants import GROUND
    from .scheme import DEFAULT_LEVEL_MAP
    from .structure import get_level, zeeman_spectrum

    level_map = level_map or DEFAULT_LEVEL_MAP
    ground = sorted(zeeman_spectrum(GROUND, b_gauss), key=lambda lv: (lv.f_label, lv.m_f))
    keys = [(lv.f_label, lv.m_f) for lv in ground]
    targets = [level_map[r][1:] for r in prep.target_roles]
    for t in targets:
        if t not in keys:
            raise ConfigError(f"target state {t} not a ground state")

    from .constants import EXCITED

    excited = zeeman_spectrum(EXCITED, b_gauss)
    pump_manifold, pump_f, pump_mf = level_map["4"]
    if pump_manifold != EXCITED:
        raise ConfigError("pumped role 4 must be an excited state")
    branch = branching_ratios(get_level(excited, pump_f, pump_mf), b_gauss)

    repump = repump_set if repump_set is not None else [k for k in keys if k not in targets]
    pops = {k: 1.0 / len(keys) for k in keys}
    # Initial pump: every atom goes through the excited state once, so the
    # targets start at the branching fractions; afterwards only the repump
    # set is recycled.
    for cycle in range(prep.max_cycles):
        residual = sum(p for k, p in pops.items() if k not in targets)
        if cycle > 0 and residual < prep.residual_tol:
            break
        recyclable = sum(
            p for k, p in pops.items() if (cycle == 0 or k in repump) and k not in targets
        )
        if cycle > 0 and residual >= prep.residual_tol and recyclable < 1e-3 * prep.residual_tol:
            trapped = max(
                (k for k in pops if k not in targets and k not in repump),
                key=lambda k: pops[k],
            )
            raise ConvergenceError(
                f"optical pumping stalled: population trapped in ground state "
                f"F={trapped[0]}, mF={trapped[1]:+d}"
            )
        moved = 0.0
        for k in list(pops):
            if (cycle == 0 or k in repump) and pops[k] > 0.0:
                moved += pops.pop(k)
        for dst, frac in branch.items():
            pops[dst] = pops.get(dst, 0.0) + moved * frac
    else:
        raise ConvergenceError("optical pumping did not converge")

    p1 = pops.get(targets[0], 0.0)
    p2 = pops.get(targets[1], 0.0)
    norm = p1 + p2
    p1, p2 = p1 / norm, p2 / norm
    eps = prep.raman_efficiency
    p1, p2 = (1.0 - eps) * p1 + eps * p2, (1.0 - eps) * p2 + eps * p1

    populations = {keys.index(targets[0]): p1, keys.index(targets[1]): p2}
    return DensityMatrix.mixed(populations, 16)


def add_motion_channels(
    scheme: SchemeHamiltonian,
    dephasing_rate: float,
    transit_rate: float,
    transit_target: np.ndarray | None = None,
) -> SchemeHamiltonian:
    """Scheme with ground-state dephasing and transit relaxation appended.

    Dephasing adds one sqrt(2 rate)|s><s| generator per ground state; the
    transit channel relaxes toward ``transit_target`` (diagonal matrix of
    populations) at the given uniform rate.
    """
    if dephasing_rate < 0.0 or transit_rate < 0.0:
        raise ConfigError("motion rates must be nonnegative")
    if dephasing_rate == 0.0 and transit_rate == 0.0:
        return scheme
    dephasing = list(scheme.dephasing_channels)
    if dephasing_rate > 0.0:
        dephasing += [(i, dephasing_rate) for i in scheme.ground_states()]
    target = scheme.transit_target
    rate = scheme.transit_rate
    if transit_rate > 0.0:
        if transit_target is None:
            raise ConfigError("transit channel requires a target mixture")
        target = np.asarray(transit_target, dtype=complex)
        if abs(np.trace(target) - 1.0) > 1e-9:
            raise ConfigError("transit target must have unit trace")
        rate = transit_rate
    return SchemeHamiltonian(
        dimension=scheme.dimension,
        matrix=scheme.matrix,
        decay_channels=list(scheme.decay_channels),
        dephasing_channels=dephasing,
        frame_note=scheme.frame_note,
        laser_transitions=scheme.laser_transitions,
        labels=list(scheme.labels),
        perturbation_mask=scheme.perturbation_mask,
        transit_rate=rate,
        transit_target=target,
    )
