"""Hamiltonian builders for the three model tiers.

The five-level tier is the idealized coupling topology (two signal fields
and one pump sharing an excited state, plus one far-detuned shift state).
The seven-level tier is the weak-field matrix used by the perturbative
model.  The sixteen-level tier covers the full D1 manifold at finite
magnetic field, with every polarization-allowed laser coupling kept when
its detuning is below the rotating-wave cutoff, and all spontaneous decay
channels weighted by Zeeman-eigenstate dipole elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.constants as sc

from .constants import EXCITED, GROUND, RB87, SpectroscopicConstants
from .errors import ConfigError, LevelCrossingError, PhysicsError
from .structure import ZeemanLevel, dipole_element, get_level, zeeman_spectrum

# Role -> (manifold, F, mF) for the shipped realization of the scheme at
# B = 150 G.  Roles 1..3 and X are ground states, 4..7 excited states.
DEFAULT_LEVEL_MAP: dict[str, tuple[str, int, int]] = {
    "1": (GROUND, 1, 0),
    "2": (GROUND, 2, +2),
    "3": (GROUND, 2, 0),
    "X": (GROUND, 2, -2),
    "4": (EXCITED, 2, +1),
    "5": (EXCITED, 2, -1),
    "6": (EXCITED, 1, +1),
    "7": (EXCITED, 1, -1),
}

# Laser polarizations implied by the level map (Delta m_F of the driven
# role transitions).  Keys: signal fields "1", "2" and the pump "p".
DEFAULT_POLARIZATIONS: dict[str, int] = {"1": +1, "2": -1, "p": +1}

# Dipole elements used by the scheme, as (lower role, upper role) pairs.
_SCHEME_DIPOLES: dict[str, tuple[str, str]] = {
    "41": ("1", "4"),
    "42": ("2", "4"),
    "43": ("3", "4"),
    "53": ("3", "5"),
    "61": ("1", "6"),
    "62": ("2", "6"),
    "63": ("3", "6"),
    "73": ("3", "7"),
    "X5": ("X", "5"),
}

_LASER_OF_DIPOLE = {
    "41": "1", "61": "1",
    "42": "2", "62": "2", "53": "2", "73": "2",
    "43": "p", "63": "p", "X5": "p",
}


@dataclass(frozen=True)
class FieldSet:
    """Rabi couplings and detunings of the three lasers (all rad/s).

    ``rabi1``, ``rabi2``, ``rabi_pump`` drive the role transitions
    1-4, 2-4, 3-4.  The auxiliary couplings are the same three lasers
    acting on the off-resonant transitions: ``rabi1_aux`` (1-6),
    ``rabi2_aux`` (2-6), ``rabi2_stark`` (3-5), ``rabi2_stark_aux``
    (3-7) and ``rabi_pump_aux`` (3-6).  ``stark_detuning`` is the
    signal-2 detuning from the 3-5 transition; ``aux_detuning1/2`` are
    the detunings of signal 1 from 1-6 and signal 2 from 3-7.
    """

    rabi1: complex
    rabi2: complex
    rabi_pump: complex
    delta1: float = 0.0
    delta2: float = 0.0
    delta_pump: float = 0.0
    stark_detuning: float = 0.0
    aux_detuning1: float = 0.0
    aux_detuning2: float = 0.0
    rabi1_aux: complex = 0.0
    rabi2_aux: complex = 0.0
    rabi2_stark: complex = 0.0
    rabi2_stark_aux: complex = 0.0
    rabi_pump_aux: complex = 0.0


@dataclass
class SchemeHamiltonian:
    """A model tier: matrix plus incoherent channels.

    ``matrix`` is dimension x dimension in units of angular frequency
    (H/hbar); for the seven-level tier it is non-Hermitian (decay folded
    into the diagonal), for the Lindblad tiers it is Hermitian and decay
    lives in ``decay_channels`` as (from, to, rate) with ``to = None``
    meaning loss out of the modeled space.  ``dephasing_channels`` holds
    (state, rate) pairs realized as sqrt(2 rate)|s><s| generators.
    ``laser_transitions`` maps a laser name to (lower, upper, dipole)
    triples used to project the mean dipole moment per field.
    """

    dimension: int
    matrix: np.ndarray
    decay_channels: list[tuple[int, int | None, float]] = field(default_factory=list)
    dephasing_channels: list[tuple[int, float]] = field(default_factory=list)
    frame_note: str = ""
    laser_transitions: dict[str, list[tuple[int, int, float]]] = field(default_factory=dict)
    labels: list[str] = field(default_factory=list)
    perturbation_mask: np.ndarray | None = None
    transit_rate: float = 0.0
    transit_target: np.ndarray | None = None

    def __post_init__(self):
        if self.matrix.shape != (self.dimension, self.dimension):
            raise ConfigError("scheme matrix shape does not match dimension")
        for _, _, rate in self.decay_channels:
            if rate < 0.0:
                raise ConfigError("decay rates must be nonnegative")
        for _, rate in self.dephasing_channels:
            if rate < 0.0:
                raise ConfigError("dephasing rates must be nonnegative")

    def ground_states(self) -> list[int]:
        """Indices never appearing as decay sources."""
        sources = {src for src, _, _ in self.decay_channels}
        return [i for i in range(self.dimension) if i not in sources]


def rabi_from_amplitude(field_amplitude: complex, d: DipoleElement | float) -> complex:
    """Rabi coupling Omega = -|d| E / hbar for a field amplitude in V/m."""
    mag = abs(d.amplitude) if hasattr(d, "amplitude") else abs(d)
    return -mag * field_amplitude / sc.hbar


def scheme_levels(
    b_gauss: float,
    level_map: dict[str, tuple[str, int, int]] | None = None,
    constants: SpectroscopicConstants = RB87,
) -> dict[str, ZeemanLevel]:
    """Resolve the role map to Zeeman eigenstates at the given field."""
    if level_map is None:
        level_map = DEFAULT_LEVEL_MAP
    spectra = {
        GROUND: zeeman_spectrum(GROUND, b_gauss, constants),
        EXCITED: zeeman_spectrum(EXCITED, b_gauss, constants),
    }
    return {
        role: get_level(spectra[manifold], f, m)
        for role, (manifold, f, m) in level_map.items()
    }


def scheme_dipoles(
    b_gauss: float,
    level_map: dict[str, tuple[str, int, int]] | None = None,
    polarizations: dict[str, int] | None = None,
    constants: SpectroscopicConstants = RB87,
    zero_field_dipoles: bool = False,
) -> dict[str, float]:
    """Signed dipole elements (C*m) of the nine scheme transitions.

    With ``zero_field_dipoles`` the amplitudes are evaluated in the
    zero-field hyperfine basis (pure Clebsch-Gordan/6-j values) while the
    level energies still come from the finite-field diagonalization; this
    mirrors treatments that keep coupled-basis couplings at moderate field.
    """
    polarizations = polarizations or DEFAULT_POLARIZATIONS
    levels = scheme_levels(0.0 if zero_field_dipoles else b_gauss, level_map, constants)
    out: dict[str, float] = {}
    for name, (lo_role, up_role) in _SCHEME_DIPOLES.items():
        q = polarizations[_LASER_OF_DIPOLE[name]]
        out[name] = dipole_element(levels[lo_role], levels[up_role], q, constants).amplitude
    return out


def fields_from_structure(
    b_gauss: float,
    rabi1: complex,
    rabi2: complex,
    rabi_pump: complex,
    delta1: float = 0.0,
    delta2: float = 0.0,
    delta_pump: float = 0.0,
    level_map: dict[str, tuple[str, int, int]] | None = None,
    polarizations: dict[str, int] | None = None,
    constants: SpectroscopicConstants = RB87,
    zero_field_dipoles: bool = False,
) -> FieldSet:
    """Build a :class:`FieldSet` from primary Rabi couplings and the structure.

    Auxiliary couplings scale by signed dipole-element ratios (same laser,
    same field amplitude); detunings follow from the level energies, e.g.
    the signal-2 frequency is (E4 - E2)/hbar + delta2 and its detuning from
    the 3-5 transition is that frequency minus (E5 - E3)/hbar.
    """
    levels = scheme_levels(b_gauss, level_map, constants)
    d = scheme_dipoles(b_gauss, level_map, polarizations, constants, zero_field_dipoles)
    for name in ("41", "42", "43"):
        if d[name] == 0.0:
            raise PhysicsError(f"role transition {name} is dipole-forbidden")
    e = {role: lv.energy for role, lv in levels.items()}
    omega1 = e["4"] - e["1"] + delta1
    omega2 = e["4"] - e["2"] + delta2
    return FieldSet(
        rabi1=rabi1,
        rabi2=rabi2,
        rabi_pump=rabi_pump,
        delta1=delta1,
        delta2=delta2,
        delta_pump=delta_pump,
        stark_detuning=omega2 - (e["5"] - e["3"]),
        aux_detuning1=omega1 - (e["6"] - e["1"]),
        aux_detuning2=omega2 - (e["7"] - e["3"]),
        rabi1_aux=rabi1 * d["61"] / d["41"],
        rabi2_aux=rabi2 * d["62"] / d["42"],
        rabi2_stark=rabi2 * d["53"] / d["42"],
        rabi2_stark_aux=rabi2 * d["73"] / d["42"],
        rabi_pump_aux=rabi_pump * d["63"] / d["43"],
    )


def build_seven_level(
    fields: FieldSet,
    gamma: float,
    stark_state_decay: bool = True,
    dipoles: dict[str, float] | None = None,
) -> SchemeHamiltonian:
    """Non-Hermitian 7x7 weak-field Hamiltonian (states |1>..|7>).

    Diagonal: (delta1, delta2, delta_pump, -i gamma/2, -Delta - i gamma/2,
    -Delta1 - i gamma/2, -Delta2 - i gamma/2); the shift state's -i gamma/2
    is controlled by ``stark_state_decay`` because only its real part is
    fixed by the frame.  Couplings sit in row 4 (signal/pump to the shared
    excited state), row 5 (3-5), row 6 (1-6, 2-6, 3-6) and row 7 (3-7).
    """
    f = fields
    h = np.zeros((7, 7), dtype=complex)
    h[0, 0] = f.delta1
    h[1, 1] = f.delta2
    h[2, 2] = f.delta_pump
    h[3, 3] = -0.5j * gamma
    h[4, 4] = -f.stark_detuning - (0.5j * gamma if stark_state_decay else 0.0)
    h[5, 5] = -f.aux_detuning1 - 0.5j * gamma
    h[6, 6] = -f.aux_detuning2 - 0.5j * gamma

    couplings = {
        (3, 0): f.rabi1,
        (3, 1): f.rabi2,
        (3, 2): f.rabi_pump,
        (4, 2): f.rabi2_stark,
        (5, 0): f.rabi1_aux,
        (5, 1): f.rabi2_aux,
        (5, 2): f.rabi_pump_aux,
        (6, 2): f.rabi2_stark_aux,
    }
    for (row, col), omega in couplings.items():
        h[row, col] = omega
        h[col, row] = np.conj(omega)

    # Entries first order in a signal-field amplitude (everything but the
    # pump couplings and the diagonal).
    mask = np.zeros((7, 7), dtype=bool)
    for row, col in couplings:
        if (row, col) not in ((3, 2), (5, 2)):
            mask[row, col] = mask[col, row] = True

    transitions: dict[str, list[tuple[int, int, float]]] = {"1": [], "2": [], "p": []}
    if dipoles is not None:
        transitions["1"] = [(0, 3, dipoles["41"]), (0, 5, dipoles["61"])]
        transitions["2"] = [
            (1, 3, dipoles["42"]),
            (2, 4, dipoles["53"]),
            (1, 5, dipoles["62"]),
            (2, 6, dipoles["73"]),
        ]
        transitions["p"] = [(2, 3, dipoles["43"]), (2, 5, dipoles["63"])]

    return SchemeHamiltonian(
        dimension=7,
        matrix=h,
        frame_note=(
            "one rotation per state; signal 1 on 1-4, signal 2 on 2-4, pump on "
            "3-4, each at its stated detuning"
        ),
        laser_transitions=transitions,
        labels=["1", "2", "3", "4", "5", "6", "7"],
        perturbation_mask=mask,
    )


def build_five_level(
    fields: FieldSet,
    gamma: float,
    decay_assignment: dict[str, dict[str, float]] | None = None,
) -> SchemeHamiltonian:
    """Idealized five-level tier: tripod core plus one shift state.

    States (1, 2, 3, 4, 5); the Hermitian matrix carries couplings and
    detunings, decay is explicit channels.  ``decay_assignment`` gives
    branching fractions, e.g. ``{"4": {"1": .3, "2": .3, "3": .4},
    "5": {"3": .2, "elsewhere": .8}}``; fractions of "elsewhere" leave the
    modeled space (channel target ``None``).
    """
    if decay_assignment is None:
        decay_assignment = {
            "4": {"1": 1 / 3, "2": 1 / 3, "3": 1 / 3},
            "5": {"3": 1 / 3, "elsewhere": 2 / 3},
        }
    f = fields
    h = np.zeros((5, 5), dtype=complex)
    h[0, 0] = f.delta1
    h[1, 1] = f.delta2
    h[2, 2] = f.delta_pump
    h[4, 4] = -f.stark_detuning
    for (row, col), omega in {
        (3, 0): f.rabi1,
        (3, 1): f.rabi2,
        (3, 2): f.rabi_pump,
        (4, 2): f.rabi2_stark,
    }.items():
        h[row, col] = omega
        h[col, row] = np.conj(omega)

    index = {"1": 0, "2": 1, "3": 2, "4": 3, "5": 4}
    channels: list[tuple[int, int | None, float]] = []
    for src, fractions in decay_assignment.items():
        total = sum(fractions.values())
        if total > 1.0 + 1e-12 or any(v < 0.0 for v in fractions.values()):
            raise ConfigError(f"branching fractions from state {src} must be in [0, 1]")
        for dst, frac in fractions.items():
            if frac == 0.0:
                continue
            target = None if dst == "elsewhere" else index[dst]
            channels.append((index[src], target, gamma * frac))

    return SchemeHamiltonian(
        dimension=5,
        matrix=h,
        decay_channels=channels,
        frame_note="idealized tier; same rotations as the seven-level frame",
        labels=["1", "2", "3", "4", "5"],
    )


def _assign_frame(
    n_states: int,
    edges: list[tuple[int, int, str, float]],
    laser_freqs: dict[str, float],
) -> np.ndarray:
    """Per-state rotation frequencies making every kept coupling static.

    ``edges`` are (ground, excited, laser, detuning).  BFS over the
    bipartite coupling graph; disconnected components get independent
    (zero-based) gauges.  A conflicting cycle would make the scheme
    time-dependent and raises.
    """
    nu = np.full(n_states, np.nan)
    adjacency: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n_states)}
    for g, e, laser, _ in edges:
        w = laser_freqs[laser]
        adjacency[g].append((e, +w))
        adjacency[e].append((g, -w))
    for root in range(n_states):
        if not math.isnan(nu[root]):
            continue
        nu[root] = 0.0
        queue = [root]
        while queue:
            node = queue.pop()
            for other, shift in adjacency[node]:
                target = nu[node] + shift
                if math.isnan(nu[other]):
                    nu[other] = target
                    queue.append(other)
                elif abs(nu[other] - target) > 1e-3:
                    raise PhysicsError(
                        "inconsistent rotating frame: coupling cycle with "
                        "mismatched laser frequencies"
                    )
    return nu


def build_full_d1(
    b_gauss: float,
    rabi1: complex,
    rabi2: complex,
    rabi_pump: complex,
    delta1: float = 0.0,
    delta2: float = 0.0,
    delta_pump: float = 0.0,
    gamma: float | None = None,
    level_map: dict[str, tuple[str, int, int]] | None = None,
    polarizations: dict[str, int] | None = None,
    constants: SpectroscopicConstants = RB87,
    rwa_cutoff: float = 2.0 * math.pi * 2e9,
    zero_field_dipoles: bool = False,
    spectra: tuple[list[ZeemanLevel], list[ZeemanLevel]] | None = None,
) -> SchemeHamiltonian:
    """Sixteen-state model of the D1 manifold at finite field.

    Every polarization-allowed coupling of each laser with detuning below
    ``rwa_cutoff`` is kept; each excited state decays to all dipole-allowed
    ground states with rates proportional to |d|^2, normalized so its total
    decay rate is ``gamma`` (the space is closed).  Primary Rabi couplings
    are specified on the role transitions; the common field amplitude then
    fixes every other coupling of the same laser through dipole ratios.
    """
    if b_gauss <= 0.0 and level_map is None:
        # labels remain well defined at B=0 via the mF blocks; allow it.
        pass
    level_map = level_map or DEFAULT_LEVEL_MAP
    polarizations = polarizations or DEFAULT_POLARIZATIONS
    gamma = constants.linewidth if gamma is None else gamma

    if spectra is None:
        ground = zeeman_spectrum(GROUND, b_gauss, constants)
        excited = zeeman_spectrum(EXCITED, b_gauss, constants)
    else:
        ground, excited = spectra
    # Deterministic state order: ground by (F, mF), then excited by (F, mF).
    ground = sorted(ground, key=lambda lv: (lv.f_label, lv.m_f))
    excited = sorted(excited, key=lambda lv: (lv.f_label, lv.m_f))
    states = ground + excited
    n_g = len(ground)
    labels = [str(lv) for lv in states]

    def index_of(role: str) -> int:
        manifold, f, m = level_map[role]
        pool = ground if manifold == GROUND else excited
        offset = 0 if manifold == GROUND else n_g
        for k, lv in enumerate(pool):
            if lv.f_label == f and lv.m_f == m:
                return offset + k
        raise ConfigError(f"level map role {role} not found in spectrum")

    roles = {role: index_of(role) for role in level_map}
    energies = np.array([lv.energy for lv in states])

    # Laser frequencies from the role resonances.  Manifold centroids both
    # sit at zero, so the optical carrier drops out of all differences.
    laser_freqs = {
        "1": energies[roles["4"]] - energies[roles["1"]] + delta1,
        "2": energies[roles["4"]] - energies[roles["2"]] + delta2,
        "p": energies[roles["4"]] - energies[roles["3"]] + delta_pump,
    }

    # Dipole elements for the Zeeman eigenstates (couplings may optionally
    # use the zero-field hyperfine-basis values).
    coupling_states = states
    if zero_field_dipoles:
        g0 = sorted(zeeman_spectrum(GROUND, 0.0, constants), key=lambda lv: (lv.f_label, lv.m_f))
        e0 = sorted(zeeman_spectrum(EXCITED, 0.0, constants), key=lambda lv: (lv.f_label, lv.m_f))
        coupling_states = g0 + e0

    dip: dict[tuple[int, int, int], float] = {}
    for gi in range(n_g):
        for ei in range(n_g, len(states)):
            for q in (-1, 0, +1):
                amp = dipole_element(coupling_states[gi], coupling_states[ei], q, constants).amplitude
                if amp != 0.0:
                    dip[(gi, ei, q)] = amp

    # Field amplitudes from the role-transition Rabi definitions, signed so
    # that the role coupling equals the requested Rabi value exactly.
    role_dip = {
        "1": dip.get((roles["1"], roles["4"], polarizations["1"])),
        "2": dip.get((roles["2"], roles["4"], polarizations["2"])),
        "p": dip.get((roles["3"], roles["4"], polarizations["p"])),
    }
    if any(d in (None, 0.0) for d in role_dip.values()):
        raise PhysicsError("a role transition is dipole-forbidden under the level map")
    amplitudes = {
        "1": -sc.hbar * rabi1 / role_dip["1"],
        "2": -sc.hbar * rabi2 / role_dip["2"],
        "p": -sc.hbar * rabi_pump / role_dip["p"],
    }

    # Keep couplings within the RWA cutoff.
    edges: list[tuple[int, int, str, float]] = []
    for (gi, ei, q), amp in dip.items():
        for laser, pol in polarizations.items():
            if pol != q:
                continue
            detuning = laser_freqs[laser] - (energies[ei] - energies[gi])
            if abs(detuning) < rwa_cutoff:
                edges.append((gi, ei, laser, detuning))

    kept: dict[tuple[int, int], tuple[str, float]] = {}
    for gi, ei, laser, detuning in edges:
        prev = kept.get((gi, ei))
        if prev is None or abs(detuning) < abs(prev[1]):
            kept[(gi, ei)] = (laser, detuning)
    edge_list = [(gi, ei, laser, det) for (gi, ei), (laser, det) in sorted(kept.items())]

    nu = _assign_frame(len(states), edge_list, laser_freqs)
    h = np.zeros((len(states), len(states)), dtype=complex)
    for k in range(len(states)):
        h[k, k] = energies[k] - (nu[k] if not math.isnan(nu[k]) else energies[k])
        if math.isnan(nu[k]):
            h[k, k] = 0.0  # uncoupled state: gauge it away entirely

    transitions: dict[str, list[tuple[int, int, float]]] = {"1": [], "2": [], "p": []}
    for gi, ei, laser, _ in edge_list:
        q = polarizations[laser]
        omega = -dip[(gi, ei, q)] * amplitudes[laser] / sc.hbar
        h[ei, gi] += omega
        h[gi, ei] += np.conj(omega)
        transitions[laser].append((gi, ei, dip[(gi, ei, q)]))

    # Gauge: put the shared excited state of the role transitions at
    # delta-consistent zero, i.e. shift the connected component so that
    # state |4> sits at delta-like diagonal, matching the 7-level frame.
    anchor = roles["4"]
    shift = h[anchor, anchor].real
    component = ~np.isnan(nu)
    for k in range(len(states)):
        if component[k]:
            h[k, k] -= shift

    d_red2 = constants.reduced_dipole ** 2
    channels: list[tuple[int, int | None, float]] = []
    for ei in range(n_g, len(states)):
        weights = {
            gi: sum(dip.get((gi, ei, q), 0.0) ** 2 for q in (-1, 0, +1))
            for gi in range(n_g)
        }
        total = sum(weights.values())
        if not math.isclose(total, d_red2, rel_tol=1e-9):
            raise PhysicsError("dipole sum rule violated while building decay channels")
        for gi, w in weights.items():
            if w > 0.0:
                channels.append((ei, gi, gamma * w / total))

    return SchemeHamiltonian(
        dimension=len(states),
        matrix=h,
        decay_channels=channels,
        frame_note=(
            f"per-state rotations from BFS over kept couplings; RWA cutoff "
            f"{rwa_cutoff / (2e6 * math.pi):.0f} MHz; anchor role 4"
        ),
        laser_transitions=transitions,
        labels=labels,
    )


def role_indices(
    scheme: SchemeHamiltonian,
    level_map: dict[str, tuple[str, int, int]] | None = None,
) -> dict[str, int]:
    """Map scheme roles to state indices of a sixteen-level scheme."""
    level_map = level_map or DEFAULT_LEVEL_MAP
    out = {}
    for role, (manifold, f, m) in level_map.items():
        label = f"{manifold} F={f} mF={m:+d}"
        out[role] = scheme.labels.index(label)
    return out
