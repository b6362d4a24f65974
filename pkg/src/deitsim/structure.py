"""Hyperfine/Zeeman structure and dipole matrix elements of the Rb-87 D1 line.

Each manifold (5S1/2, 5P1/2) is an 8-state space spanned by the uncoupled
product basis |m_I, m_J> with I = 3/2, J = 1/2.  The Hamiltonian

    H/hbar = A I.J + mu_B B (g_J m_J + g_I m_I) / hbar

commutes with F_z, so it block-diagonalizes by m_F = m_I + m_J into blocks
of dimension 1 (m_F = +-2) or 2.  Within a 2-dim block the two branches
never cross at finite field (the hyperfine ladder coupling is nonzero), so
states are labeled by adiabatic continuation from B = 0: the lower branch
keeps the F = 1 label, the upper branch F = 2.

Dipole amplitudes are assembled in the uncoupled basis with Condon-Shortley
Clebsch-Gordan coefficients; the electron dipole does not touch the nucleus,
so an element is a sum over m_I of eigenvector products weighted by
<J m_J; 1 q | J' m_J'>.  With this normalization the squared amplitudes
from any excited Zeeman state sum exactly to the squared reduced dipole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import EXCITED, GROUND, MANIFOLDS, RB87, SpectroscopicConstants
from .errors import ConfigError, LevelCrossingError

I_NUC = 1.5
J_EL = 0.5

# Uncoupled basis ordering, shared by eigenvector compositions.
BASIS: tuple[tuple[float, float], ...] = tuple(
    (m_i, m_j) for m_i in (-1.5, -0.5, 0.5, 1.5) for m_j in (-0.5, 0.5)
)

# <J m_J; 1 q | J' m_J'> for J = J' = 1/2 (Condon-Shortley), keyed by
# (m_J lower, q, m_J upper).  Exact values; only four are nonzero.
_CG_HALF: dict[tuple[float, int, float], float] = {
    (-0.5, +1, +0.5): -math.sqrt(2.0 / 3.0),
    (+0.5, -1, -0.5): +math.sqrt(2.0 / 3.0),
    (-0.5, 0, -0.5): -math.sqrt(1.0 / 3.0),
    (+0.5, 0, +0.5): +math.sqrt(1.0 / 3.0),
}


@dataclass(frozen=True, eq=False)
class ZeemanLevel:
    """One eigenstate of the hyperfine + Zeeman Hamiltonian.

    ``energy`` is angular frequency (rad/s) relative to the manifold
    centroid; ``composition`` holds real coefficients in :data:`BASIS`
    order and is a unit vector.  ``f_label`` is the adiabatic F label
    (exact quantum number only at B = 0).
    """

    manifold: str
    f_label: int
    m_f: int
    energy: float
    composition: np.ndarray = field(repr=False)
    b_gauss: float = 0.0

    def __str__(self):
        return f"{self.manifold} F={self.f_label} mF={self.m_f:+d}"


@dataclass(frozen=True)
class DipoleElement:
    """Signed dipole amplitude <upper| e r_q |lower> in C*m."""

    lower: ZeemanLevel
    upper: ZeemanLevel
    q: int
    amplitude: float


def _field_hamiltonian(manifold: str, b_gauss: float, const: SpectroscopicConstants) -> np.ndarray:
    """8x8 real hyperfine+Zeeman matrix (rad/s) in the uncoupled basis."""
    a = const.hyperfine_a[manifold]
    g_j = const.g_j[manifold]
    zeeman = const.mu_b_per_gauss * b_gauss
    dim = len(BASIS)
    h = np.zeros((dim, dim))
    index = {pair: k for k, pair in enumerate(BASIS)}
    for k, (m_i, m_j) in enumerate(BASIS):
        h[k, k] = a * m_i * m_j + zeeman * (g_j * m_j + const.g_i * m_i)
        # (A/2) I+ J- : raises m_I, lowers m_J.
        target = (m_i + 1.0, m_j - 1.0)
        if target in index:
            amp = 0.5 * a * math.sqrt(
                (I_NUC * (I_NUC + 1) - m_i * (m_i + 1)) * (J_EL * (J_EL + 1) - m_j * (m_j - 1))
            )
            h[index[target], k] += amp
            h[k, index[target]] += amp
    return h


def zeeman_spectrum(
    manifold: str, b_gauss: float, constants: SpectroscopicConstants = RB87
) -> list[ZeemanLevel]:
    """All eight Zeeman eigenstates of one manifold, sorted by energy.

    Labels (F, m_F) follow adiabatic continuation from zero field, which
    reduces to branch order inside each m_F block.
    """
    if manifold not in MANIFOLDS:
        raise ConfigError(f"unknown manifold {manifold!r}; expected one of {MANIFOLDS}")
    if b_gauss < 0.0:
        raise ConfigError(f"magnetic field must be >= 0 gauss, got {b_gauss}")
    h = _field_hamiltonian(manifold, b_gauss, constants)
    levels: list[ZeemanLevel] = []
    m_f_values = sorted({int(round(m_i + m_j)) for (m_i, m_j) in BASIS})
    for m_f in m_f_values:
        idx = [k for k, (m_i, m_j) in enumerate(BASIS) if int(round(m_i + m_j)) == m_f]
        block = h[np.ix_(idx, idx)]
        vals, vecs = np.linalg.eigh(block)
        labels = (2,) if len(idx) == 1 else (1, 2)
        for branch, f_label in enumerate(labels):
            comp = np.zeros(len(BASIS))
            vec = vecs[:, branch]
            # Deterministic sign: make the largest component positive.
            if vec[np.argmax(np.abs(vec))] < 0:
                vec = -vec
            comp[idx] = vec
            levels.append(
                ZeemanLevel(
                    manifold=manifold,
                    f_label=f_label,
                    m_f=m_f,
                    energy=float(vals[branch]),
                    composition=comp,
                    b_gauss=b_gauss,
                )
            )
    levels.sort(key=lambda lv: lv.energy)
    return levels


def get_level(levels: list[ZeemanLevel], f_label: int, m_f: int) -> ZeemanLevel:
    """Pick the level with the given adiabatic (F, m_F) label."""
    for lv in levels:
        if lv.f_label == f_label and lv.m_f == m_f:
            return lv
    raise ConfigError(f"no level F={f_label}, mF={m_f} in spectrum")


def _check_branch_gap(levels: list[ZeemanLevel], needed: list[ZeemanLevel], tol: float = 2.0 * math.pi):
    """Guard against (theoretically absent) same-m_F branch degeneracies."""
    for lv in needed:
        partners = [
            other
            for other in levels
            if other.m_f == lv.m_f and other.f_label != lv.f_label
        ]
        for other in partners:
            if abs(other.energy - lv.energy) < tol:
                raise LevelCrossingError(
                    f"branches of the mF={lv.m_f} block are degenerate at "
                    f"B={lv.b_gauss} G; assignment ambiguous"
                )


def magnetic_mismatch(
    b_gauss: float,
    level_assignment: dict[str, tuple[int, int]] | None = None,
    constants: SpectroscopicConstants = RB87,
) -> float:
    """Two-photon mismatch (E_32 - E_X3)/hbar of the leakage lambda system.

    ``level_assignment`` maps the roles "2", "3", "X" to ground-state
    (F, m_F) labels; the default is the shipped scheme assignment.  With
    E_ij = E_j - E_i this equals (E_2 + E_X - 2 E_3)/hbar, an angular
    frequency that vanishes at B = 0.
    """
    if level_assignment is None:
        level_assignment = {"2": (2, +2), "3": (2, 0), "X": (2, -2)}
    levels = zeeman_spectrum(GROUND, b_gauss, constants)
    picked = {role: get_level(levels, f, m) for role, (f, m) in level_assignment.items()}
    _check_branch_gap(levels, list(picked.values()))
    return picked["2"].energy + picked["X"].energy - 2.0 * picked["3"].energy


def dipole_element(
    lower: ZeemanLevel,
    upper: ZeemanLevel,
    q: int,
    constants: SpectroscopicConstants = RB87,
) -> DipoleElement:
    """Dipole amplitude <upper| e r_q |lower> between Zeeman eigenstates.

    Forbidden combinations return amplitude 0.  The m_F selection rule
    m_F(upper) - m_F(lower) = q is automatic because every basis term
    conserves m_I and shifts m_J by q.
    """
    if q not in (-1, 0, +1):
        raise ConfigError(f"polarization q must be -1, 0 or +1, got {q}")
    if lower.manifold != GROUND or upper.manifold != EXCITED:
        raise ConfigError("dipole_element expects lower in 5S1/2 and upper in 5P1/2")
    if lower.b_gauss != upper.b_gauss:
        raise ConfigError("levels come from spectra at different magnetic fields")
    if upper.m_f - lower.m_f != q:
        return DipoleElement(lower, upper, q, 0.0)
    amp = 0.0
    for k_g, (m_i_g, m_j_g) in enumerate(BASIS):
        c_g = lower.composition[k_g]
        if c_g == 0.0:
            continue
        m_j_e = m_j_g + q
        cg = _CG_HALF.get((m_j_g, q, m_j_e))
        if cg is None:
            continue
        k_e = BASIS.index((m_i_g, m_j_e))
        amp += upper.composition[k_e] * c_g * cg
    return DipoleElement(lower, upper, q, constants.reduced_dipole * amp)


def branching_ratios(
    excited: ZeemanLevel,
    b_gauss: float | None = None,
    constants: SpectroscopicConstants = RB87,
) -> dict[tuple[int, int], float]:
    """Fractional decay rates from one excited state, keyed by ground (F, m_F).

    Fractions are proportional to |d|^2 and sum to 1; the normalization is
    the squared-reduced-dipole sum rule.
    """
    if excited.manifold != EXCITED:
        raise ConfigError("branching_ratios expects a 5P1/2 state")
    if b_gauss is None:
        b_gauss = excited.b_gauss
    ground = zeeman_spectrum(GROUND, b_gauss, constants)
    weights: dict[tuple[int, int], float] = {}
    for lv in ground:
        w = 0.0
        for q in (-1, 0, +1):
            w += dipole_element(lv, excited, q, constants).amplitude ** 2
        if w > 0.0:
            weights[(lv.f_label, lv.m_f)] = w
    total = sum(weights.values())
    return {key: w / total for key, w in weights.items()}
