"""Preset drivers: assemble the model tiers from a configuration and run them.

Each driver returns a dict of result tables; the CLI writes them as CSV
with the fully resolved configuration embedded in comment lines, so a
rerun with the same inputs is byte-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.constants as sc

from . import analytic, master, pulses
from .config import RunConfig
from .constants import RB87, GROUND, EXCITED
from .errors import ConfigError, PhysicsError
from .scheme import (
    DEFAULT_LEVEL_MAP,
    DEFAULT_POLARIZATIONS,
    build_full_d1,
    build_seven_level,
    fields_from_structure,
    role_indices,
    scheme_dipoles,
    scheme_levels,
)
from .structure import get_level, magnetic_mismatch, zeeman_spectrum

E_A0 = sc.e * sc.physical_constants["Bohr radius"][0]


@dataclass
class SchemeContext:
    """Everything the tiers need, resolved once from a configuration."""

    b_gauss: float
    gamma: float
    density: float
    length: float
    p1: float
    p2: float
    level_map: dict
    polarizations: dict
    rabi: dict  # {"1": .., "2": .., "p": ..} primary couplings, rad/s
    deltas: dict
    zero_field_dipoles: bool
    dipoles: dict
    fields_on: object
    stark_state_decay: bool
    truncation_order: int
    rwa_cutoff: float
    t_end: float
    samples: int
    tolerance: float
    turn_on_steps: int
    turn_on_time: float

    @property
    def omega(self) -> float:
        return RB87.angular_frequency

    def field_amplitude(self, which: str) -> complex:
        """Signed envelope amplitude of a signal field (V/m)."""
        d_role = self.dipoles["41"] if which == "1" else self.dipoles["42"]
        return -sc.hbar * self.rabi[which] / d_role

    def intensity(self, which: str) -> float:
        return sc.c * sc.epsilon_0 * abs(self.field_amplitude(which)) ** 2

    def fieldset(self, rabi1: complex, rabi2: complex):
        return fields_from_structure(
            self.b_gauss,
            rabi1,
            rabi2,
            self.rabi["p"],
            self.deltas["1"],
            self.deltas["2"],
            self.deltas["p"],
            level_map=self.level_map,
            polarizations=self.polarizations,
            zero_field_dipoles=self.zero_field_dipoles,
        )

    def seven_level(self, rabi1: complex, rabi2: complex):
        return build_seven_level(
            self.fieldset(rabi1, rabi2),
            self.gamma,
            stark_state_decay=self.stark_state_decay,
            dipoles=self.dipoles,
        )

    def full_d1(self, rabi1: complex, rabi2: complex):
        return build_full_d1(
            self.b_gauss,
            rabi1,
            rabi2,
            self.rabi["p"],
            self.deltas["1"],
            self.deltas["2"],
            self.deltas["p"],
            gamma=self.gamma,
            level_map=self.level_map,
            polarizations=self.polarizations,
            rwa_cutoff=self.rwa_cutoff,
            zero_field_dipoles=self.zero_field_dipoles,
        )

    def medium(self) -> analytic.MediumParams:
        return analytic.MediumParams(
            density=self.density,
            p1=self.p1,
            p2=self.p2,
            d41=abs(self.dipoles["41"]),
            d42=abs(self.dipoles["42"]),
            d53=abs(self.dipoles["53"]),
            rabi_pump=self.rabi["p"],
            gamma=self.gamma,
            stark_detuning=self.fields_on.stark_detuning,
        )


def build_context(cfg: RunConfig) -> SchemeContext:
    b = cfg.require("atom", "magnetic_field")
    level_map = cfg.level_map() or DEFAULT_LEVEL_MAP
    polarizations = cfg.polarizations() if cfg.get("lasers", "polarization_1") else DEFAULT_POLARIZATIONS
    model = cfg.get("run", "dipole_model", "zeeman-mixed")
    if model not in ("zeeman-mixed", "zero-field"):
        raise ConfigError(f"unknown dipole_model {model!r}")
    zero_field = model == "zero-field"
    rabi = {
        "1": cfg.require("lasers", "rabi_1"),
        "2": cfg.require("lasers", "rabi_2"),
        "p": cfg.require("lasers", "rabi_pump"),
    }
    deltas = {
        "1": cfg.get("lasers", "delta_1", 0.0),
        "2": cfg.get("lasers", "delta_2", 0.0),
        "p": cfg.get("lasers", "delta_pump", 0.0),
    }
    dipoles = scheme_dipoles(b, level_map, polarizations, zero_field_dipoles=zero_field)
    p1 = cfg.get("mixture", "p1")
    p2 = cfg.get("mixture", "p2")
    if cfg.get("mixture", "from_preparation", False) or p1 is None:
        prep = master.PrepConfig(raman_efficiency=cfg.get("mixture", "raman_efficiency", 1.0))
        mix = master.prepare_mixture(prep, b, level_map)
        pops = mix.populations()
        ground = sorted(zeeman_spectrum(GROUND, b), key=lambda lv: (lv.f_label, lv.m_f))
        keys = [(lv.f_label, lv.m_f) for lv in ground]
        p1 = pops[keys.index(level_map["1"][1:])]
        p2 = pops[keys.index(level_map["2"][1:])]
    if p1 < 0 or p2 < 0 or p1 + p2 > 1 + 1e-9:
        raise ConfigError("mixture populations must be nonnegative with p1 + p2 <= 1")

    ctx = SchemeContext(
        b_gauss=b,
        gamma=cfg.require("atom", "linewidth"),
        density=cfg.require("atom", "density"),
        length=cfg.require("geometry", "length"),
        p1=float(p1),
        p2=float(p2),
        level_map=level_map,
        polarizations=polarizations,
        rabi=rabi,
        deltas=deltas,
        zero_field_dipoles=zero_field,
        dipoles=dipoles,
        fields_on=None,
        stark_state_decay=cfg.get("run", "stark_state_decay", True),
        truncation_order=cfg.get("run", "truncation_order", 3),
        rwa_cutoff=cfg.get("run", "rwa_cutoff", 2 * math.pi * 2e9),
        t_end=cfg.get("run", "t_end", 2e-6),
        samples=cfg.get("run", "samples", 1601),
        tolerance=cfg.get("run", "tolerance", 1e-8),
        turn_on_steps=cfg.get("run", "turn_on_steps", 1),
        turn_on_time=cfg.get("run", "turn_on_time", 0.0),
    )
    ctx.fields_on = ctx.fieldset(rabi["1"], rabi["2"])
    return ctx


# ---------------------------------------------------------------------------
# Tier evaluations
# ---------------------------------------------------------------------------


def simple_tier(ctx: SchemeContext) -> dict:
    """Closed-form indices, phases and cross-dipole level."""
    med = ctx.medium()
    i1, i2 = ctx.intensity("1"), ctx.intensity("2")
    res_on = analytic.sat_indices(med, intensity1=i1, intensity2=i2)
    n1_off = analytic.sat_indices(med, intensity1=i1, intensity2=0.0).n1
    n2_off = analytic.sat_indices(med, intensity1=0.0, intensity2=i2).n2
    r1 = analytic.xpm_phase(res_on.n1, n1_off, ctx.length, ctx.omega)
    r2 = analytic.xpm_phase(res_on.n2, n2_off, ctx.length, ctx.omega)
    # Cross dipole implied by the index change, normalized like the other tiers.
    dx = {}
    for which, (n_on, n_off) in (("1", (res_on.n1, n1_off)), ("2", (res_on.n2, n2_off))):
        e_amp = ctx.field_amplitude(which)
        dx[which] = abs(
            2.0 * sc.epsilon_0 * e_amp * (n_on - n_off) / ctx.density
        ) / E_A0
    return {
        "phi1": r1.phase,
        "phi2": r2.phase,
        "dxpm1": dx["1"],
        "dxpm2": dx["2"],
        "xpm_coeff": res_on.xpm_coeff,
        "spm_coeff": res_on.spm_coeff,
    }


def _phase_block(ctx, which, n_on, n_off):
    r = analytic.xpm_phase(n_on, n_off, ctx.length, ctx.omega)
    eff = r.phase / (ctx.omega / sc.c * ctx.length * ctx.intensity("2" if which == "1" else "1"))
    return {
        f"phi{which}": r.phase,
        f"att{which}_on": r.attenuation,
        f"att{which}_off": r.attenuation_off,
        f"att{which}_intensity": r.attenuation - r.attenuation_off,
        f"eff{which}_cm2_per_W": eff * 1e4,
    }


def perturbative_tier(ctx: SchemeContext, t_grid: np.ndarray) -> dict:
    """Seven-level weak-field tier: time series plus steady summary."""
    sch_on = ctx.seven_level(ctx.rabi["1"], ctx.rabi["2"])
    sch_off2 = ctx.seven_level(ctx.rabi["1"], 0.0)
    sch_off1 = ctx.seven_level(0.0, ctx.rabi["2"])
    order = ctx.truncation_order
    out = {"t": t_grid}
    summary = {}
    for which, off in (("1", sch_off2), ("2", sch_off1)):
        series_on = analytic.mean_dipole_series(sch_on, ctx.p1, ctx.p2, t_grid, which, order)
        series_off = analytic.mean_dipole_series(off, ctx.p1, ctx.p2, t_grid, which, order)
        out[f"dxpm{which}"] = (np.abs(series_on) - np.abs(series_off)) / E_A0
        d_on = analytic.steady_value(t_grid, series_on)
        d_off = analytic.steady_value(t_grid, series_off, floor=abs(d_on))
        e_amp = ctx.field_amplitude(which)
        n_on = analytic.index_from_dipole(d_on, ctx.density, e_amp)
        n_off = analytic.index_from_dipole(d_off, ctx.density, e_amp)
        summary.update(_phase_block(ctx, which, n_on, n_off))
        summary[f"dxpm{which}"] = float(
            analytic.steady_value(t_grid, out[f"dxpm{which}"]).real
        )
    out["summary"] = summary
    return out


def master_tier(ctx: SchemeContext, t_grid: np.ndarray, motion: tuple[float, float] | None = None) -> dict:
    """Sixteen-level tier: cross dipoles, phases and attenuations."""
    runs = {}
    for name, (r1, r2) in {
        "on": (ctx.rabi["1"], ctx.rabi["2"]),
        "off2": (ctx.rabi["1"], 0.0),
        "off1": (0.0, ctx.rabi["2"]),
    }.items():
        scheme, traj, offset = _staged_evolve_with_motion(ctx, r1, r2, t_grid, motion)
        runs[name] = (scheme, traj, offset)
    out: dict = {}
    summary = {}
    for which, off_name in (("1", "off2"), ("2", "off1")):
        scheme_on, traj_on, offset = runs["on"]
        scheme_off, traj_off, _ = runs[off_name]
        d_on = np.array([master.mean_dipole(s, scheme_on, which) for s in traj_on.states])
        d_off = np.array([master.mean_dipole(s, scheme_off, which) for s in traj_off.states])
        t = traj_on.times + offset
        dx = (np.abs(d_on) - np.abs(d_off)) / E_A0
        out.setdefault("t", t)
        out[f"dxpm{which}"] = dx
        window = slice(int(0.8 * len(t)), None)
        e_amp = ctx.field_amplitude(which)
        n_on = analytic.index_from_dipole(np.mean(d_on[window]), ctx.density, e_amp)
        n_off = analytic.index_from_dipole(np.mean(d_off[window]), ctx.density, e_amp)
        summary.update(_phase_block(ctx, which, n_on, n_off))
        summary[f"dxpm{which}"] = float(np.mean(dx[window]))
    summary["settle_time_us"] = settle_time(out["t"], out["dxpm1"]) * 1e6
    pops = runs["on"][1].observables["populations"][-1]
    roles = role_indices(runs["on"][0], ctx.level_map)
    summary["pop_X"] = float(pops[roles["X"]])
    summary["pop_3"] = float(pops[roles["3"]])
    out["summary"] = summary
    return out


def _staged_evolve_with_motion(ctx, rabi1, rabi2, t_grid, motion):
    """Master-equation run with a piecewise-constant signal turn-on.

    The signal amplitudes ramp from zero in ``turn_on_steps`` equal steps
    over ``turn_on_time`` (one step = sudden switch-on); the ramp region
    is sampled too, so the returned trajectory covers all of ``t_grid``.
    ``motion`` is an optional (dephasing, transit) rate pair; the transit
    target is the initial mixture.
    """
    dephasing, transit = motion if motion is not None else (0.0, 0.0)

    def make(r1, r2):
        scheme = ctx.full_d1(r1, r2)
        if dephasing > 0.0 or transit > 0.0:
            scheme = master.add_motion_channels(
                scheme, dephasing, transit, transit_target=rho0.entries
            )
        return scheme

    base = ctx.full_d1(rabi1, rabi2)
    roles = role_indices(base, ctx.level_map)
    rho0 = master.DensityMatrix.mixed({roles["1"]: ctx.p1, roles["2"]: ctx.p2}, base.dimension)
    steps = max(1, ctx.turn_on_steps)
    ramp_time = ctx.turn_on_time if steps > 1 else 0.0
    state = rho0
    times: list[np.ndarray] = []
    states: list = []
    if ramp_time > 0.0:
        dt = ramp_time / steps
        for k in range(1, steps + 1):
            lo, hi = (k - 1) * dt, k * dt
            inner = t_grid[(t_grid > lo) & (t_grid < hi)] - lo
            t_eval = np.unique(np.concatenate([[0.0], inner, [dt]]))
            partial = make(rabi1 * k / steps, rabi2 * k / steps)
            traj = master.evolve(state, partial, dt, tol=ctx.tolerance, t_eval=t_eval)
            keep = traj.times < dt if k < steps else np.ones(len(traj.times), bool)
            times.append(traj.times[keep] + lo)
            states.extend(s for s, use in zip(traj.states, keep) if use)
            state = traj.states[-1]
    scheme = make(rabi1, rabi2)
    grid = t_grid[t_grid >= ramp_time] - ramp_time
    if len(grid) == 0 or grid[0] != 0.0:
        grid = np.concatenate([[0.0], grid])
    traj = master.evolve(state, scheme, grid[-1], tol=ctx.tolerance, t_eval=grid)
    if times:
        keep = traj.times > 0.0
        all_times = np.concatenate(times + [traj.times[keep] + ramp_time])
        all_states = states + [s for s, use in zip(traj.states, keep) if use]
    else:
        all_times, all_states = traj.times, traj.states
    stitched = master.Trajectory(
        times=all_times,
        states=all_states,
        observables={"populations": np.array([s.populations() for s in all_states])},
    )
    return scheme, stitched, 0.0


def settle_time(t: np.ndarray, series: np.ndarray, band: float = 0.05, smooth: float = 5e-8) -> float:
    """First time after which the smoothed series stays within ``band`` of
    its final-window mean."""
    if len(t) < 8:
        raise PhysicsError("series too short for a settling analysis")
    dt = t[1] - t[0]
    width = max(1, int(round(smooth / dt)))
    kernel = np.ones(width) / width
    smoothed = np.convolve(series, kernel, mode="same")
    steady = np.mean(series[int(0.8 * len(series)):])
    if steady == 0.0:
        return float(t[0])
    inside = np.abs(smoothed - steady) <= band * abs(steady)
    # ignore edge effects of the moving average at the very end
    inside[-width:] = True
    idx = len(inside) - 1
    while idx > 0 and inside[idx - 1]:
        idx -= 1
    return float(t[idx])


# ---------------------------------------------------------------------------
# Preset drivers
# ---------------------------------------------------------------------------


def run_fig2(cfg: RunConfig) -> dict:
    ctx = build_context(cfg)
    tiers = cfg.get("run", "tiers", ("simple", "perturbative", "master"))
    t_grid = np.linspace(0.0, ctx.t_end, ctx.samples)
    results: dict = {"context": ctx, "tiers": {}}
    if "simple" in tiers:
        results["tiers"]["simple"] = simple_tier(ctx)
    if "perturbative" in tiers:
        results["tiers"]["perturbative"] = perturbative_tier(ctx, t_grid)
    if "master" in tiers:
        motion = None
        if cfg.get("motion", "dephasing") is not None or cfg.get("motion", "transit") is not None:
            motion = (cfg.get("motion", "dephasing", 0.0), cfg.get("motion", "transit", 0.0))
        results["tiers"]["master"] = master_tier(ctx, t_grid, motion)
    return results


def run_state_prep(cfg: RunConfig, efficiencies=(0.0, 0.5, 0.9, 1.0)) -> dict:
    ctx = build_context(cfg)
    med_template = ctx.medium()
    rows = []
    for eps in efficiencies:
        prep = master.PrepConfig(raman_efficiency=eps)
        mix = master.prepare_mixture(prep, ctx.b_gauss, ctx.level_map)
        pops = mix.populations()
        ground = sorted(zeeman_spectrum(GROUND, ctx.b_gauss), key=lambda lv: (lv.f_label, lv.m_f))
        keys = [(lv.f_label, lv.m_f) for lv in ground]
        p1 = float(pops[keys.index(ctx.level_map["1"][1:])])
        p2 = float(pops[keys.index(ctx.level_map["2"][1:])])
        med = analytic.MediumParams(
            density=med_template.density,
            p1=p1,
            p2=p2,
            d41=med_template.d41,
            d42=med_template.d42,
            d53=med_template.d53,
            rabi_pump=med_template.rabi_pump,
            gamma=med_template.gamma,
            stark_detuning=med_template.stark_detuning,
        )
        v1 = pulses.group_velocity(analytic.eta(1, med), ctx.omega)
        v2 = pulses.group_velocity(analytic.eta(2, med), ctx.omega)
        mismatch = max(v1, v2) / min(v1, v2) - 1.0
        rows.append(
            {
                "efficiency": eps,
                "p1": p1,
                "p2": p2,
                "v1_m_per_s": v1,
                "v2_m_per_s": v2,
                "mismatch": mismatch,
            }
        )
    return {"context": ctx, "rows": rows}


def run_max_phase(cfg: RunConfig) -> dict:
    ctx = build_context(cfg)
    med = ctx.medium()
    eta1 = analytic.eta(1, med)
    tau = eta1 * ctx.gamma / (2.0 * abs(ctx.rabi["p"]) ** 2)
    waist = cfg.get("pulse", "waist", 5.0 * RB87.wavelength)
    k = RB87.wavenumber
    z_r = k * waist ** 2
    t_min, length = pulses.min_pulse_duration(tau, k, z_r)
    photons = cfg.get("pulse", "photons", 1.0)
    pulse = pulses.PulseSpec(waist, t_min, RB87.wavelength, photons)
    window = pulses.transparency_window(abs(ctx.fields_on.rabi_pump_aux), ctx.gamma)
    doppler = pulses.doppler_window(
        abs(ctx.rabi["p"]), cfg.get("pulse", "doppler_detuning", 2 * math.pi * 500e6)
    )
    phi_max = pulses.max_phase_shift(
        RB87.wavelength, waist, ctx.gamma, ctx.fields_on.stark_detuning, ctx.density
    )
    return {
        "context": ctx,
        "rows": [
            {
                "T_min_ns": t_min * 1e9,
                "L_mm": length * 1e3,
                "E_max_V_per_m": pulses.e_max(pulse),
                "phi_max_rad": phi_max,
                "window_MHz": window / (2e6 * math.pi),
                "doppler_window_MHz": doppler / (2e6 * math.pi),
                "mismatch_MHz": magnetic_mismatch(
                    ctx.b_gauss,
                    {r: ctx.level_map[r][1:] for r in ("2", "3", "X")},
                )
                / (2e6 * math.pi),
            }
        ],
    }


def run_hot_gas(cfg: RunConfig) -> dict:
    ctx = build_context(cfg)
    waist = cfg.require("pulse", "waist")
    duration = cfg.require("pulse", "duration")
    photons = cfg.get("pulse", "photons", 100.0)
    pulse = pulses.PulseSpec(waist, duration, RB87.wavelength, photons)
    amp = pulses.e_max(pulse)
    # Signal Rabi couplings from the pulse's peak amplitude; signs follow
    # the configured couplings.
    rabi1 = math.copysign(abs(ctx.dipoles["41"]) * amp / sc.hbar, ctx.rabi["1"])
    rabi2 = math.copysign(abs(ctx.dipoles["42"]) * amp / sc.hbar, ctx.rabi["2"])
    ctx.rabi = {**ctx.rabi, "1": rabi1, "2": rabi2}
    ctx.fields_on = ctx.fieldset(rabi1, rabi2)
    t_grid = np.linspace(0.0, ctx.t_end, ctx.samples)
    motion = (cfg.get("motion", "dephasing", 0.0), cfg.get("motion", "transit", 0.0))
    tier = master_tier(ctx, t_grid, motion)
    tier["summary"]["rabi1_MHz"] = rabi1 / (2e6 * math.pi)
    tier["summary"]["rabi2_MHz"] = rabi2 / (2e6 * math.pi)
    tier["summary"]["pulse_intensity_W_per_m2"] = sc.c * sc.epsilon_0 * amp * amp
    return {"context": ctx, "tiers": {"master": tier}}


def scheme_diagnostics(cfg: RunConfig) -> dict:
    """Cheap per-configuration diagnostics (used by sweeps and validate)."""
    ctx = build_context(cfg)
    f = ctx.fields_on
    med = ctx.medium()
    eta1 = analytic.eta(1, med)
    eta2 = analytic.eta(2, med)
    return {
        "B_G": ctx.b_gauss,
        "mismatch_MHz": magnetic_mismatch(
            ctx.b_gauss, {r: ctx.level_map[r][1:] for r in ("2", "3", "X")}
        )
        / (2e6 * math.pi),
        "stark_detuning_MHz": f.stark_detuning / (2e6 * math.pi),
        "aux_detuning1_MHz": f.aux_detuning1 / (2e6 * math.pi),
        "aux_detuning2_MHz": f.aux_detuning2 / (2e6 * math.pi),
        "eta1_s": eta1,
        "eta2_s": eta2,
        "v_g1_m_per_s": pulses.group_velocity(eta1, ctx.omega),
        "v_g2_m_per_s": pulses.group_velocity(eta2, ctx.omega),
        "window_MHz": pulses.transparency_window(abs(f.rabi_pump_aux), ctx.gamma)
        / (2e6 * math.pi),
    }


_SWEEPABLE = {
    "atom.magnetic_field": ("atom", "magnetic_field"),
    "atom.density": ("atom", "density"),
    "lasers.rabi_pump": ("lasers", "rabi_pump"),
    "lasers.rabi_1": ("lasers", "rabi_1"),
    "lasers.rabi_2": ("lasers", "rabi_2"),
}

_SWEEP_UNIT_SCALES = {
    "G": 1.0,
    "MHz": 2.0 * math.pi * 1e6,
    "kHz": 2.0 * math.pi * 1e3,
    "cm^-3": 1e6,
    "m^-3": 1.0,
}


def run_custom(cfg: RunConfig, workers: int = 1) -> dict:
    """Diagnostics table, optionally swept over one config parameter."""
    param = cfg.get("sweep", "parameter")
    if param is None:
        return {"context": build_context(cfg), "rows": [scheme_diagnostics(cfg)]}
    if param not in _SWEEPABLE:
        raise ConfigError(
            f"sweep parameter {param!r} not supported; choose from {sorted(_SWEEPABLE)}"
        )
    unit = cfg.get("sweep", "unit", "")
    scale = _SWEEP_UNIT_SCALES.get(unit)
    if scale is None:
        raise ConfigError(f"sweep unit {unit!r} not recognized")
    values = cfg.get("sweep", "values")
    if not values:
        raise ConfigError("sweep values must be a non-empty list")
    section_key = _SWEEPABLE[param]

    def one(v):
        overlay = dict(cfg.values)
        overlay[section_key] = v * scale
        return scheme_diagnostics(RunConfig(overlay, origin=cfg.origin))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, values))
    else:
        rows = [one(v) for v in values]
    for v, row in zip(values, rows):
        row[f"sweep_{param}"] = v
    return {"context": build_context(cfg), "rows": rows}


def validate_config(cfg: RunConfig) -> list[tuple[str, str]]:
    """Physical sanity findings as (severity, message); never raises for
    physics issues (config parse errors surface before this point)."""
    findings: list[tuple[str, str]] = []
    try:
        ctx = build_context(cfg)
    except ConfigError as exc:
        return [("error", str(exc))]
    f = ctx.fields_on
    if f.stark_detuning == 0.0:
        findings.append(("error", "Kerr coefficient singular: the 3-5 detuning is zero"))
        return findings
    for which in ("1", "2"):
        ratio = abs(ctx.rabi[which]) / abs(ctx.rabi["p"])
        if ratio > 0.5:
            findings.append(
                (
                    "warning",
                    f"signal {which} is not perturbative: |Omega_{which}|/|Omega_p| = {ratio:.2f}",
                )
            )
    window = pulses.transparency_window(abs(f.rabi_pump_aux), ctx.gamma)
    mism = abs(
        magnetic_mismatch(ctx.b_gauss, {r: ctx.level_map[r][1:] for r in ("2", "3", "X")})
    )
    if mism < 3.0 * window:
        findings.append(
            (
                "warning",
                f"two-photon mismatch {mism / (2e6 * math.pi):.2f} MHz does not clear "
                f"the transparency window {window / (2e6 * math.pi):.2f} MHz",
            )
        )
    max_det = max(abs(f.stark_detuning), abs(f.aux_detuning1), abs(f.aux_detuning2))
    if ctx.rwa_cutoff < 2.0 * max_det:
        findings.append(
            ("warning", "rotating-wave cutoff is close to the scheme detunings")
        )
    if abs(ctx.gamma / f.stark_detuning) >= 0.5:
        findings.append(("warning", "3-5 detuning is not large compared to the linewidth"))
    findings.append(
        (
            "info",
            f"group velocities {pulses.group_velocity(analytic.eta(1, ctx.medium()), ctx.omega):.1f} "
            f"and {pulses.group_velocity(analytic.eta(2, ctx.medium()), ctx.omega):.1f} m/s",
        )
    )
    return findings


def dump_structure_rows(cfg: RunConfig) -> list[dict]:
    b = cfg.require("atom", "magnetic_field")
    rows = []
    for manifold in (GROUND, EXCITED):
        for lv in zeeman_spectrum(manifold, b):
            rows.append(
                {
                    "manifold": manifold,
                    "F": lv.f_label,
                    "mF": lv.m_f,
                    "B_G": b,
                    "energy_MHz": lv.energy / (2e6 * math.pi),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_csv(path: Path, rows: list[dict], cfg: RunConfig | None = None):
    """Write rows with a config-echo header; output is deterministic."""
    lines = []
    if cfg is not None:
        lines.extend(f"# {line}" for line in cfg.describe())
    if not rows:
        raise PhysicsError("no rows to write")
    cols = list(rows[0].keys())
    lines.append(",".join(cols))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    path.write_text("\n".join(lines) + "\n")


def write_timeseries(path: Path, tiers: dict, cfg: RunConfig | None = None):
    """Cross-dipole time series of every computed tier on a common grid."""
    base = tiers.get("perturbative") or tiers.get("master")
    if base is None:
        raise PhysicsError("no time-resolved tier computed")
    t = base["t"]
    rows = []
    for k, tval in enumerate(t):
        row = {"t_us": tval * 1e6}
        for tier_name in ("simple", "perturbative", "master"):
            tier = tiers.get(tier_name)
            if tier is None:
                continue
            for which in ("1", "2"):
                if tier_name == "simple":
                    row[f"dxpm{which}_simple"] = tier[f"dxpm{which}"]
                else:
                    series = tier[f"dxpm{which}"]
                    grid = tier["t"]
                    row[f"dxpm{which}_{tier_name}"] = float(np.interp(tval, grid, series))
        rows.append(row)
    write_csv(path, rows, cfg)


def summary_rows(results: dict) -> list[dict]:
    row: dict = {}
    for tier_name, tier in results["tiers"].items():
        summary = tier.get("summary", tier if tier_name == "simple" else {})
        for k, v in summary.items():
            if isinstance(v, (int, float)):
                row[f"{tier_name}.{k}"] = v
    return [row]
