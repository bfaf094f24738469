"""Config-driven batch runner and command-line interface.

Five scenarios: ``pump_dump`` (single-event fragment spectra across driving
wavelengths), ``bichromatic`` (single-event phase control of a two-state
vibrational superposition), ``two_color`` (many-cycle control with and
without a beat-matched two-color field), ``field_free`` (Born wave-packet
scattering comparisons and probing) and ``coincidence`` (electron/fragment
coincidence maps).

Configs are TOML; unknown keys are rejected.  Outputs are CSV files with
``#`` metadata headers plus one JSON summary per run.  Exit codes: 0 on
success, 2 on configuration errors, 3 on numerical-convergence failures.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import fields as fl
from . import freescatter as fscat
from . import impact as imp
from . import molstruct as ms
from . import saddle as sd
from . import sfa
from . import spectra as sp
from .constants import (MU_NUCLEAR_D2, au_to_ev, au_to_fs, fs_to_au,
                        omega_from_wavelength_nm)
from .errors import ConfigError, ConvergenceError

_SCENARIOS = ("pump_dump", "bichromatic", "two_color", "field_free",
              "coincidence")

_SCHEMA = {
    "field": {"e0", "wavelength_nm", "omega", "mode", "delta_omega",
              "rel_phase", "n_cycles"},
    "molecular": {"ip_vertical", "reduced_mass", "n_neutral", "grid",
                  "neutral", "ion", "sigma_u"},
    "molecular.grid": {"r_min", "r_max", "n_points"},
    "molecular.neutral": {"d_e", "r_e", "a", "table"},
    "molecular.ion": {"d_e", "r_e", "a", "table"},
    "molecular.sigma_u": {"amplitude", "decay_length", "asymptote", "table"},
    "impact": {"orbital_decay", "j_max", "coupling_norm", "q_min",
               "form_factor_bond"},
    "grids": {"e_d_max_ev", "n_e", "k_par_max", "n_par", "k_perp_max",
              "n_perp"},
    "run": {"threads", "channel_cut", "convergence_tol"},
    "scenario": {"name", "wavelengths_nm", "n_phi", "n_cycles_many",
                 "check_stability", "tau_d_fs", "e_d_slice_ev", "k_max",
                 "n_side", "single_event"},
    "output": {"dir"},
}


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _check_keys(cfg, section, path=""):
    allowed = _SCHEMA.get(section)
    if allowed is None:
        return
    for key, val in cfg.items():
        full = f"{path}{key}" if not path else f"{path}.{key}"
        _require(key in allowed, f"unknown config key [{section}] {key}")
        if isinstance(val, dict):
            _check_keys(val, f"{section}.{key}", full)


def load_config(path):
    """Parse and validate a TOML run configuration."""
    try:
        with open(path, "rb") as f:
            cfg = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}")
    for section in cfg:
        _require(section in _SCHEMA, f"unknown config section [{section}]")
        if isinstance(cfg[section], dict):
            _check_keys(cfg[section], section)
    _require("scenario" in cfg and "name" in cfg["scenario"],
             "config must provide [scenario] name")
    name = cfg["scenario"]["name"]
    _require(name in _SCENARIOS,
             f"unknown scenario '{name}' (choose from {_SCENARIOS})")
    return cfg


def config_hash(cfg):
    """Short stable hash of the physics configuration.

    The worker-thread count is excluded: the reduction order is fixed, so
    results are thread-count independent.
    """
    scrubbed = {k: (dict(v) if isinstance(v, dict) else v)
                for k, v in cfg.items()}
    scrubbed.get("run", {}).pop("threads", None)
    blob = json.dumps(scrubbed, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


# ---------------------------------------------------------------------------
# builders

def _positive(val, name):
    _require(isinstance(val, (int, float)) and val > 0,
             f"{name} must be positive, got {val!r}")
    return float(val)


def build_field(cfg, **overrides):
    fc = dict(cfg.get("field", {}))
    fc.update(overrides)
    e0 = _positive(fc.get("e0", 0.065), "field.e0")
    if "omega" in fc:
        omega = _positive(fc["omega"], "field.omega")
    else:
        omega = omega_from_wavelength_nm(
            _positive(fc.get("wavelength_nm", 800.0), "field.wavelength_nm"))
    mode_name = fc.get("mode", "monochromatic")
    _require(mode_name in ("monochromatic", "two_color"),
             f"field.mode must be monochromatic or two_color, got {mode_name!r}")
    mode = fl.FieldMode(mode_name)
    n_cycles = fc.get("n_cycles", 2)
    _require(isinstance(n_cycles, int) and n_cycles >= 1,
             "field.n_cycles must be an integer >= 1")
    try:
        return fl.LaserField(e0=e0, omega=omega,
                             delta_omega=float(fc.get("delta_omega", 0.0)),
                             rel_phase=float(fc.get("rel_phase", 0.0)),
                             n_cycles=n_cycles, mode=mode)
    except ValueError as exc:
        raise ConfigError(f"[field] {exc}")


def _build_curve(block, defaults, kind, reduced_mass):
    if block is None:
        block = {}
    if "table" in block:
        return ms.PotentialCurve.from_table_file(block["table"], reduced_mass)
    p = dict(defaults)
    p.update(block)
    try:
        if kind == "morse":
            return ms.PotentialCurve.morse(p["d_e"], p["r_e"], p["a"],
                                           v_inf=p["d_e"],
                                           reduced_mass=reduced_mass)
        return ms.PotentialCurve.repulsive(p["amplitude"], p["decay_length"],
                                           p["asymptote"],
                                           reduced_mass=reduced_mass)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[molecular] bad curve parameters: {exc}")


def build_molecular(cfg):
    mc = cfg.get("molecular", {})
    gb = mc.get("grid", {})
    grid = ms.radial_grid(gb.get("r_min", 0.3), gb.get("r_max", 40.0),
                          gb.get("n_points", 16384))
    mu = _positive(mc.get("reduced_mass", MU_NUCLEAR_D2),
                   "molecular.reduced_mass")
    neutral = _build_curve(mc.get("neutral"), ms.DEFAULT_NEUTRAL, "morse", mu)
    ion = _build_curve(mc.get("ion"), ms.DEFAULT_ION, "morse", mu)
    sigma_u = _build_curve(mc.get("sigma_u"), ms.DEFAULT_SIGMA_U, "repulsive", mu)
    return ms.build_molecular_data(neutral, ion, sigma_u, grid,
                                   ip_vertical=mc.get("ip_vertical",
                                                      ms.DEFAULT_IP_VERTICAL),
                                   n_neutral=int(mc.get("n_neutral", 4)))


def build_impact_model(cfg):
    ic = cfg.get("impact", {})
    try:
        return imp.ImpactModel(
            orbital_decay=ic.get("orbital_decay", 1.2),
            coupling_norm=ic.get("coupling_norm", 1.0),
            j_max=ic.get("j_max", 9),
            q_min=ic.get("q_min", 1e-3),
            form_factor_bond=ic.get("form_factor_bond", 2.0))
    except ValueError as exc:
        raise ConfigError(f"[impact] {exc}")


def build_grids(cfg):
    gc = cfg.get("grids", {})
    return sp.SpectrumGrids.default(
        e_d_max_ev=_positive(gc.get("e_d_max_ev", 15.0), "grids.e_d_max_ev"),
        n_e=int(gc.get("n_e", 120)),
        k_par_max=gc.get("k_par_max", 3.0), n_par=int(gc.get("n_par", 128)),
        k_perp_max=gc.get("k_perp_max", 2.5), n_perp=int(gc.get("n_perp", 64)))


def check_j_convergence(result, tol):
    """Fail when dropping the top partial wave shifts the yield beyond tol."""
    j_sorted = sorted(result.per_j)
    if len(j_sorted) < 2:
        raise ConvergenceError(
            "cannot assess partial-wave convergence with a single J")
    full = result.w_total
    top = float(np.trapezoid(result.per_j[j_sorted[-1]], result.e_release))
    if full <= 0:
        return 0.0
    change = top / full
    if change > tol:
        raise ConvergenceError(
            f"partial-wave sum not converged: top J carries {change:.3f} "
            f"of the yield (tolerance {tol})")
    return change


# ---------------------------------------------------------------------------
# output helpers

class OutputWriter:
    def __init__(self, out_dir, cfg):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.hash = config_hash(cfg)
        self.meta_common = {"config_hash": self.hash}

    def _header(self, meta):
        lines = []
        merged = dict(self.meta_common)
        merged.update(meta)
        for k, v in merged.items():
            lines.append(f"# {k}: {v}")
        return "\n".join(lines)

    def csv(self, name, columns, arrays, meta=None):
        arrays = [np.asarray(a) for a in arrays]
        path = self.dir / name
        with open(path, "w") as f:
            f.write(self._header(meta or {}) + "\n")
            f.write("# columns: " + ", ".join(columns) + "\n")
            for row in zip(*arrays):
                f.write(",".join("%.17g" % float(v) for v in row) + "\n")
        return path

    def json(self, name, payload):
        path = self.dir / name
        merged = {"config_hash": self.hash}
        merged.update(payload)
        with open(path, "w") as f:
            json.dump(merged, f, indent=2, sort_keys=True, default=float)
            f.write("\n")
        return path


def _spectrum_meta(result, extra=None):
    meta = {k: v for k, v in result.meta.items()}
    if extra:
        meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# scenarios

def _engine_for(cfg, field, molecular, model, grids=None, channels=None,
                tables=None):
    rc = cfg.get("run", {})
    return sfa.RecollisionEngine(
        field, molecular, model,
        grids if grids is not None else build_grids(cfg),
        channels=channels, channel_cut=rc.get("channel_cut", 0.02),
        threads=int(rc.get("threads", 1)), tables=tables)


def _shared_tables(cfg, molecular, model, grids):
    rc = cfg.get("run", {})
    channels = sfa.select_channels(molecular, (0, 1),
                                   cfg.get("field", {}).get("e0", 0.065),
                                   rc.get("channel_cut", 0.02))
    tables = imp.ImpactTables(model, molecular, grids.e_release, channels)
    return channels, tables


def classical_stretch_energy(molecular, tau_d):
    """Classical-trajectory reference for the fragment peak energy.

    Rolls the nuclei on the bound ionic curve from the neutral equilibrium
    for the delay tau_d and reads half the repulsive-curve height above the
    asymptote at the reached bond length.  Returns (E_D_eV, R_classical).
    """
    from scipy.integrate import solve_ivp
    mu = molecular.ion_curve.reduced_mass
    r0 = molecular.neutral_curve.params.get("r_e", 1.4)
    h = 1e-5

    def rhs(t, y):
        r, v = y
        dv = -(molecular.ion_curve(r + h) - molecular.ion_curve(r - h)) / (2 * h)
        return [v, dv / mu]

    sol = solve_ivp(rhs, (0.0, tau_d), [r0, 0.0], rtol=1e-10, atol=1e-12,
                    dense_output=True)
    r_cl = float(sol.y[0, -1])
    e_rel = float(molecular.sigma_u_curve(r_cl)) - molecular.u_asymptote
    return 0.5 * au_to_ev(e_rel), r_cl


def run_pump_dump(cfg, writer, molecular=None, model=None):
    sc = cfg.get("scenario", {})
    wavelengths = sc.get("wavelengths_nm", [800.0, 1200.0, 1530.0, 1850.0])
    _require(isinstance(wavelengths, list) and len(wavelengths) > 0,
             "scenario.wavelengths_nm must be a non-empty list")
    for w in wavelengths:
        _positive(w, "scenario.wavelengths_nm entry")
    molecular = molecular if molecular is not None else build_molecular(cfg)
    model = model if model is not None else build_impact_model(cfg)
    tol = cfg.get("run", {}).get("convergence_tol", 0.05)
    grids = build_grids(cfg)
    channels, tables = _shared_tables(cfg, molecular, model, grids)

    summary = {"scenario": "pump_dump", "wavelengths_nm": list(wavelengths),
               "peaks": []}
    peak_rows = []
    for lam in wavelengths:
        field = build_field(cfg, wavelength_nm=float(lam), mode="monochromatic",
                            delta_omega=0.0)
        engine = _engine_for(cfg, field, molecular, model, grids,
                             channels, tables)
        result = engine.spectrum(sfa.InitialSuperposition.single(0), events=[0])
        change = check_j_convergence(result, tol)
        tau_d = sd.dominant_travel_time(field, molecular.i_p(0, 0))
        oracle_ev, r_cl = classical_stretch_energy(molecular, tau_d)
        peak = result.peak_e_d_ev()
        writer.csv(f"pump_dump_{int(round(lam))}nm.csv",
                   ["E_D_eV", "W_D_arb"], [result.e_d_ev, result.w_d],
                   _spectrum_meta(result, {
                       "wavelength_nm": lam,
                       "tau_d_fs": au_to_fs(tau_d),
                       "j_convergence": change}))
        peak_rows.append((lam, peak, oracle_ev))
        summary["peaks"].append({
            "wavelength_nm": lam, "peak_e_d_ev": peak,
            "classical_oracle_ev": oracle_ev, "r_classical": r_cl,
            "tau_d_fs": au_to_fs(tau_d), "w_total": result.w_total})
    rows = np.array(peak_rows)
    writer.csv("pump_dump_peaks.csv",
               ["wavelength_nm", "peak_E_D_eV", "classical_oracle_eV"],
               [rows[:, 0], rows[:, 1], rows[:, 2]])
    writer.json("pump_dump_summary.json", summary)
    return summary


def run_bichromatic(cfg, writer, molecular=None, model=None):
    sc = cfg.get("scenario", {})
    n_phi = int(sc.get("n_phi", 32))
    _require(n_phi >= 4, "scenario.n_phi must be at least 4")
    molecular = molecular if molecular is not None else build_molecular(cfg)
    model = model if model is not None else build_impact_model(cfg)
    field = build_field(cfg)
    grids = build_grids(cfg)
    channels, tables = _shared_tables(cfg, molecular, model, grids)
    engine = _engine_for(cfg, field, molecular, model, grids, channels, tables)
    tol = cfg.get("run", {}).get("convergence_tol", 0.05)

    amps = engine.member_amplitudes(members=(0, 1), events=[0])
    results = {}
    for label, sup in (
            ("nu0", sfa.InitialSuperposition.single(0)),
            ("nu1", sfa.InitialSuperposition.single(1)),
            ("plus", sfa.InitialSuperposition.two_state(0.0)),
            ("minus", sfa.InitialSuperposition.two_state(np.pi))):
        coeffs = np.zeros(2, dtype=complex)
        for nu, c in sup.members:
            coeffs[nu] = c
        combined = np.tensordot(coeffs, amps, axes=([0], [0]))
        dens = np.abs(combined) ** 2
        per_j = np.einsum("ejkp,kp->ej", dens, engine.grids.kf.weights)
        results[label] = sp.SpectrumResult(
            engine.grids.e_release.copy(), per_j.sum(axis=1),
            {j: per_j[:, i] for i, j in enumerate(engine.j_list)},
            engine._meta(superposition=label))
    check_j_convergence(results["nu0"], tol)

    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    w_t = engine.total_yield_scan(phis, member_amps=amps)
    fit = sp.cosine_fit(phis, w_t)

    e_d = results["nu0"].e_d_ev
    writer.csv("bichromatic_spectra.csv",
               ["E_D_eV", "W_D_nu0", "W_D_nu1", "W_D_plus", "W_D_minus"],
               [e_d] + [results[k].w_d for k in ("nu0", "nu1", "plus", "minus")],
               _spectrum_meta(results["nu0"]))
    writer.csv("bichromatic_scan.csv", ["phi_rad", "W_T_arb", "W_T_norm"],
               [phis, w_t, w_t / w_t.mean()],
               {"fit_r2": fit["r2"], "fit_contrast": fit["contrast"]})
    summary = {"scenario": "bichromatic", "fit": fit,
               "w_total": {k: results[k].w_total for k in results},
               "peak_e_d_ev": {k: results[k].peak_e_d_ev() for k in results}}
    writer.json("bichromatic_summary.json", summary)
    return summary


def run_two_color(cfg, writer, molecular=None, model=None):
    sc = cfg.get("scenario", {})
    n_phi = int(sc.get("n_phi", 32))
    n_many = int(sc.get("n_cycles_many", 11))
    check_stability = bool(sc.get("check_stability", False))
    molecular = molecular if molecular is not None else build_molecular(cfg)
    model = model if model is not None else build_impact_model(cfg)
    delta = cfg.get("field", {}).get(
        "delta_omega",
        float(molecular.neutral_energies[1] - molecular.neutral_energies[0]))
    grids = build_grids(cfg)
    channels, tables = _shared_tables(cfg, molecular, model, grids)

    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)

    def scan_for(n_cycles, mode, events=None):
        field = build_field(cfg, n_cycles=n_cycles, mode=mode,
                            delta_omega=delta if mode == "two_color" else 0.0)
        engine = _engine_for(cfg, field, molecular, model, grids,
                             channels, tables)
        amps = engine.member_amplitudes(members=(0, 1), events=events)
        return engine.total_yield_scan(phis, member_amps=amps)

    w_single = scan_for(2, "monochromatic", events=[0])
    w_mono = scan_for(n_many, "monochromatic")
    w_two = scan_for(n_many, "two_color")

    fits = {k: sp.cosine_fit(phis, w / w.mean())
            for k, w in (("single_event", w_single), ("monochromatic", w_mono),
                         ("two_color", w_two))}
    summary = {
        "scenario": "two_color", "delta_omega": delta, "n_cycles": n_many,
        "contrast": {k: f["contrast"] for k, f in fits.items()},
        "contrast_ratio_mono": fits["monochromatic"]["contrast"]
        / fits["single_event"]["contrast"],
        "contrast_ratio_two_color": fits["two_color"]["contrast"]
        / fits["single_event"]["contrast"],
    }
    if check_stability:
        w_two13 = scan_for(n_many + 2, "two_color")
        c13 = sp.cosine_fit(phis, w_two13 / w_two13.mean())["contrast"]
        summary["contrast_two_color_plus2"] = c13
        summary["stability_rel_change"] = abs(
            c13 - fits["two_color"]["contrast"]) / fits["two_color"]["contrast"]
    writer.csv("two_color_scan.csv",
               ["phi_rad", "W_T_norm_monochromatic", "W_T_norm_two_color",
                "W_T_norm_single_event"],
               [phis, w_mono / w_mono.mean(), w_two / w_two.mean(),
                w_single / w_single.mean()],
               {"delta_omega_au": delta, "n_cycles": n_many})
    writer.json("two_color_summary.json", summary)
    return summary


def run_field_free(cfg, writer, molecular=None, model=None):
    sc = cfg.get("scenario", {})
    molecular = molecular if molecular is not None else build_molecular(cfg)
    model = model if model is not None else build_impact_model(cfg)
    grids = build_grids(cfg)
    channels, tables = _shared_tables(cfg, molecular, model, grids)
    engine = fscat.FieldFreeEngine(molecular, model, grids, channels=channels,
                                   tables=tables)
    e_birth = cfg.get("field", {}).get("e0", 0.065)

    # delays: configured, or derived from the pump-dump wavelength ladder
    taus_fs = sc.get("tau_d_fs")
    if taus_fs is None:
        wavelengths = sc.get("wavelengths_nm", [800.0, 1200.0, 1530.0, 1850.0])
        taus_fs = []
        for lam in wavelengths:
            f = build_field(cfg, wavelength_nm=float(lam),
                            mode="monochromatic", delta_omega=0.0)
            taus_fs.append(au_to_fs(sd.dominant_travel_time(
                f, molecular.i_p(0, 0))))
    _require(len(taus_fs) > 0, "scenario.tau_d_fs must be non-empty")

    summary = {"scenario": "field_free", "tau_d_fs": list(taus_fs),
               "spectra": []}
    for tau_fs in taus_fs:
        tau = fs_to_au(float(tau_fs))
        a_n, _ = fscat.vib_coeffs_recollision(molecular, tau, e_birth,
                                              channels=channels)
        spec_rel = fscat.WavePacketSpec(fscat.Frame.RELATIVE_COM, 1.5, 0.5,
                                        0.0, 1.0, a_n, tuple(channels), tau)
        spec_lab = fscat.WavePacketSpec(fscat.Frame.LAB, 1.5, 0.5, 0.0, 1.0,
                                        a_n, tuple(channels), tau)
        res_rel = engine.yields(spec_rel)
        res_lab = engine.yields(spec_lab)
        tag = ("%.2f" % tau_fs).replace(".", "p")
        writer.csv(f"field_free_tau_{tag}fs.csv",
                   ["E_D_eV", "W_D_entangled_rel", "W_D_lab"],
                   [res_rel.e_d_ev, res_rel.w_d, res_lab.w_d],
                   _spectrum_meta(res_rel, {"tau_d_fs": tau_fs}))
        cell = res_rel.e_d_ev[1] - res_rel.e_d_ev[0]
        summary["spectra"].append({
            "tau_d_fs": tau_fs,
            "peak_e_d_ev_rel": res_rel.peak_e_d_ev(),
            "peak_e_d_ev_lab": res_lab.peak_e_d_ev(),
            "peak_cell_offset": abs(res_rel.peak_e_d_ev()
                                    - res_lab.peak_e_d_ev()) / cell,
            "peak_w_d_rel": float(res_rel.w_d.max()),
            "peak_w_d_lab": float(res_lab.w_d.max()),
        })

    # phase scan vs the strong-field single-event reference
    n_phi = int(sc.get("n_phi", 32))
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    field = build_field(cfg, mode="monochromatic", delta_omega=0.0)
    tau_ref = sd.dominant_travel_time(field, molecular.i_p(0, 0))
    e_n = molecular.ion_energies[channels]
    w01 = np.zeros((len(channels), 2), dtype=complex)
    for i, m in enumerate((0, 1)):
        i_p = e_n - molecular.e_i[m]
        w01[:, i] = (molecular.fc_matrix[channels, m]
                     * np.exp(-((2 * i_p) ** 1.5) / (3 * e_birth))
                     * np.exp(-1j * e_n * tau_ref))
    geometry = fscat.WavePacketSpec(fscat.Frame.RELATIVE_COM, 1.5, 0.5, 0.0,
                                    1.0, np.ones(len(channels)),
                                    tuple(channels), tau_ref)
    w_free = engine.total_yield_scan(phis, geometry, w01)

    engine_sf = _engine_for(cfg, field, molecular, model, grids, channels,
                            tables)
    amps = engine_sf.member_amplitudes(members=(0, 1), events=[0])
    w_strong = engine_sf.total_yield_scan(phis, member_amps=amps)
    r = sp.pearson(w_free / w_free.mean(), w_strong / w_strong.mean())
    writer.csv("field_free_scan.csv",
               ["phi_rad", "W_T_norm_field_free", "W_T_norm_strong_field"],
               [phis, w_free / w_free.mean(), w_strong / w_strong.mean()],
               {"pearson_r": r, "tau_d_fs": au_to_fs(tau_ref)})
    summary["scan"] = {
        "pearson_r": r,
        "fit_free": sp.cosine_fit(phis, w_free / w_free.mean()),
        "fit_strong": sp.cosine_fit(phis, w_strong / w_strong.mean()),
    }
    writer.json("field_free_summary.json", summary)
    return summary


def run_coincidence(cfg, writer, molecular=None, model=None):
    sc = cfg.get("scenario", {})
    e_d_slice = float(sc.get("e_d_slice_ev", 6.0))
    k_max = float(sc.get("k_max", 1.2))
    n_side = int(sc.get("n_side", 161))
    molecular = molecular if molecular is not None else build_molecular(cfg)
    model = model if model is not None else build_impact_model(cfg)
    fc = dict(cfg.get("field", {}))
    fc.setdefault("n_cycles", 5)
    field = build_field({"field": fc})
    _require(field.n_cycles >= 1, "coincidence needs n_cycles >= 1")
    engine = _engine_for(cfg, field, molecular, model)
    sup = sfa.InitialSuperposition.single(0)

    kx, ky, ring = engine.coincidence_ring_map(sup, e_d_slice, k_max, n_side)
    kx1, ky1, ring1 = engine.coincidence_ring_map(sup, e_d_slice, k_max,
                                                  n_side, events=[0])
    gx, gy = np.meshgrid(kx, ky, indexing="ij")
    writer.csv("coincidence_ring_map.csv",
               ["k_fx_au", "k_fy_au", "W_arb", "W_single_event_arb"],
               [gx.ravel(), gy.ravel(), ring.ravel(), ring1.ravel()],
               {"e_d_slice_ev": e_d_slice, "n_cycles": field.n_cycles})

    e_rel, kxm, emap = engine.coincidence_energy_map(sup, k_max=k_max,
                                                     n_k=(n_side + 1) // 2)
    ge, gk = np.meshgrid(0.5 * au_to_ev(e_rel), kxm, indexing="ij")
    writer.csv("coincidence_energy_map.csv",
               ["E_D_eV", "k_fx_au", "W_arb"],
               [ge.ravel(), gk.ravel(), emap.ravel()],
               {"n_cycles": field.n_cycles})

    # ring spacing along the positive k_fx axis, in electron energy
    iy0 = int(np.argmin(np.abs(ky)))
    sel = kx > 0.05
    energy = 0.5 * kx[sel] ** 2
    spacings = sp.peak_spacings(energy, ring[sel, iy0], rel_height=0.05)
    spacing = float(np.median(spacings)) if spacings.size else float("nan")
    spacings1 = sp.peak_spacings(energy, ring1[sel, iy0], rel_height=0.05)
    summary = {
        "scenario": "coincidence", "e_d_slice_ev": e_d_slice,
        "n_cycles": field.n_cycles, "omega_au": field.omega,
        "ring_spacing_au": spacing,
        "ring_spacing_over_omega": spacing / field.omega,
        "n_rings": int(spacings.size) + 1 if spacings.size else 0,
        "n_rings_single_event": int(spacings1.size) + 1 if spacings1.size else 0,
    }
    writer.json("coincidence_summary.json", summary)
    return summary


_RUNNERS = {
    "pump_dump": run_pump_dump,
    "bichromatic": run_bichromatic,
    "two_color": run_two_color,
    "field_free": run_field_free,
    "coincidence": run_coincidence,
}


def dump_trajectories(cfg, writer, molecular, model):
    """Diagnostic CSV of branch solutions for a sample of final states."""
    field = build_field(cfg)
    engine_grids = build_grids(cfg)
    event = fl.half_cycle_events(field)[0]
    rows = []
    e_samples = engine_grids.e_release[:: max(1, engine_grids.e_release.size // 8)]
    k_samples = engine_grids.kf.k_par[:: max(1, engine_grids.kf.k_par.size // 8)]
    for e_rel in e_samples:
        e_total = molecular.total_energy(float(e_rel))
        for kx in k_samples:
            for traj in sd.solve_final_state(field, event,
                                             np.array([float(kx), 0.0, 0.0]),
                                             e_total, 0, molecular):
                rows.append((traj.half_cycle,
                             0 if traj.branch is sd.Branch.SHORT else 1,
                             traj.t_birth, traj.t_return, traj.k_birth[0],
                             traj.return_energy, e_rel, kx))
    rows = np.array(rows) if rows else np.zeros((0, 8))
    writer.csv("trajectories.csv",
               ["half_cycle", "branch_is_long", "t_birth_au", "t_return_au",
                "k0x_au", "return_energy_au", "e_release_au", "k_fx_au"],
               [rows[:, i] for i in range(8)])


def run(cfg, out_dir=None, dump_traj=False):
    """Execute the configured scenario; returns the summary dict."""
    writer = OutputWriter(out_dir or cfg.get("output", {}).get("dir", "out"),
                          cfg)
    molecular = build_molecular(cfg)
    model = build_impact_model(cfg)
    if dump_traj:
        dump_trajectories(cfg, writer, molecular, model)
    name = cfg["scenario"]["name"]
    return _RUNNERS[name](cfg, writer, molecular=molecular, model=model)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="recollide",
        description="Batch simulator of recollision-induced dissociation "
                    "of D2+ (strong-field and field-free engines).")
    parser.add_argument("scenario", choices=_SCENARIOS,
                        help="scenario to run (must match the config)")
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for the grid maps")
    parser.add_argument("--dump-trajectories", action="store_true",
                        help="write a diagnostic trajectory CSV")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if cfg["scenario"]["name"] != args.scenario:
            raise ConfigError(
                f"config declares scenario '{cfg['scenario']['name']}' "
                f"but '{args.scenario}' was requested")
        if args.threads is not None:
            cfg.setdefault("run", {})["threads"] = args.threads
        summary = run(cfg, out_dir=args.out,
                      dump_traj=args.dump_trajectories)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(summary, indent=2, sort_keys=True, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
