"""Molecular basis for D2 / D2+: potential curves, bound and continuum
nuclear states, Franck-Condon overlaps and per-channel energy bookkeeping.

All states live on one shared uniform radial grid.  Bound levels come from
Numerov shooting with Sturm node counting; continuum states are outward
Numerov solutions amplitude-matched to free spherical waves for energy
normalization <E|E'> = delta(E - E').  The common energy origin is the
minimum of the bound ionic curve.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from numba import njit
from scipy.interpolate import PchipInterpolator
from scipy.special import spherical_jn, spherical_yn

from .constants import MU_NUCLEAR_D2
from .errors import (EnergyBelowAsymptote, GridMismatch, GridTooCoarse,
                     NoBoundStates)

# ---------------------------------------------------------------------------
# potential curves

MORSE = "morse"
REPULSIVE = "repulsive"
TABULATED = "tabulated"
CALLABLE = "callable"


@dataclass(frozen=True)
class PotentialCurve:
    """One adiabatic potential V(R) with the reduced mass of the nuclei.

    Use the ``morse`` / ``repulsive`` / ``from_table`` constructors; the
    ``from_callable`` constructor accepts an arbitrary V(R) for testing and
    custom curves.
    """

    kind: str
    reduced_mass: float
    asymptote: float
    params: dict = dc_field(default_factory=dict)
    _fn: object = None

    @staticmethod
    def morse(d_e, r_e, a, v_inf=0.0, reduced_mass=MU_NUCLEAR_D2):
        """Morse well of depth d_e at r_e with asymptote v_inf."""
        if d_e <= 0 or a <= 0 or r_e <= 0:
            raise ValueError("Morse parameters must be positive")
        v_min = v_inf - d_e

        def fn(r):
            return v_min + d_e * (1.0 - np.exp(-a * (np.asarray(r) - r_e))) ** 2

        return PotentialCurve(MORSE, reduced_mass, v_inf,
                              dict(d_e=d_e, r_e=r_e, a=a, v_inf=v_inf), fn)

    @staticmethod
    def repulsive(amplitude, decay_length, asymptote=0.0,
                  reduced_mass=MU_NUCLEAR_D2):
        """Exponential repulsive wall amplitude*exp(-R/decay) + asymptote."""
        if amplitude <= 0 or decay_length <= 0:
            raise ValueError("repulsive parameters must be positive")

        def fn(r):
            return amplitude * np.exp(-np.asarray(r) / decay_length) + asymptote

        return PotentialCurve(REPULSIVE, reduced_mass, asymptote,
                              dict(amplitude=amplitude,
                                   decay_length=decay_length,
                                   asymptote=asymptote), fn)

    @staticmethod
    def from_table(r, v, reduced_mass=MU_NUCLEAR_D2):
        """Monotone-cubic interpolation of (R, V) samples in au."""
        r = np.asarray(r, dtype=float)
        v = np.asarray(v, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 4:
            raise ValueError("table needs matching 1-d R and V arrays")
        if np.any(np.diff(r) <= 0):
            raise ValueError("table R values must be strictly increasing")
        interp = PchipInterpolator(r, v, extrapolate=False)
        r_lo, r_hi = r[0], r[-1]

        def fn(x):
            x = np.asarray(x, dtype=float)
            if np.any(x < r_lo) or np.any(x > r_hi):
                raise ValueError("tabulated curve evaluated outside its R range")
            return interp(x)

        return PotentialCurve(TABULATED, reduced_mass, float(v[-1]),
                              dict(r_min=r_lo, r_max=r_hi), fn)

    @staticmethod
    def from_table_file(path, reduced_mass=MU_NUCLEAR_D2):
        """Load a plain-text two-column (R, V) table in au."""
        data = np.loadtxt(path)
        if data.ndim != 2 or data.shape[1] < 2:
            raise ValueError(f"{path}: expected two columns (R, V)")
        return PotentialCurve.from_table(data[:, 0], data[:, 1], reduced_mass)

    @staticmethod
    def from_callable(fn, asymptote, reduced_mass=MU_NUCLEAR_D2):
        return PotentialCurve(CALLABLE, reduced_mass, asymptote, {}, fn)

    def __call__(self, r):
        return self._fn(r)

    def check_asymptote(self, r_edge, tol=1e-6):
        """Verify V approaches the stated asymptote at the grid edge."""
        v_edge = float(self(r_edge))
        if abs(v_edge - self.asymptote) > tol:
            raise ValueError(
                f"curve does not reach its asymptote at R={r_edge}: "
                f"V={v_edge}, asymptote={self.asymptote}")


def radial_grid(r_min=0.3, r_max=40.0, n_points=16384):
    """Uniform radial grid shared by all states."""
    if r_min <= 0 or r_max <= r_min or n_points < 16:
        raise ValueError("invalid radial grid")
    return np.linspace(r_min, r_max, n_points)


def _check_uniform(r):
    h = (r[-1] - r[0]) / (r.size - 1)
    if not np.allclose(np.diff(r), h, rtol=0.0, atol=1e-9 * h):
        raise ValueError("radial grid must be uniform")
    return h


# ---------------------------------------------------------------------------
# Numerov kernels

@njit(cache=True)
def _count_nodes_batch(base, coef, energies):
    """Sturm node counts of the outward Numerov solution for each energy.

    base = (h^2/12) 2mu V_eff on the grid, coef = (h^2/12) 2mu, so the
    Numerov g-coefficients are g_i = base_i - coef*E.
    """
    n = base.shape[0]
    counts = np.zeros(energies.shape[0], np.int64)
    for s in range(energies.shape[0]):
        e = energies[s]
        psi0 = 0.0
        psi1 = 1e-10
        g0 = base[0] - coef * e
        g1 = base[1] - coef * e
        cnt = 0
        for i in range(1, n - 1):
            g2 = base[i + 1] - coef * e
            psi2 = ((2.0 + 10.0 * g1) * psi1 - (1.0 - g0) * psi0) / (1.0 - g2)
            if psi2 * psi1 < 0.0:
                cnt += 1
            if abs(psi2) > 1e250:
                psi1 *= 1e-250
                psi2 *= 1e-250
            psi0 = psi1
            psi1 = psi2
            g0 = g1
            g1 = g2
        counts[s] = cnt
    return counts


@njit(cache=True)
def _march_outward(base, coef, e, i_stop):
    """Outward Numerov march storing psi up to index i_stop inclusive."""
    psi = np.zeros(i_stop + 1)
    psi[0] = 0.0
    psi[1] = 1e-10
    g0 = base[0] - coef * e
    g1 = base[1] - coef * e
    for i in range(1, i_stop):
        g2 = base[i + 1] - coef * e
        psi[i + 1] = ((2.0 + 10.0 * g1) * psi[i] - (1.0 - g0) * psi[i - 1]) / (1.0 - g2)
        if abs(psi[i + 1]) > 1e250:
            for j in range(i + 2):
                psi[j] *= 1e-250
        g0 = g1
        g1 = g2
    return psi


@njit(cache=True)
def _march_inward(base, coef, e, i_start, i_stop):
    """Inward Numerov march from i_start down to i_stop (both inclusive)."""
    n = base.shape[0]
    psi = np.zeros(n)
    psi[i_start] = 0.0
    if i_start < n - 1:
        psi[i_start] = 0.0
    psi[i_start - 1] = 1e-10
    g2 = base[i_start] - coef * e
    g1 = base[i_start - 1] - coef * e
    for i in range(i_start - 1, i_stop, -1):
        g0 = base[i - 1] - coef * e
        psi[i - 1] = ((2.0 + 10.0 * g1) * psi[i] - (1.0 - g2) * psi[i + 1]) / (1.0 - g0)
        if abs(psi[i - 1]) > 1e250:
            for j in range(i - 1, i_start + 1):
                psi[j] *= 1e-250
        g2 = g1
        g1 = g0
    return psi


@njit(cache=True)
def _march_full_batch(base_batch, coef, energies):
    """Outward Numerov over the whole grid for a batch of (V_eff, E) rows.

    base_batch has one row per state (centrifugal term already included).
    Rows start at 1e-150 so barrier growth stays far from overflow; the
    caller rescales via asymptotic matching.
    """
    n_states, n = base_batch.shape
    out = np.zeros((n_states, n))
    for s in range(n_states):
        e = energies[s]
        out[s, 0] = 0.0
        out[s, 1] = 1e-150
        g0 = base_batch[s, 0] - coef * e
        g1 = base_batch[s, 1] - coef * e
        for i in range(1, n - 1):
            g2 = base_batch[s, i + 1] - coef * e
            out[s, i + 1] = ((2.0 + 10.0 * g1) * out[s, i]
                             - (1.0 - g0) * out[s, i - 1]) / (1.0 - g2)
            if abs(out[s, i + 1]) > 1e250:
                for j in range(i + 2):
                    out[s, j] *= 1e-250
            g0 = g1
            g1 = g2
    return out


# ---------------------------------------------------------------------------
# states

@dataclass(frozen=True)
class VibrationalState:
    nu: int
    j: int
    energy: float                 # au, on the curve's own energy scale
    r: np.ndarray
    radial_fn: np.ndarray         # unit normalized

    def overlap_grid(self, other):
        if self.r.shape != other.r.shape or not np.array_equal(self.r, other.r):
            raise GridMismatch("states live on different radial grids")


@dataclass(frozen=True)
class ContinuumState:
    energy: float                 # au above the curve asymptote
    j: int
    r: np.ndarray
    radial_fn: np.ndarray         # energy normalized


def _effective_potential(curve, j, r):
    v = np.asarray(curve(r), dtype=float)
    if j > 0:
        v = v + j * (j + 1) / (2.0 * curve.reduced_mass * r**2)
    return v


def solve_bound(curve, j, grid, e_tol=1e-11, nu_max=None):
    """All bound levels of the curve below its asymptote, lowest first.

    Sturm node counting brackets each eigenvalue exactly; bisection then
    narrows the bracket to ``e_tol``.  The eigenfunctions are assembled from
    outward and inward marches glued at the outer classical turning point.

    Raises NoBoundStates when the well holds none, and GridTooCoarse when
    the bound-state count changes under 2x grid refinement.
    """
    r = np.asarray(grid, dtype=float)
    h = _check_uniform(r)
    v = _effective_potential(curve, j, r)
    mu = curve.reduced_mass
    coef = (h * h / 12.0) * 2.0 * mu
    base = coef * v

    e_top = curve.asymptote - 1e-10
    v_min = float(v.min())
    if v_min >= e_top:
        raise NoBoundStates("potential has no well below its asymptote")

    n_bound = int(_count_nodes_batch(base, coef, np.array([e_top]))[0])
    if n_bound == 0:
        raise NoBoundStates("no bound level below the asymptote on this grid")

    # consistency of the count under 2x refinement
    r2 = np.linspace(r[0], r[-1], 2 * r.size - 1)
    h2 = r2[1] - r2[0]
    coef2 = (h2 * h2 / 12.0) * 2.0 * mu
    base2 = coef2 * _effective_potential(curve, j, r2)
    n_bound2 = int(_count_nodes_batch(base2, coef2, np.array([e_top]))[0])
    if n_bound2 != n_bound:
        raise GridTooCoarse(
            f"bound-state count changed under refinement: {n_bound} vs {n_bound2}")

    if nu_max is not None:
        n_bound = min(n_bound, nu_max + 1)

    # simultaneous bisection: for each nu find E where the node count first
    # exceeds nu (that crossing is the eigenvalue)
    lo = np.full(n_bound, v_min + 1e-12)
    hi = np.full(n_bound, e_top)
    target = np.arange(1, n_bound + 1)
    while np.max(hi - lo) > e_tol:
        mid = 0.5 * (lo + hi)
        cnt = _count_nodes_batch(base, coef, mid)
        above = cnt >= target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    e_vals = 0.5 * (lo + hi)

    states = []
    for nu in range(n_bound):
        e = float(e_vals[nu])
        allowed = np.nonzero(v <= e)[0]
        i_match = int(allowed[-1])
        i_match = min(i_match + 2, r.size - 3)
        psi_out = _march_outward(base, coef, e, i_match + 1)

        # start the inward march where the tunneling tail is ~e^-250 deep
        kappa = np.sqrt(np.maximum(2.0 * mu * (v - e), 0.0))
        action = np.concatenate(([0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1]) * h)))
        action = action - action[i_match]
        deep = np.nonzero(action > 250.0)[0]
        i_start = int(deep[0]) if deep.size else r.size - 1
        i_start = max(i_start, i_match + 4)
        psi_in = _march_inward(base, coef, e, i_start, i_match - 1)

        psi = np.zeros_like(r)
        scale = psi_out[i_match] / psi_in[i_match]
        psi[:i_match + 1] = psi_out[:i_match + 1]
        psi[i_match + 1:] = psi_in[i_match + 1:] * scale
        norm = np.sqrt(np.trapezoid(psi * psi, r))
        psi /= norm
        # deterministic sign: first appreciable lobe positive
        first = np.nonzero(np.abs(psi) > 1e-3 * np.max(np.abs(psi)))[0][0]
        if psi[first] < 0:
            psi = -psi
        states.append(VibrationalState(nu, j, e, r, psi))
    return states


def solve_continuum(curve, energy, j, grid):
    """Energy-normalized continuum state at ``energy`` above the asymptote."""
    if energy <= 0.0:
        raise EnergyBelowAsymptote(f"continuum energy {energy} not above asymptote")
    psi = solve_continuum_batch(curve, np.array([energy]), j, grid)[0]
    return ContinuumState(float(energy), j, np.asarray(grid, dtype=float), psi)


def solve_continuum_batch(curve, energies, j, grid):
    """Batch of continuum radial functions, one row per energy above the
    asymptote; each is matched to free spherical waves over the grid tail
    and rescaled to the energy-normalized asymptotic amplitude
    sqrt(2 mu / (pi k))."""
    r = np.asarray(grid, dtype=float)
    h = _check_uniform(r)
    energies = np.asarray(energies, dtype=float)
    if np.any(energies <= 0.0):
        raise EnergyBelowAsymptote("all continuum energies must be above the asymptote")
    mu = curve.reduced_mass
    v = _effective_potential(curve, j, r)
    coef = (h * h / 12.0) * 2.0 * mu
    base = np.broadcast_to(coef * v, (energies.size, r.size)).copy()
    e_abs = curve.asymptote + energies
    psi = _march_full_batch(base, coef, e_abs)

    # least-squares match psi ~ c1*S_j(kR) + c2*C_j(kR) over the last 10%
    n_tail = max(64, r.size // 10)
    rt = r[-n_tail:]
    k = np.sqrt(2.0 * mu * energies)
    x = k[:, None] * rt[None, :]
    s_w = x * spherical_jn(j, x)
    c_w = -x * spherical_yn(j, x)
    pt = psi[:, -n_tail:]
    s_s = np.sum(s_w * s_w, axis=1)
    s_c = np.sum(s_w * c_w, axis=1)
    c_c = np.sum(c_w * c_w, axis=1)
    p_s = np.sum(pt * s_w, axis=1)
    p_c = np.sum(pt * c_w, axis=1)
    det = s_s * c_c - s_c * s_c
    c1 = (p_s * c_c - p_c * s_c) / det
    c2 = (p_c * s_s - p_s * s_c) / det
    amp = np.hypot(c1, c2)
    target = np.sqrt(2.0 * mu / (np.pi * k))
    psi *= (target / amp)[:, None]
    return psi


def franck_condon(a, b):
    """Radial overlap of two unit-normalized states on the shared grid."""
    a.overlap_grid(b)
    return float(np.trapezoid(a.radial_fn * b.radial_fn, a.r))


# ---------------------------------------------------------------------------
# assembled molecular data

#: shipped defaults for the three curves (config values, not ground truth)
DEFAULT_NEUTRAL = dict(d_e=0.1745, r_e=1.401, a=1.0205)
DEFAULT_ION = dict(d_e=0.10253, r_e=2.0, a=0.68)
DEFAULT_SIGMA_U = dict(amplitude=1.465, decay_length=1.348, asymptote=0.10253)
DEFAULT_IP_VERTICAL = 0.58


@dataclass(frozen=True)
class MolecularData:
    """Immutable bundle of curves, bound ladders and Franck-Condon table.

    The energy origin is the ionic bound-curve minimum.  ``e_i[m]`` is the
    total energy of neutral member m (vibrational level m of D2), i.e.
    ``(E_m - E_0)_neutral - ip_vertical``; the state-to-state ionization
    potentials are ``i_p(n, m) = ion_energies[n] - e_i[m]``.
    """

    grid: np.ndarray
    neutral_curve: PotentialCurve
    ion_curve: PotentialCurve
    sigma_u_curve: PotentialCurve
    neutral_states: tuple
    ion_states: tuple
    fc_matrix: np.ndarray          # (n_ion, n_neutral)
    ip_vertical: float

    @property
    def d2_ground(self):
        return self.neutral_states[0]

    @property
    def ion_energies(self):
        return np.array([s.energy for s in self.ion_states])

    @property
    def neutral_energies(self):
        return np.array([s.energy for s in self.neutral_states])

    @property
    def e_i(self):
        en = self.neutral_energies
        return (en - en[0]) - self.ip_vertical

    @property
    def fc_table(self):
        """Overlaps of the ion ladder with the neutral ground state."""
        return self.fc_matrix[:, 0]

    def i_p(self, n, member=0):
        return self.ion_states[n].energy - self.e_i[member]

    def i_p_ladder(self, member=0):
        return self.ion_energies - self.e_i[member]

    def dissociation_energy(self, e_total, n):
        """Energy deposited into channel n for total continuum energy
        ``e_total`` on the common origin."""
        return e_total - self.ion_states[n].energy

    @property
    def u_asymptote(self):
        return self.sigma_u_curve.asymptote

    def total_energy(self, e_release):
        """Common-origin continuum energy for an asymptotic release energy."""
        return self.u_asymptote + np.asarray(e_release, dtype=float)

    def continuum(self, e_release, j):
        return solve_continuum(self.sigma_u_curve, e_release, j, self.grid)

    def continuum_batch(self, e_release, j):
        return solve_continuum_batch(self.sigma_u_curve, e_release, j, self.grid)


def build_molecular_data(neutral_curve=None, ion_curve=None, sigma_u_curve=None,
                         grid=None, ip_vertical=DEFAULT_IP_VERTICAL,
                         n_neutral=4):
    """Build the immutable MolecularData bundle from curves and a grid.

    Without arguments this uses the shipped Morse / exponential-repulsive
    defaults, which put the neutral fundamental at 0.0135 au and the
    vertical bound-to-repulsive gap at the few-eV scale.
    """
    if grid is None:
        grid = radial_grid()
    grid = np.asarray(grid, dtype=float)
    if neutral_curve is None:
        p = DEFAULT_NEUTRAL
        neutral_curve = PotentialCurve.morse(p["d_e"], p["r_e"], p["a"],
                                             v_inf=p["d_e"])
    if ion_curve is None:
        p = DEFAULT_ION
        ion_curve = PotentialCurve.morse(p["d_e"], p["r_e"], p["a"],
                                         v_inf=p["d_e"])
    if sigma_u_curve is None:
        p = DEFAULT_SIGMA_U
        sigma_u_curve = PotentialCurve.repulsive(p["amplitude"],
                                                 p["decay_length"],
                                                 p["asymptote"])
    for curve in (neutral_curve, ion_curve, sigma_u_curve):
        curve.check_asymptote(grid[-1])

    neutral_states = solve_bound(neutral_curve, 0, grid, nu_max=n_neutral - 1)
    ion_states = solve_bound(ion_curve, 0, grid)
    fc = np.empty((len(ion_states), len(neutral_states)))
    for n, ion_state in enumerate(ion_states):
        for m, neutral_state in enumerate(neutral_states):
            fc[n, m] = franck_condon(ion_state, neutral_state)
    return MolecularData(grid, neutral_curve, ion_curve, sigma_u_curve,
                         tuple(neutral_states), tuple(ion_states), fc,
                         float(ip_vertical))
