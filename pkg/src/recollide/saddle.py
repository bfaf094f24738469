"""Stationary-phase recollision trajectories for a half-cycle field crest.

Within one half cycle the frozen field is a pure cosine, so the problem is
universal in the birth phase theta_b = omega*(t_b - T_n): the return phase
theta_c(theta_b) solves

    cos(theta_b) - cos(theta_c) = (theta_c - theta_b) sin(theta_b),

independent of amplitude and frequency.  Energy matching to a final state
then picks at most two birth phases per half cycle, the short (S) and long
(L) branches.  Volkov phases are evaluated in closed form for the sinusoidal
vector potential, piecewise across half-cycle windows in two-color mode.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import fields as fl
from .errors import NoReturn

#: trajectories with excursion shorter than this (in carrier cycles) are
#: discarded; the free-spreading prefactor diverges at zero travel time
TRAVEL_CUT_CYCLES = 0.05

_THETA_EPS = 1e-9


class Branch(Enum):
    SHORT = "S"
    LONG = "L"


@dataclass(frozen=True)
class Trajectory:
    """One stationary-phase solution attached to a half-cycle event."""

    t_birth: float
    t_return: float
    k_birth: np.ndarray
    branch: Branch
    return_energy: float
    half_cycle: int

    @property
    def travel(self):
        return self.t_return - self.t_birth


# ---------------------------------------------------------------------------
# universal return map

def _return_phase_scalar(theta_b, xtol=1e-13):
    """First return phase theta_c > theta_b for a birth phase in (0, pi/2)."""
    if theta_b < 0.0 or theta_b >= 0.5 * np.pi:
        raise NoReturn(f"birth phase {theta_b} admits no recollision")
    if theta_b < _THETA_EPS:
        return 2.0 * np.pi
    s, c = np.sin(theta_b), np.cos(theta_b)

    def g(theta_c):
        return c - np.cos(theta_c) - (theta_c - theta_b) * s

    lo = np.pi - theta_b + 1e-12
    hi = 2.0 * np.pi
    if g(lo) <= 0.0:  # extremely late birth: root just past pi - theta_b
        lo = theta_b + 1e-12
    return brentq(g, lo, hi, xtol=xtol, rtol=8.9e-16)


class ReturnMap:
    """Dense spline of the universal return map and its derivative."""

    def __init__(self, n_nodes=3000):
        tb = np.linspace(0.0, 0.5 * np.pi * (1.0 - 1e-9), n_nodes)
        tc = np.empty_like(tb)
        tc[0] = 2.0 * np.pi
        for i in range(1, tb.size):
            tc[i] = _return_phase_scalar(tb[i])
        # limit theta_c -> theta_b as theta_b -> pi/2
        self._spline = CubicSpline(tb, tc)
        self.theta_max = tb[-1]

    def theta_c(self, theta_b):
        return self._spline(theta_b)

    def dtheta_c(self, theta_b):
        """d theta_c / d theta_b from the implicit return condition."""
        tc = self._spline(theta_b)
        num = (tc - theta_b) * np.cos(theta_b)
        den = np.sin(tc) - np.sin(theta_b)
        return num / den

    def travel(self, theta_b):
        return self._spline(theta_b) - theta_b

    def theta_travel_cut(self, travel_rad):
        """Birth phase where the excursion drops to ``travel_rad``."""
        f = lambda tb: self.travel(tb) - travel_rad
        return brentq(f, 1e-6, self.theta_max - 1e-9, xtol=1e-12)


_RETURN_MAP = None


def return_map():
    """Shared lazily-built ReturnMap instance."""
    global _RETURN_MAP
    if _RETURN_MAP is None:
        _RETURN_MAP = ReturnMap()
    return _RETURN_MAP


def return_time(field, t_b, xtol=1e-13):
    """First recollision time for a birth time inside some half cycle.

    The birth phase must fall in the returning quarter cycle after a crest;
    otherwise NoReturn is raised.
    """
    w = field.omega
    n = int(np.floor(t_b * w / np.pi + 1e-15))
    theta_b = t_b * w - n * np.pi
    if theta_b >= 0.5 * np.pi - 1e-12:
        raise NoReturn(f"birth phase {theta_b:.6f} rad admits no recollision")
    theta_c = _return_phase_scalar(theta_b, xtol=xtol)
    return (n * np.pi + theta_c) / w


def max_return_energy(field, n_scan=4000):
    """Maximum recollision kinetic energy over birth phase, in au.

    The classical plateau edge: about 3.17 ponderomotive energies.
    """
    rmap = return_map()
    tb = np.linspace(1e-6, rmap.theta_max, n_scan)
    tc = rmap.theta_c(tb)
    a = field.e0 / field.omega
    e_ret = 0.5 * a * a * (np.sin(tb) - np.sin(tc)) ** 2
    i = int(np.argmax(e_ret))
    # parabolic refinement around the scan maximum
    if 0 < i < n_scan - 1:
        y0, y1, y2 = e_ret[i - 1], e_ret[i], e_ret[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom != 0.0:
            dt = 0.5 * (y0 - y2) / denom * (tb[1] - tb[0])
            tbb = tb[i] + dt
            tcc = rmap.theta_c(tbb)
            return max(float(e_ret[i]),
                       0.5 * a * a * float((np.sin(tbb) - np.sin(tcc)) ** 2))
    return float(e_ret[i])


def peak_recollision_momentum(field):
    """sqrt(2 * max return energy) for the field, in au."""
    return np.sqrt(2.0 * max_return_energy(field))


def dominant_travel_time(field, i_p, n_quad=4000):
    """Ionization-weighted mean excursion time of returning trajectories, au.

    The weight is the launch probability of each birth phase: the squared
    quasi-static ionization amplitude at the birth field |e0 cos(theta_b)|
    times the squared instantaneous-field factor.  This is the pump-dump
    delay associated with the recollision probe (~3/4 cycle).
    """
    rmap = return_map()
    tb = np.linspace(1e-4, rmap.theta_max - 1e-6, n_quad)
    travel = rmap.travel(tb)
    e_birth = field.e0 * np.cos(tb)
    expo = -2.0 * ((2.0 * i_p) ** 1.5) / (3.0 * e_birth)
    expo -= expo.max()  # weights are relative
    w = np.exp(expo) * np.sqrt(2.0 / (i_p * e_birth**2)) * np.cos(tb) ** 2
    return float(np.trapezoid(w * travel, tb) / np.trapezoid(w, tb) / field.omega)


# ---------------------------------------------------------------------------
# final-state matching

def _deposit_curve(theta_b, a_loc, k_par, rmap):
    """Energy available for molecular excitation at birth phase theta_b.

    a_loc is the signed local vector-potential amplitude e_loc/omega of the
    event; k_par the final momentum component along the polarization axis.
    Roots of this curve minus (D + k_perp^2/2) are the branch solutions.
    """
    tc = rmap.theta_c(theta_b)
    u = a_loc * np.sin(tc)
    e_ret = 0.5 * (a_loc * np.sin(theta_b) - u) ** 2
    return e_ret - 0.5 * (k_par - u) ** 2


def solve_final_state(field, event, k_f, e_total, n, molecular,
                      n_scan=200, xtol=1e-13):
    """Short/long trajectories feeding channel (E, n) at final momentum k_f.

    Solves the energy-matching condition jointly with the return condition
    by a bracketed scan over birth phase (n_scan points per half cycle)
    followed by root refinement.  Returns 0, 1 or 2 trajectories; an empty
    list means the final state is classically forbidden for this event.
    """
    rmap = return_map()
    w = field.omega
    e_loc = event.local_amplitude
    a_loc = e_loc / w
    k_f = np.asarray(k_f, dtype=float)
    k_par = k_f[0]
    k_perp2 = k_f[1] ** 2 + k_f[2] ** 2
    d_en = molecular.dissociation_energy(e_total, n)
    c = d_en + 0.5 * k_perp2

    travel_cut = TRAVEL_CUT_CYCLES * 2.0 * np.pi
    theta_hi = rmap.theta_travel_cut(travel_cut)
    thetas = np.linspace(1e-6, theta_hi, n_scan)
    f_vals = _deposit_curve(thetas, a_loc, k_par, rmap) - c

    roots = []
    sign = np.sign(f_vals)
    crossings = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in crossings:
        root = brentq(lambda tb: float(_deposit_curve(tb, a_loc, k_par, rmap) - c),
                      thetas[i], thetas[i + 1], xtol=xtol, rtol=8.9e-16)
        roots.append(root)
    for i in np.nonzero(f_vals == 0.0)[0]:
        roots.append(float(thetas[i]))
    if not roots:
        return []
    roots = sorted(roots)
    if len(roots) > 2:
        roots = [roots[0], roots[-1]]  # outermost pair: long and short

    out = []
    labels = [Branch.LONG, Branch.SHORT] if len(roots) == 2 else None
    for idx, theta_b in enumerate(roots):
        # polish theta_c at full precision for this exact birth phase
        theta_c = _return_phase_scalar(theta_b, xtol=xtol)
        travel = (theta_c - theta_b) / w
        t_b = event.t_peak + theta_b / w
        t_c = event.t_peak + theta_c / w
        k0x = a_loc * np.sin(theta_b)
        e_ret = 0.5 * a_loc**2 * (np.sin(theta_b) - np.sin(theta_c)) ** 2
        if labels is None:
            # single root: label by excursion relative to the curve maximum
            peak = thetas[np.argmax(_deposit_curve(thetas, a_loc, k_par, rmap))]
            branch = Branch.SHORT if theta_b > peak else Branch.LONG
        else:
            branch = labels[idx]
        out.append(Trajectory(t_b, t_c, np.array([k0x, 0.0, 0.0]), branch,
                              float(e_ret), event.index))
    return out


# ---------------------------------------------------------------------------
# Volkov phases

def _segment_volkov(k_x, k2, amp, omega, t1, t2):
    """(1/2) int_{t1}^{t2} |k + A|^2 for A_x = -(amp/omega) sin(omega t)."""
    ia = (amp / omega**2) * (np.cos(omega * t2) - np.cos(omega * t1))
    ia2 = (amp**2 / omega**2) * (0.5 * (t2 - t1)
                                 - (np.sin(2 * omega * t2)
                                    - np.sin(2 * omega * t1)) / (4 * omega))
    return 0.5 * k2 * (t2 - t1) + k_x * ia + 0.5 * ia2


def event_volkov_phase(k, t1, t2, field, event):
    """Volkov phase with the envelope frozen at the event crest throughout.

    Used for the intermediate propagation birth -> recollision, where the
    stationary-phase equations themselves are solved with the frozen field.
    """
    k = np.asarray(k, dtype=float)
    amp = field.e0 * float(field.envelope(np.asarray(event.t_peak)))
    return float(_segment_volkov(k[0], k @ k, amp, field.omega, t1, t2))


def volkov_phase(k, t1, t2, field, integrals=None):
    """(1/2) int |k + A(tau)|^2 dtau with the piecewise-frozen envelope.

    Closed form per half-cycle window; exact for monochromatic fields.
    ``integrals`` may pass a prebuilt fields.FieldIntegrals to reuse.
    """
    if t2 < t1:
        raise ValueError("t2 must not precede t1")
    k = np.asarray(k, dtype=float)
    if integrals is None:
        integrals = fl.FieldIntegrals(field)
    ia = integrals.ia(t2) - integrals.ia(t1)
    ia2 = integrals.ia2(t2) - integrals.ia2(t1)
    return float(0.5 * (k @ k) * (t2 - t1) + k[0] * ia + 0.5 * ia2)


def total_phase(traj, k_f, e_total, n, t, t0, field, molecular, integrals=None,
                member=0):
    """Accumulated phase of one trajectory's contribution at observation
    time t: final Volkov leg, final-state energy evolution, intermediate
    Volkov leg, channel energy during the excursion, and the initial-state
    energy since t0.  The t-dependent pieces are common to every pathway
    on the same (E, k_f) shell and drop out of yields."""
    k_f = np.asarray(k_f, dtype=float)
    e_n = molecular.ion_states[n].energy
    e_i = molecular.e_i[member]
    if integrals is None:
        integrals = fl.FieldIntegrals(field)
    event = fl.half_cycle_events(field)[traj.half_cycle]
    phase = -volkov_phase(k_f, traj.t_return, t, field, integrals)
    phase -= e_total * (t - traj.t_return)
    phase -= event_volkov_phase(traj.k_birth, traj.t_birth, traj.t_return,
                                field, event)
    phase -= e_n * (traj.t_return - traj.t_birth)
    phase -= e_i * (traj.t_birth - t0)
    return float(phase)
