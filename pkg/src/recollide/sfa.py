"""Stationary-phase strong-field amplitude for dissociative recollision.

Assembles the coherent sum over initial superposition members, vibrational
channels, short/long trajectory branches and half-cycle ionization events
on a cylindrical final-momentum grid, and reduces it to fragment spectra,
total yields, phase-control scans and coincidence maps.

The per-event problem is universal in the birth phase (see saddle), so the
engine groups events into amplitude classes, solves each class's branch
roots for the whole (E, channel, k_f) block at once, and then evaluates
every amplitude factor exactly at the polished roots.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import fields as fl
from . import impact as imp
from . import saddle as sd
from .errors import SliceOutOfRange, TravelTooShort, ZeroField
from .spectra import (AmplitudeGrid, KfGrid, SpectrumGrids, SpectrumResult,
                      _trapezoid_weights)


@dataclass(frozen=True)
class InitialSuperposition:
    """Coherent superposition of neutral vibrational levels Sum C_i |nu_i>."""

    members: tuple  # ((nu, complex coeff), ...)

    def __post_init__(self):
        norm = math.sqrt(sum(abs(c) ** 2 for _, c in self.members))
        if norm == 0.0:
            raise ValueError("superposition has zero norm")
        object.__setattr__(
            self, "members",
            tuple((int(nu), complex(c) / norm) for nu, c in self.members))

    @staticmethod
    def single(nu):
        return InitialSuperposition(((nu, 1.0),))

    @staticmethod
    def two_state(phi, nu_a=0, nu_b=1):
        """|nu_a> + e^{i phi} |nu_b>, normalized."""
        return InitialSuperposition(((nu_a, 1.0), (nu_b, np.exp(1j * phi))))

    @property
    def nus(self):
        return [nu for nu, _ in self.members]

    @property
    def coeffs(self):
        return np.array([c for _, c in self.members])


def ionization_prefactor(i_p, e_at_birth):
    """Quasi-static tunneling amplitude at ionization potential i_p and
    instantaneous field strength |e_at_birth|."""
    if i_p <= 0:
        raise ValueError("ionization potential must be positive")
    e_abs = abs(e_at_birth)
    if e_abs == 0.0:
        raise ZeroField("zero instantaneous field in ionization prefactor")
    return (math.sqrt(math.pi) * (2.0 / (i_p * e_abs**2)) ** 0.25
            * math.exp(-((2.0 * i_p) ** 1.5) / (3.0 * e_abs)))


def spreading_prefactor(travel, min_travel=0.0):
    """Free-spreading factor e^{-i 3pi/4} (2 pi / travel)^{3/2}."""
    if travel <= min_travel or travel <= 0.0:
        raise TravelTooShort(f"travel time {travel} below cutoff {min_travel}")
    return np.exp(-0.75j * np.pi) * (2.0 * np.pi / travel) ** 1.5


def select_channels(molecular, members=(0, 1), e_birth=0.065, cut=0.02):
    """Ionic vibrational channels with non-negligible launch weight.

    Weight per channel: Franck-Condon overlap times the tunneling
    exponential, maximized over the requested neutral members; channels
    below ``cut`` relative weight are dropped.
    """
    weights = np.zeros(len(molecular.ion_states))
    for m in members:
        i_p = molecular.i_p_ladder(m)
        w = np.abs(molecular.fc_matrix[:, m]) * np.exp(
            -((2.0 * i_p) ** 1.5) / (3.0 * e_birth))
        weights = np.maximum(weights, w)
    weights /= weights.max()
    return [int(n) for n in np.nonzero(weights > cut)[0]]


# ---------------------------------------------------------------------------
# event-level scalar assembly (reference path; the engine vectorizes this)

def event_amplitude(traj, n, e_total, j, k_f, field, molecular, model,
                    member=0, t_obs=None, t0=0.0, integrals=None):
    """Complex contribution of one trajectory to channel (E, J) at k_f.

    Product of the stationary-phase exponential, the spreading and
    tunneling prefactors, the instantaneous-field temporal factor, the
    impact matrix element at the recollision geometry and the
    Franck-Condon factor of the requested neutral member.
    """
    if t_obs is None:
        t_obs = field.duration
    k_f = np.asarray(k_f, dtype=float)
    event = fl.half_cycle_events(field)[traj.half_cycle]
    e_n = molecular.ion_states[n].energy
    e_i = molecular.e_i[member]
    i_p = e_n - e_i

    e_birth = event.effective_e0 * math.cos(field.omega * traj.t_birth)
    a_i = ionization_prefactor(i_p, e_birth)
    a_p = spreading_prefactor(traj.travel)
    temporal = e_birth / field.e0

    phase = sd.total_phase(traj, k_f, e_total, n, t_obs, t0, field, molecular,
                           integrals, member=member)

    a_cx = fl.vector_potential(field, traj.t_return)[0]
    k_i = traj.k_birth + np.array([a_cx, 0.0, 0.0])
    e_release = e_total - molecular.u_asymptote
    m_ee = imp.vee_matrix_element(model, molecular, e_release, j, n, k_i, k_f)
    fc = molecular.fc_matrix[n, member]
    return np.exp(1j * phase) * a_p * a_i * temporal * m_ee * fc


# ---------------------------------------------------------------------------
# vectorized branch-root solver

_N_THETA_SCAN = 512


def _legendre_odd(x, j_list):
    """Legendre polynomials of the requested odd orders, by recurrence."""
    out = []
    p_prev = np.ones_like(x)
    p = x.copy()
    order = 1
    j_max = max(j_list)
    while order <= j_max:
        if order in j_list:
            out.append(p.copy())
        p_next = ((2 * order + 1) * x * p - order * p_prev) / (order + 1)
        p_prev, p = p, p_next
        order += 1
    return out


def _class_scan(a_loc, rmap, omega):
    """Universal-theta scan arrays for a canonical amplitude a_loc = e/omega."""
    travel_cut = sd.TRAVEL_CUT_CYCLES * 2.0 * np.pi
    theta_hi = rmap.theta_travel_cut(travel_cut)
    thetas = np.linspace(1e-6, theta_hi, _N_THETA_SCAN)
    tc = rmap.theta_c(thetas)
    u = a_loc * np.sin(tc)
    e_ret = 0.5 * (a_loc * np.sin(thetas) - u) ** 2
    return thetas, u, e_ret


def _detect_roots(thetas, u, e_ret, k_par, c_flat):
    """Bracket cells of the outermost (long, short) roots per (k_par, c).

    Returns two int arrays (nK, nC) of left bracket indices (-1 = no root).
    """
    n_c = c_flat.size
    n_k = k_par.size
    cell_lo = np.full((n_k, n_c), -1, dtype=np.int32)
    cell_hi = np.full((n_k, n_c), -1, dtype=np.int32)
    big = np.iinfo(np.int32).max
    for ik in range(n_k):
        psi = e_ret - 0.5 * (k_par[ik] - u) ** 2
        dpsi = np.diff(psi)
        turns = np.nonzero(dpsi[1:] * dpsi[:-1] < 0.0)[0] + 1
        bounds = np.concatenate(([0], turns, [psi.size - 1]))
        lo = np.full(n_c, big, dtype=np.int32)
        hi = np.full(n_c, -1, dtype=np.int32)
        for s in range(bounds.size - 1):
            i0, i1 = int(bounds[s]), int(bounds[s + 1])
            if i1 <= i0:
                continue
            seg = psi[i0:i1 + 1]
            if seg[-1] >= seg[0]:
                pos = np.searchsorted(seg, c_flat, side="left")
            else:
                pos = seg.size - np.searchsorted(seg[::-1], c_flat, side="right")
            valid = (pos > 0) & (pos < seg.size)
            cells = np.where(valid, i0 + pos - 1, -1).astype(np.int32)
            lo = np.where(valid & (cells < lo), cells, lo)
            hi = np.where(valid & (cells > hi), cells, hi)
        found = hi >= 0
        cell_lo[ik] = np.where(found, np.minimum(lo, hi), -1)
        cell_hi[ik] = np.where(found, hi, -1)
    return cell_lo, cell_hi


def _polish_roots(cells, thetas, a_loc, k_par_v, c_v, rmap,
                  n_bisect=10, n_newton=3):
    """Refine bracketed roots of the deposit curve (compressed cells).

    All inputs are 1-d arrays over valid cells only.  Vectorized bisection
    followed by clipped Newton steps using the analytic derivative of the
    return map.  Returns (theta_b, theta_c, good_mask).
    """
    lo = thetas[cells]
    hi = thetas[np.minimum(cells + 1, thetas.size - 1)]

    def f_of(th):
        tc = rmap.theta_c(th)
        u = a_loc * np.sin(tc)
        return 0.5 * (a_loc * np.sin(th) - u) ** 2 \
            - 0.5 * (k_par_v - u) ** 2 - c_v, tc, u

    f_lo, _, _ = f_of(lo)
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        f_mid, _, _ = f_of(mid)
        take_lo = (f_mid * f_lo) > 0.0
        lo = np.where(take_lo, mid, lo)
        f_lo = np.where(take_lo, f_mid, f_lo)
        hi = np.where(take_lo, hi, mid)
    th = 0.5 * (lo + hi)
    for _ in range(n_newton):
        f, tc, u = f_of(th)
        sin_th = np.sin(th)
        cos_th = np.cos(th)
        with np.errstate(divide="ignore", invalid="ignore"):
            dtc = (tc - th) * cos_th / (np.sin(tc) - sin_th)
            du = a_loc * np.cos(tc) * dtc
            df = ((a_loc * sin_th - u) * (a_loc * cos_th - du)
                  + (k_par_v - u) * du)
            step = f / df
        step = np.where(np.isfinite(step), step, 0.0)
        th = np.clip(th - step, lo, hi)
    f, tc, _ = f_of(th)
    good = np.abs(f) < 1e-8 * np.maximum(np.abs(c_v), 1e-3)
    return th, tc, good


# ---------------------------------------------------------------------------
# the engine

class RecollisionEngine:
    """Grid evaluator of the coherent dissociative-recollision amplitude.

    Precomputes the molecular channel data, impact radial tables and field
    integrals once; ``member_amplitudes`` then returns the complex
    amplitude grid of each requested neutral member so that superpositions
    and phase scans are cheap linear recombinations.
    """

    def __init__(self, field, molecular, model, grids=None, channels=None,
                 channel_cut=0.02, members=(0, 1), threads=1, tables=None):
        self.field = field
        self.molecular = molecular
        self.model = model
        self.grids = grids if grids is not None else SpectrumGrids.default()
        if channels is None:
            channels = select_channels(molecular, members, field.e0, channel_cut)
        self.channels = channels
        self.threads = max(1, int(threads))
        self.events = fl.half_cycle_events(field)
        self.integrals = fl.FieldIntegrals(field)
        self.rmap = sd.return_map()
        if tables is not None and list(tables.channels) == list(channels) \
                and tables.e_release_grid.shape == self.grids.e_release.shape \
                and np.allclose(tables.e_release_grid, self.grids.e_release):
            self.tables = tables
        else:
            self.tables = imp.ImpactTables(model, molecular,
                                           self.grids.e_release, channels)
        self.j_list = model.j_list
        self._e_total = molecular.total_energy(self.grids.e_release)
        self._e_chan = molecular.ion_energies[channels]
        # deposit offsets c = D + k_perp^2/2 flattened over (E, chan, perp)
        kperp = self.grids.kf.k_perp
        d = self._e_total[:, None] - self._e_chan[None, :]
        self._c_block = d[:, :, None] + 0.5 * kperp[None, None, :] ** 2

    # -- roots ---------------------------------------------------------------

    def _solve_channel_roots(self, e_abs, ich, scan):
        """Compressed branch roots for canonical amplitude e_abs, channel ich.

        Returns dict branch -> (flat_idx, theta_b, theta_c) where flat_idx
        runs over the raveled (nE, nK, nPerp) grid; only cells with a
        trajectory appear.
        """
        thetas, u, e_ret = scan
        a_loc = e_abs / self.field.omega
        k_par = self.grids.kf.k_par
        n_e, _, n_p = self._c_block.shape
        n_k = k_par.size
        c_flat = np.ascontiguousarray(self._c_block[:, ich, :]).reshape(-1)
        cell_lo, cell_hi = _detect_roots(thetas, u, e_ret, k_par, c_flat)
        # single-root cells: keep only the short slot
        cell_lo = np.where(cell_lo == cell_hi, -1, cell_lo)

        out = {}
        for name, cells in (("L", cell_lo), ("S", cell_hi)):
            # detection order (k, E, perp) -> grid order (E, k, perp)
            cells_g = cells.reshape(n_k, n_e, n_p).transpose(1, 0, 2).reshape(-1)
            flat_idx = np.nonzero(cells_g >= 0)[0]
            if flat_idx.size == 0:
                out[name] = (flat_idx, np.empty(0), np.empty(0))
                continue
            ik = (flat_idx // n_p) % n_k
            ie = flat_idx // (n_k * n_p)
            ip = flat_idx % n_p
            c_v = (self._e_total[ie] - self._e_chan[ich]
                   + 0.5 * self.grids.kf.k_perp[ip] ** 2)
            th_b, th_c, good = _polish_roots(cells_g[flat_idx], thetas, a_loc,
                                             k_par[ik], c_v, self.rmap)
            out[name] = (flat_idx[good], th_b[good], th_c[good])
        return out

    # -- assembly ------------------------------------------------------------

    def _event_channel_contribution(self, event, roots_ch, branch, ich,
                                    members, t_obs):
        """Compressed per-member contributions of one (event, branch,
        channel): returns (flat_idx, ie, {member: [values per J]})."""
        field = self.field
        w = field.omega
        e_loc = event.local_amplitude
        sigma = 1.0 if e_loc >= 0 else -1.0
        a_abs = abs(e_loc) / w
        flat_idx, th_b, th_c = roots_ch[branch]
        n_k = self.grids.kf.k_par.size
        n_p = self.grids.kf.k_perp.size
        if flat_idx.size == 0:
            return flat_idx, flat_idx, {}
        ik = (flat_idx // n_p) % n_k
        ie = flat_idx // (n_k * n_p)
        ip = flat_idx % n_p
        if sigma < 0:  # mirror in k_par for negative local amplitude
            ik = n_k - 1 - ik
            flat_idx = ie * (n_k * n_p) + ik * n_p + ip
        k_par = self.grids.kf.k_par[ik]
        k_perp = self.grids.kf.k_perp[ip]
        kf2 = k_par**2 + k_perp**2
        e_n = self._e_chan[ich]
        n = self.channels[ich]

        with np.errstate(over="ignore", under="ignore"):
            sin_b, cos_b = np.sin(th_b), np.cos(th_b)
            sin_c = np.sin(th_c)
            t_b = event.t_peak + th_b / w
            t_c = event.t_peak + th_c / w
            travel = (th_c - th_b) / w
            k0x = sigma * a_abs * sin_b
            k_ix = sigma * a_abs * (sin_b - sin_c)
            q_x = k_ix - k_par
            q = np.hypot(q_x, k_perp)
            cosg = q_x / np.maximum(q, self.model.q_min)

            # shared phase: final Volkov leg + energy evolution + excursion
            b_amp = event.effective_e0
            ia_c = self.integrals.ia(t_c)
            ia2_c = self.integrals.ia2(t_c)
            ia_obs = float(self.integrals.ia(np.asarray(t_obs)))
            ia2_obs = float(self.integrals.ia2(np.asarray(t_obs)))
            e_tot = self._e_total[ie]
            phase = -(0.5 * kf2 * (t_obs - t_c) + k_par * (ia_obs - ia_c)
                      + 0.5 * (ia2_obs - ia2_c))
            phase -= e_tot * (t_obs - t_c)
            phase -= (0.5 * k0x**2 * travel
                      + k0x * (b_amp / w**2) * (np.cos(w * t_c) - np.cos(w * t_b))
                      + 0.5 * (b_amp**2 / w**2)
                      * (0.5 * travel - (np.sin(2 * w * t_c)
                                         - np.sin(2 * w * t_b)) / (4 * w)))
            phase -= e_n * travel

            a_p_mag = (2.0 * np.pi / travel) ** 1.5
            e_birth = np.abs(e_loc) * cos_b
            temporal = (e_loc / field.e0) * cos_b
            eff = imp.electronic_form_factor(self.model, q)
            kernel = np.where(q >= self.model.q_min,
                              self.model.coupling_norm * 4.0 * np.pi / q**2, 0.0)
            base = a_p_mag * temporal * eff * kernel

            j_factors = _legendre_odd(cosg, self.j_list)
            for idx_j, j in enumerate(self.j_list):
                radial = self.tables.gather(j, ich, ie, q)
                j_factors[idx_j] *= (2 * j + 1) * radial

            out = {}
            front = 1j * np.exp(-0.75j * np.pi)
            for im, member in enumerate(members):
                e_i = self.molecular.e_i[member]
                i_p = e_n - e_i
                a_i = (math.sqrt(math.pi) * (2.0 / (i_p * e_birth**2)) ** 0.25
                       * np.exp(-((2.0 * i_p) ** 1.5) / (3.0 * e_birth)))
                fc = self.molecular.fc_matrix[n, member]
                g = np.exp(1j * (phase - e_i * t_b)) * (base * a_i * fc * front)
                out[im] = [g * jf for jf in j_factors]
        return flat_idx, ie, out

    def member_amplitudes(self, members=(0, 1), events=None, t_obs=None,
                          split_branches=False):
        """Complex amplitude grids per member.

        Returns an array of shape (nMembers, nE, nJ, nPar, nPerp), or with
        an extra leading branch axis of size 2 (L, S) when
        ``split_branches`` is set.  ``events`` restricts the coherent sum to
        a subset of half-cycle event indices (single-event runs use [0]).
        """
        if t_obs is None:
            t_obs = self.field.duration
        ev_list = self.events if events is None else [self.events[i] for i in events]
        n_e = self.grids.e_release.size
        n_j = len(self.j_list)
        n_k = self.grids.kf.k_par.size
        n_p = self.grids.kf.k_perp.size
        n_kp = n_k * n_p
        shape = (2 if split_branches else 1, len(members), n_e, n_j, n_kp)
        amp = np.zeros(shape, dtype=np.complex128)

        # group events into classes of equal |local amplitude|
        classes = {}
        for ev in ev_list:
            key = round(abs(ev.local_amplitude), 14)
            classes.setdefault(key, []).append(ev)

        branch_slot = {"L": 0, "S": 1}
        for e_abs, evs in sorted(classes.items()):
            if e_abs < 1e-12 * self.field.e0:
                continue  # beat node: no ionization from this event
            scan = _class_scan(e_abs / self.field.omega, self.rmap,
                               self.field.omega)

            def solve(ich):
                return self._solve_channel_roots(e_abs, ich, scan)

            if self.threads > 1:
                with ThreadPoolExecutor(max_workers=self.threads) as pool:
                    roots = list(pool.map(solve, range(len(self.channels))))
            else:
                roots = [solve(i) for i in range(len(self.channels))]

            tasks = [(ev, br, ich) for ev in evs for br in ("L", "S")
                     for ich in range(len(self.channels))]

            def run(task):
                ev, br, ich = task
                return self._event_channel_contribution(ev, roots[ich], br,
                                                        ich, members, t_obs)

            def consume(task, result):
                # fixed-order reduction keeps results bit-reproducible
                _, br, _ = task
                flat_idx, ie, res = result
                if flat_idx.size == 0:
                    return
                slot = branch_slot[br] if split_branches else 0
                ikp = flat_idx % n_kp
                for im in range(len(members)):
                    for ij in range(n_j):
                        # flat_idx is unique within a task: direct scatter-add
                        amp[slot, im, ie, ij, ikp] += res[im][ij]

            if self.threads > 1:
                chunk = 4 * self.threads
                with ThreadPoolExecutor(max_workers=self.threads) as pool:
                    for i0 in range(0, len(tasks), chunk):
                        sub = tasks[i0:i0 + chunk]
                        for task, result in zip(sub, pool.map(run, sub)):
                            consume(task, result)
            else:
                for task in tasks:
                    consume(task, run(task))
        amp = amp.reshape(shape[:-1] + (n_k, n_p))
        if split_branches:
            return amp
        return amp[0]

    # -- reductions ----------------------------------------------------------

    def _weights(self):
        return self.grids.kf.weights

    def spectrum(self, superposition, events=None, branch_mode="coherent",
                 t_obs=None, member_amps=None):
        """Fragment spectrum for an initial superposition.

        ``branch_mode`` 'coherent' keeps short/long interference;
        'incoherent' sums the branch yields (diagnostic for the cross-term
        bound).  ``member_amps`` reuses grids from member_amplitudes.
        """
        members = superposition.nus
        coeffs = superposition.coeffs
        split = branch_mode == "incoherent"
        if member_amps is None:
            member_amps = self.member_amplitudes(members, events=events,
                                                 t_obs=t_obs,
                                                 split_branches=split)
        if split:
            combined = np.tensordot(coeffs, member_amps, axes=([0], [1]))
            dens = np.sum(np.abs(combined) ** 2, axis=0)  # sum branch yields
        else:
            combined = np.tensordot(coeffs, member_amps, axes=([0], [0]))
            dens = np.abs(combined) ** 2
        w = self._weights()
        per_j = np.einsum("ejkp,kp->ej", dens, w)
        w_e = per_j.sum(axis=1)
        meta = self._meta(events=events, branch_mode=branch_mode)
        return SpectrumResult(self.grids.e_release.copy(), w_e,
                              {j: per_j[:, i] for i, j in enumerate(self.j_list)},
                              meta)

    def total_yield_scan(self, phis, members=(0, 1), events=None,
                         member_amps=None):
        """W_T as a function of the relative phase of a two-member state.

        The scan is exact in phi: W_T(phi) = (I00 + I11)/2 + Re(e^{i phi} I01)
        with the overlap integrals of the two member grids.
        """
        if member_amps is None:
            member_amps = self.member_amplitudes(members, events=events)
        w = self._weights()
        de = _trapezoid_weights(self.grids.e_release)
        a0 = member_amps[0]
        a1 = member_amps[1]
        i00 = np.einsum("ejkp,kp,e->", np.abs(a0) ** 2, w, de).real
        i11 = np.einsum("ejkp,kp,e->", np.abs(a1) ** 2, w, de).real
        i01 = np.einsum("ejkp,ejkp,kp,e->", np.conj(a0), a1, w, de)
        phis = np.asarray(phis, dtype=float)
        return 0.5 * (i00 + i11) + np.real(np.exp(1j * phis) * i01)

    def coincidence_ring_map(self, superposition, e_d_ev, k_max=1.2,
                             n_side=161, events=None):
        """|amplitude|^2 over (k_fx, k_fy) at fixed fragment energy, k_fz=0."""
        from .constants import ev_to_au
        e_release = 2.0 * ev_to_au(e_d_ev)
        if e_release <= 0:
            raise SliceOutOfRange("fragment energy slice must be positive")
        kpar = np.linspace(-k_max, k_max, n_side)
        kperp = np.linspace(0.0, k_max, (n_side + 1) // 2)
        sub = RecollisionEngine(self.field, self.molecular, self.model,
                                SpectrumGrids(np.array([e_release]),
                                              KfGrid(kpar, kperp)),
                                channels=self.channels, threads=self.threads)
        # single-energy grid: tables rebuilt for the slice energy only
        amps = sub.member_amplitudes(superposition.nus, events=events)
        combined = np.tensordot(superposition.coeffs, amps, axes=([0], [0]))
        dens = np.sum(np.abs(combined[0]) ** 2, axis=0)  # sum over J
        # mirror k_perp -> +-k_fy
        ky = np.concatenate((-kperp[:0:-1], kperp))
        full = np.concatenate((dens[:, :0:-1], dens), axis=1)
        return kpar, ky, full

    def coincidence_energy_map(self, superposition, k_max=1.2, n_k=161,
                               events=None):
        """|amplitude|^2 over (E_D, k_fx) on the k_fy = k_fz = 0 axis."""
        kpar = np.linspace(-k_max, k_max, n_k)
        sub = RecollisionEngine(self.field, self.molecular, self.model,
                                SpectrumGrids(self.grids.e_release,
                                              KfGrid(kpar, np.array([0.0]))),
                                channels=self.channels, threads=self.threads,
                                tables=self.tables)
        amps = sub.member_amplitudes(superposition.nus, events=events)
        combined = np.tensordot(superposition.coeffs, amps, axes=([0], [0]))
        dens = np.sum(np.abs(combined[..., 0]) ** 2, axis=1)  # sum over J
        return self.grids.e_release, kpar, dens

    def amplitude_grid(self, superposition, events=None):
        """AmplitudeGrid of the combined superposition (coherent branches)."""
        amps = self.member_amplitudes(superposition.nus, events=events)
        combined = np.tensordot(superposition.coeffs, amps, axes=([0], [0]))
        return AmplitudeGrid(self.grids.e_release.copy(), list(self.j_list),
                             self.grids.kf, combined)

    def _meta(self, **extra):
        meta = dict(
            e0=self.field.e0, omega=self.field.omega,
            delta_omega=self.field.delta_omega, n_cycles=self.field.n_cycles,
            mode=self.field.mode.value, j_max=self.model.j_max,
            channels=list(self.channels),
            n_e=self.grids.e_release.size,
            n_kpar=self.grids.kf.k_par.size,
            n_kperp=self.grids.kf.k_perp.size,
        )
        meta.update(extra)
        return meta
