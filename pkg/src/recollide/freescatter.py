"""Field-free Born scattering of prepared electron + D2+ wave packets.

The comparison engine for the strong-field recollision results: an
independently prepared collinear electron / ion pair (Gaussian translational
packets, a ladder of ionic vibrational channels) scatters through the same
impact-excitation elements.  Total momentum is conserved channel by channel,
so the problem is solved per center-of-mass momentum K and averaged
incoherently; for initial states separable in (relative, COM) momenta the K
average factors out entirely.

Two packet frames are supported: RELATIVE_COM specs are separable Gaussians
in the relative and COM momenta (entangled in the lab particles), LAB specs
are separable in the electron and ion lab momenta (non-entangled) and are
transformed to the relative frame in closed form.
"""

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np
from scipy.special import eval_legendre

from . import impact as imp
from .constants import M_ION_D2P
from .errors import ClosedChannel
from .spectra import SpectrumResult, SpectrumGrids, _trapezoid_weights


class Frame(Enum):
    RELATIVE_COM = "relative_com"
    LAB = "lab"


def lab_to_relative(p, P, m_ion=M_ION_D2P):
    """(electron, ion) lab momenta -> (COM, relative) momenta."""
    if m_ion <= 0:
        raise ValueError("ion mass must be positive")
    p = np.asarray(p, dtype=float)
    P = np.asarray(P, dtype=float)
    big_k = p + P
    k = (m_ion * p - P) / (m_ion + 1.0)
    return big_k, k


def relative_to_lab(big_k, k, m_ion=M_ION_D2P):
    """Exact inverse of lab_to_relative."""
    big_k = np.asarray(big_k, dtype=float)
    k = np.asarray(k, dtype=float)
    p = k + big_k / (m_ion + 1.0)
    P = big_k * m_ion / (m_ion + 1.0) - k
    return p, P


def vib_coeffs_recollision(molecular, tau_d, e_birth=0.065, members=((0, 1.0),),
                           channels=None):
    """Ionic channel coefficients mimicking the post-ionization wave packet.

    Franck-Condon overlap times the tunneling exponential at the birth
    field, evolved for the delay tau_d; coherent over the requested neutral
    members.  Returns (normalized coefficients, squared pre-normalization
    weight) over the molecular ion ladder (or the ``channels`` subset).
    """
    if channels is None:
        channels = range(len(molecular.ion_states))
    channels = list(channels)
    e_n = molecular.ion_energies[channels]
    a = np.zeros(len(channels), dtype=complex)
    for m, coeff in members:
        i_p = e_n - molecular.e_i[m]
        a += coeff * molecular.fc_matrix[channels, m] * np.exp(
            -((2.0 * i_p) ** 1.5) / (3.0 * abs(e_birth)))
    a = a * np.exp(-1j * e_n * tau_d)
    norm2 = float(np.sum(np.abs(a) ** 2))
    return a / math.sqrt(norm2), norm2


@dataclass(frozen=True)
class WavePacketSpec:
    """Incident collinear scattering state along the beam axis.

    Gaussian translational packets (centers/widths in au) and a normalized
    ladder of ionic vibrational coefficients.  RELATIVE_COM packets are
    (k, K) separable; LAB packets are (p, P) separable.
    """

    frame: Frame
    rel_center: float = 1.5     # k0 (REL) or p0 (LAB)
    rel_width: float = 0.5      # dk or dp
    com_center: float = 0.0     # K0 or P0
    com_width: float = 1.0      # dK or dP
    vib_coeffs: np.ndarray = None
    channels: tuple = ()
    tau_d: float = 0.0
    m_ion: float = M_ION_D2P

    def __post_init__(self):
        if self.rel_width <= 0 or self.com_width <= 0:
            raise ValueError("packet widths must be positive")
        a = np.asarray(self.vib_coeffs, dtype=complex)
        if a.ndim != 1 or a.size != len(self.channels):
            raise ValueError("vib_coeffs must match the channel list")
        norm = math.sqrt(float(np.sum(np.abs(a) ** 2)))
        object.__setattr__(self, "vib_coeffs", a / norm)

    def psi(self, k, big_k):
        """Translational amplitude at relative momentum k and COM momentum K."""
        k = np.asarray(k, dtype=float)
        big_k = np.asarray(big_k, dtype=float)
        pref = 1.0 / math.sqrt(math.pi * self.rel_width * self.com_width)
        if self.frame is Frame.RELATIVE_COM:
            x = (k - self.rel_center) / self.rel_width
            y = (big_k - self.com_center) / self.com_width
        else:
            p, big_p = relative_to_lab(big_k, k, self.m_ion)
            x = (p - self.rel_center) / self.rel_width
            y = (big_p - self.com_center) / self.com_width
        return pref * np.exp(-0.5 * x**2) * np.exp(-0.5 * y**2)

    @property
    def relative_marginal(self):
        """(center, width) of the relative-momentum marginal."""
        if self.frame is Frame.RELATIVE_COM:
            return self.rel_center, self.rel_width
        m = self.m_ion
        center = (m * self.rel_center - self.com_center) / (m + 1.0)
        width = math.sqrt((m * self.rel_width) ** 2 + self.com_width**2) / (m + 1.0)
        return center, width

    @property
    def com_marginal(self):
        if self.frame is Frame.RELATIVE_COM:
            return self.com_center, self.com_width
        return (self.rel_center + self.com_center,
                math.sqrt(self.rel_width**2 + self.com_width**2))


def initial_projection(spec, ich, k_i, big_k):
    """<channel ich; k_i; K | initial packet> for the spec's channel list."""
    return spec.vib_coeffs[ich] * spec.psi(k_i, big_k)


def k_i0(molecular, e_total, n, k_f):
    """Energy-shell incident relative momentum for channel (E, n) at k_f."""
    k_f = np.asarray(k_f, dtype=float)
    arg = float(k_f @ k_f) + 2.0 * (e_total - molecular.ion_states[n].energy)
    if arg < 0.0:
        raise ClosedChannel(f"channel n={n} closed at this energy")
    return math.sqrt(arg)


def scattered_projection(spec, molecular, model, e_release, j, k_f, big_k):
    """On-shell scattered amplitude <E,J; k_f; K | final state>.

    Coherent over the spec's channels: (2 pi / k_i0) times the impact
    element at (k_i0 x, k_f) times the initial projection, per channel.
    """
    e_total = molecular.total_energy(e_release)
    k_f = np.asarray(k_f, dtype=float)
    total = 0.0 + 0.0j
    for ich, n in enumerate(spec.channels):
        try:
            ki = k_i0(molecular, e_total, n, k_f)
        except ClosedChannel:
            continue
        m_ee = imp.vee_matrix_element(model, molecular, e_release, j, n,
                                      np.array([ki, 0.0, 0.0]), k_f)
        total += (2.0 * np.pi / ki) * m_ee * initial_projection(spec, ich, ki, big_k)
    return total


class FieldFreeEngine:
    """Grid evaluator for field-free wave-packet scattering yields."""

    def __init__(self, molecular, model, grids=None, channels=None,
                 n_com_quad=48, tables=None):
        self.molecular = molecular
        self.model = model
        self.grids = grids if grids is not None else SpectrumGrids.default()
        if channels is None:
            channels = list(range(min(16, len(molecular.ion_states))))
        self.channels = list(channels)
        self.n_com_quad = n_com_quad
        if tables is not None and list(tables.channels) == self.channels \
                and tables.e_release_grid.shape == self.grids.e_release.shape \
                and np.allclose(tables.e_release_grid, self.grids.e_release):
            self.tables = tables
        else:
            self.tables = imp.ImpactTables(model, molecular,
                                           self.grids.e_release, self.channels)
        self.j_list = model.j_list
        e_total = molecular.total_energy(self.grids.e_release)
        self._d_block = e_total[:, None] - molecular.ion_energies[None, self.channels]
        kpar = self.grids.kf.k_par[None, :, None]
        kperp = self.grids.kf.k_perp[None, None, :]
        self._kf2 = kpar**2 + kperp**2

    def _channel_fields(self, ich, j):
        """(B, k_i0) for one channel and partial wave on the full grid.

        B is the scattering kernel 2 pi / k_i0 times the impact element at
        the collinear on-shell geometry; closed cells are zero.
        """
        kpar = self.grids.kf.k_par[None, :, None]
        kperp = self.grids.kf.k_perp[None, None, :]
        arg = self._kf2 + 2.0 * self._d_block[:, ich][:, None, None]
        open_mask = arg > 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            ki = np.sqrt(np.where(open_mask, arg, np.nan))
            q_x = ki - kpar
            q = np.hypot(q_x, kperp)
            cosg = q_x / np.maximum(q, self.model.q_min)
            e_idx = np.broadcast_to(
                np.arange(self.grids.e_release.size)[:, None, None], q.shape)
            radial = self.tables.gather(j, ich, e_idx,
                                        np.where(open_mask, q, 0.0))
            eff = imp.electronic_form_factor(self.model, q)
            kernel = np.where(q >= self.model.q_min,
                              self.model.coupling_norm * 4.0 * np.pi / q**2, 0.0)
            vee = 1j * kernel * eff * (2 * j + 1) * radial * eval_legendre(j, cosg)
            b = np.where(open_mask, 2.0 * np.pi * vee / ki, 0.0)
            ki = np.where(open_mask, ki, np.nan)
        return b, ki

    def member_columns(self, spec_like, weight_matrix):
        """Amplitude grids per member column for scan recombination.

        ``weight_matrix`` has shape (nChannels, nMembers); the packet
        geometry comes from ``spec_like`` (a WavePacketSpec whose
        vib_coeffs are ignored).  RELATIVE_COM frame only (the COM factor
        integrates out).
        """
        if spec_like.frame is not Frame.RELATIVE_COM:
            raise ValueError("member columns require a RELATIVE_COM packet")
        w = np.asarray(weight_matrix, dtype=complex)
        n_members = w.shape[1]
        shape = (n_members, self.grids.e_release.size, len(self.j_list),
                 self.grids.kf.k_par.size, self.grids.kf.k_perp.size)
        cols = np.zeros(shape, dtype=np.complex128)
        pref = 1.0 / math.sqrt(math.pi * spec_like.rel_width)
        for ij, j in enumerate(self.j_list):
            for ich in range(len(self.channels)):
                b, ki = self._channel_fields(ich, j)
                gauss = pref * np.exp(
                    -0.5 * ((ki - spec_like.rel_center) / spec_like.rel_width) ** 2)
                gauss = np.where(np.isfinite(gauss), gauss, 0.0)
                for im in range(n_members):
                    cols[im, :, ij, :, :] += b * gauss * w[ich, im]
        return cols

    def yields(self, spec):
        """Fragment spectrum for a prepared packet (either frame).

        Separable (RELATIVE_COM) packets integrate the COM factor
        analytically; LAB packets average W_K incoherently over a
        Gauss-Legendre COM-momentum quadrature.
        """
        n_e = self.grids.e_release.size
        per_j = np.zeros((n_e, len(self.j_list)))
        w_int = self.grids.kf.weights
        if spec.frame is Frame.RELATIVE_COM:
            w_matrix = spec.vib_coeffs[:, None]
            cols = self.member_columns(spec, w_matrix)[0]
            dens = np.abs(cols) ** 2
            per_j = np.einsum("ejkp,kp->ej", dens, w_int)
        else:
            k0, sig_k = spec.com_marginal
            nodes, wq = np.polynomial.legendre.leggauss(self.n_com_quad)
            k_lo, k_hi = k0 - 6.0 * sig_k, k0 + 6.0 * sig_k
            big_k = 0.5 * (k_hi - k_lo) * nodes + 0.5 * (k_hi + k_lo)
            wq = 0.5 * (k_hi - k_lo) * wq
            for ij, j in enumerate(self.j_list):
                chan = [self._channel_fields(ich, j)
                        for ich in range(len(self.channels))]
                for km, wk in zip(big_k, wq):
                    amp = np.zeros_like(chan[0][0])
                    for ich in range(len(self.channels)):
                        b, ki = self._channel_fields_cached(chan, ich)
                        psi = spec.psi(np.where(np.isfinite(ki), ki, 0.0), km)
                        psi = np.where(np.isfinite(ki), psi, 0.0)
                        amp += b * psi * spec.vib_coeffs[ich]
                    per_j[:, ij] += wk * np.einsum("ekp,kp->e",
                                                   np.abs(amp) ** 2, w_int)
        w_e = per_j.sum(axis=1)
        meta = dict(frame=spec.frame.value, tau_d=spec.tau_d,
                    channels=list(self.channels), j_max=self.model.j_max)
        return SpectrumResult(self.grids.e_release.copy(), w_e,
                              {j: per_j[:, i] for i, j in enumerate(self.j_list)},
                              meta)

    @staticmethod
    def _channel_fields_cached(chan, ich):
        return chan[ich]

    def total_yield_scan(self, phis, spec_like, weight_matrix):
        """Exact-in-phi total-yield scan over a two-member weight matrix."""
        cols = self.member_columns(spec_like, weight_matrix)
        w = self.grids.kf.weights
        de = _trapezoid_weights(self.grids.e_release)
        i00 = np.einsum("ejkp,kp,e->", np.abs(cols[0]) ** 2, w, de).real
        i11 = np.einsum("ejkp,kp,e->", np.abs(cols[1]) ** 2, w, de).real
        i01 = np.einsum("ejkp,ejkp,kp,e->", np.conj(cols[0]), cols[1], w, de)
        phis = np.asarray(phis, dtype=float)
        return 0.5 * (i00 + i11) + np.real(np.exp(1j * phis) * i01)
