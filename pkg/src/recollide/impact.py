"""Electron-impact excitation matrix elements for the bonding -> antibonding
transition, in the plane-wave first Born approximation.

The bound electron is modeled with two-center LCAO 1s orbitals of
configurable decay.  The Born kernel for momentum transfer q factorizes
into the Coulomb kernel 1/q^2, a frozen-geometry electronic transition form
factor, and the two-center interference factor sin(q.R/2) resolved on the
nuclear coordinate.  Expanding sin(q.R cos(gamma)/2) in Legendre order J
keeps only odd partial waves (the g -> u selection rule) with radial kernel
(+-) j_J(qR/2); the R dependence of that kernel carries the strong
bond-length sensitivity of the dissociation step.

Absolute normalization is arbitrary (``coupling_norm``); yields are
reported in arbitrary units throughout.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_legendre, spherical_jn

from .errors import GridMismatch
from .molstruct import solve_continuum_batch


@dataclass(frozen=True)
class ImpactModel:
    """Parameters of the Born impact-excitation model.

    orbital_decay: effective hydrogenic exponent of the bound 1s orbitals.
    coupling_norm: overall multiplicative constant (arbitrary units).
    j_max: highest retained partial wave (odd; even J vanish by parity).
    q_min: forward regularization; transfers below it contribute zero.
    form_factor_bond: frozen bond length entering the electronic factor.
    """

    orbital_decay: float = 1.2
    coupling_norm: float = 1.0
    j_max: int = 9
    q_min: float = 1e-3
    form_factor_bond: float = 2.0

    def __post_init__(self):
        if self.orbital_decay <= 0:
            raise ValueError("orbital_decay must be positive")
        if self.j_max < 1 or self.j_max % 2 == 0:
            raise ValueError("j_max must be an odd integer >= 1")
        if self.q_min <= 0:
            raise ValueError("q_min must be positive")

    @property
    def j_list(self):
        return list(range(1, self.j_max + 1, 2))


def atomic_form_factor(model, q):
    """1s charge form factor (1 + (q/2a)^2)^-2 for orbital decay a."""
    q = np.asarray(q, dtype=float)
    return (1.0 + (q / (2.0 * model.orbital_decay)) ** 2) ** -2


def electronic_form_factor(model, q):
    """Frozen-geometry electronic transition factor of the g -> u step.

    Product of the atomic 1s form factor and the two-center interference
    sine at the model bond length; vanishes at q = 0 (orthogonal electronic
    states) and decays by a power law at large q.
    """
    q = np.asarray(q, dtype=float)
    return atomic_form_factor(model, q) * np.sin(0.5 * q * model.form_factor_bond)


def odd_wave_kernel(j, x):
    """Radial kernel g_J of Legendre order J in the expansion of
    sin(x cos(gamma)): (-1)**((J-1)/2) j_J(x) for odd J, zero for even J."""
    x = np.asarray(x, dtype=float)
    if j % 2 == 0:
        return np.zeros_like(x)
    sign = -1.0 if (j // 2) % 2 else 1.0
    return sign * spherical_jn(j, x)


def nuclear_transition(molecular, e_release, j, n, q):
    """Radial integral <chi_u(E,J) | g_J(qR/2) | chi_g_n> on the shared grid.

    Exactly zero for even J.  ``e_release`` is the continuum energy above
    the repulsive-curve asymptote.
    """
    if j % 2 == 0:
        return 0.0
    chi_g = molecular.ion_states[n]
    if chi_g.r.shape != molecular.grid.shape or not np.array_equal(chi_g.r, molecular.grid):
        raise GridMismatch("bound state not on the molecular grid")
    if q == 0.0:
        return 0.0
    state = molecular.continuum(e_release, j)
    kern = odd_wave_kernel(j, 0.5 * q * molecular.grid)
    return float(np.trapezoid(state.radial_fn * kern * chi_g.radial_fn,
                              molecular.grid))


def vee_matrix_element(model, molecular, e_release, j, n, k_i, k_f):
    """First Born impact-excitation element for channel (E, J, n).

    Product of the 1/q^2 Coulomb kernel, the electronic transition form
    factor, the channel radial integral and the order-J Legendre angular
    factor at the scattering geometry, with q = k_i - k_f.  Transfers below
    q_min are regularized to zero.  The element is imaginary for real radial
    functions, so element(ki -> kf) = conj(element(kf -> ki)).
    """
    if j % 2 == 0:
        return 0.0 + 0.0j
    k_i = np.asarray(k_i, dtype=float)
    k_f = np.asarray(k_f, dtype=float)
    q_vec = k_i - k_f
    q = float(np.linalg.norm(q_vec))
    if q < model.q_min:
        return 0.0 + 0.0j
    cos_gamma = q_vec[0] / q
    radial = nuclear_transition(molecular, e_release, j, n, q)
    ang = (2 * j + 1) * eval_legendre(j, cos_gamma)
    val = (model.coupling_norm * 4.0 * np.pi / q**2
           * electronic_form_factor(model, q) * radial * ang)
    return 1j * val


# ---------------------------------------------------------------------------
# cached tables for the grid engines

class ImpactTables:
    """Radial integrals on (E-grid, channel, q-grid) for fast evaluation.

    Builds the energy-normalized continuum set once per (J, E) and contracts
    it with the bound channels against the j_J(qR/2) kernels.  ``gather``
    interpolates linearly in q for arrays of (E-index, q) pairs.
    """

    def __init__(self, model, molecular, e_release_grid, channels,
                 q_max=6.0, n_q=512):
        self.model = model
        self.molecular = molecular
        self.e_release_grid = np.asarray(e_release_grid, dtype=float)
        self.channels = list(channels)
        self.q_grid = np.linspace(0.0, q_max, n_q)
        self._dq = self.q_grid[1] - self.q_grid[0]

        r = molecular.grid
        h = r[1] - r[0]
        # truncate to the radial support of the requested bound channels
        chi = np.array([molecular.ion_states[n].radial_fn for n in self.channels])
        support = np.nonzero(np.max(np.abs(chi), axis=0) > 1e-10)[0]
        i_cut = int(support[-1]) + 8 if support.size else r.size
        i_cut = min(i_cut, r.size)
        r_cut = r[:i_cut]
        chi_cut = chi[:, :i_cut] * h  # fold quadrature weight into chi

        self.tables = {}
        for j in model.j_list:
            psi = solve_continuum_batch(molecular.sigma_u_curve,
                                        self.e_release_grid, j, r)[:, :i_cut]
            kern = odd_wave_kernel(j, 0.5 * np.outer(r_cut, self.q_grid))
            tab = np.empty((self.e_release_grid.size, len(self.channels),
                            self.q_grid.size))
            for idx in range(len(self.channels)):
                tab[:, idx, :] = (psi * chi_cut[idx][None, :]) @ kern
            self.tables[j] = tab

    def gather(self, j, channel_idx, e_idx, q):
        """Interpolated radial integrals for matched (E-index, q) arrays."""
        tab = self.tables[j][:, channel_idx, :]
        q = np.clip(q, 0.0, self.q_grid[-1] - 1e-12)
        pos = q / self._dq
        i0 = pos.astype(np.int64)
        frac = pos - i0
        left = tab[e_idx, i0]
        right = tab[e_idx, np.minimum(i0 + 1, self.q_grid.size - 1)]
        return left * (1.0 - frac) + right * frac
