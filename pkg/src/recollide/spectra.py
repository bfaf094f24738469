"""Grids, amplitude containers, spectra and small fitting utilities shared
by the strong-field and field-free engines."""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .constants import au_to_ev, ev_to_au


@dataclass(frozen=True)
class KfGrid:
    """Cylindrical final-momentum grid about the polarization axis.

    Azimuthal symmetry is analytic: the integration measure is
    2 pi k_perp dk_perp dk_par with trapezoid weights.
    """

    k_par: np.ndarray
    k_perp: np.ndarray

    @staticmethod
    def default(k_par_max=3.0, n_par=128, k_perp_max=2.5, n_perp=64):
        return KfGrid(np.linspace(-k_par_max, k_par_max, n_par),
                      np.linspace(0.0, k_perp_max, n_perp))

    @property
    def weights(self):
        """Quadrature weights, shape (n_par, n_perp)."""
        return np.outer(_trapezoid_weights(self.k_par),
                        2.0 * np.pi * self.k_perp * _trapezoid_weights(self.k_perp))


def _trapezoid_weights(x):
    w = np.empty_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    return w


@dataclass(frozen=True)
class SpectrumGrids:
    """Energy grid (asymptotic release energy, au) plus the k_f grid."""

    e_release: np.ndarray
    kf: KfGrid

    @staticmethod
    def default(e_d_max_ev=15.0, n_e=120, **kf_kwargs):
        e_max = ev_to_au(2.0 * e_d_max_ev)
        e = (np.arange(n_e) + 0.5) * (e_max / n_e)
        return SpectrumGrids(e, KfGrid.default(**kf_kwargs))


@dataclass
class AmplitudeGrid:
    """Complex recollision amplitudes per (E, J, k_par, k_perp) cell."""

    e_release: np.ndarray
    j_list: list
    kf: KfGrid
    amp: np.ndarray  # complex, (nE, nJ, nPar, nPerp)

    def density(self):
        """|amplitude|^2 integrated over k_f per (E, J): shape (nE, nJ)."""
        w = self.kf.weights
        return np.einsum("ejkp,kp->ej", np.abs(self.amp) ** 2, w)


@dataclass
class SpectrumResult:
    """Fragment-energy spectrum with the derived D+ representation.

    ``w_e`` samples the yield density over the release energy E shared by
    the two nuclei; the D+ kinetic-energy spectrum is the change of
    variables E_D = E/2 (each fragment takes half the release), so
    ``w_d = 2 w_e`` on ``e_d_ev = E/2``.  Units of w are arbitrary.
    """

    e_release: np.ndarray
    w_e: np.ndarray
    per_j: dict
    meta: dict = dc_field(default_factory=dict)

    @property
    def e_d_ev(self):
        return 0.5 * au_to_ev(self.e_release)

    @property
    def w_d(self):
        return 2.0 * self.w_e

    @property
    def w_total(self):
        return float(np.trapezoid(self.w_e, self.e_release))

    def peak_e_d_ev(self):
        return peak_position(self.e_d_ev, self.w_d)


def peak_position(x, y):
    """Location of the maximum of sampled data, parabolic-refined."""
    i = int(np.argmax(y))
    if 0 < i < len(x) - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            return float(x[i] + 0.5 * (y0 - y2) / denom * (x[1] - x[0]))
    return float(x[i])


def cosine_fit(phi, w):
    """Least-squares fit w ~ a + b cos(phi + phi0); returns a, b, phi0, r2."""
    phi = np.asarray(phi, dtype=float)
    w = np.asarray(w, dtype=float)
    basis = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    coef, *_ = np.linalg.lstsq(basis, w, rcond=None)
    a, p, q = coef
    b = float(np.hypot(p, q))
    phi0 = float(np.arctan2(-q, p))
    resid = w - basis @ coef
    ss_tot = float(np.sum((w - w.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"a": float(a), "b": b, "phi0": phi0, "r2": r2,
            "contrast": b / float(a) if a != 0 else np.inf}


def pearson(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.sum(xc * yc) / np.sqrt(np.sum(xc**2) * np.sum(yc**2)))


def peak_spacings(x, y, rel_height=0.2):
    """Spacings between successive interior maxima of y(x) above a floor."""
    y = np.asarray(y, dtype=float)
    floor = rel_height * y.max()
    idx = [i for i in range(1, len(y) - 1)
           if y[i] >= y[i - 1] and y[i] > y[i + 1] and y[i] > floor]
    pos = [peak_position(x[max(0, i - 1):i + 2], y[max(0, i - 1):i + 2]) for i in idx]
    return np.diff(np.array(pos))
