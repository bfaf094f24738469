"""Physical constants and unit conversions. Internal unit system is Hartree atomic units."""

import math

HARTREE_EV = 27.211386245988        # eV per hartree
AU_TIME_FS = 0.024188843265857      # fs per atomic time unit
C_AU = 137.035999084                # speed of light, au
BOHR_NM = 0.0529177210903           # nm per bohr

M_DEUTERON = 3670.48296788          # deuteron mass, electron masses
MU_NUCLEAR_D2 = M_DEUTERON / 2.0    # reduced mass of the two nuclei in D2 / D2+
M_ION_D2P = 2.0 * M_DEUTERON        # total D2+ mass (electron mass neglected)


def omega_from_wavelength_nm(wavelength_nm):
    """Carrier angular frequency in au for a vacuum wavelength in nm."""
    return 2.0 * math.pi * C_AU * BOHR_NM / wavelength_nm


def wavelength_nm_from_omega(omega_au):
    return 2.0 * math.pi * C_AU * BOHR_NM / omega_au


def ev_to_au(e_ev):
    return e_ev / HARTREE_EV


def au_to_ev(e_au):
    return e_au * HARTREE_EV


def fs_to_au(t_fs):
    return t_fs / AU_TIME_FS


def au_to_fs(t_au):
    return t_au * AU_TIME_FS
