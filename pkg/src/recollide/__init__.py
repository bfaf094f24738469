"""Recollision-induced dissociation of D2+.

Library for batch simulation of attosecond electron-recollision
dissociation: strong-field (SFA, stationary-phase) amplitudes and their
field-free Born wave-packet scattering counterpart, plus the scenario
drivers (pump-dump wavelength scans, bichromatic phase control, many-cycle
two-color control, field-free probing, coincidence maps).
"""

from . import constants, errors, fields, molstruct, saddle, impact, spectra, sfa, freescatter

__all__ = [
    "constants",
    "errors",
    "fields",
    "molstruct",
    "saddle",
    "impact",
    "spectra",
    "sfa",
    "freescatter",
]

__version__ = "0.1.0"
